use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{edge_key, EdgeKey, PoseGraph};
use crate::solvers::ScanId;

/// Cycles in acceptance order (all 5-cycles, then 4, then 3) and the edges
/// left for the pairwise solver.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CyclePlan {
    pub cycles: Vec<Vec<ScanId>>,
    pub leftover_edges: Vec<EdgeKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub pairwise: usize,
    #[serde(rename = "3-cycle")]
    pub cycle3: usize,
    #[serde(rename = "4-cycle")]
    pub cycle4: usize,
    #[serde(rename = "5-cycle")]
    pub cycle5: usize,
}

impl CyclePlan {
    pub fn census(&self) -> Census {
        let count = |n: usize| self.cycles.iter().filter(|c| c.len() == n).count();
        Census { pairwise: self.leftover_edges.len(), cycle3: count(3), cycle4: count(4), cycle5: count(5) }
    }

    /// Edges of a cycle: consecutive pairs plus the closing pair.
    pub fn cycle_edges(cycle: &[ScanId]) -> impl Iterator<Item = EdgeKey> + '_ {
        let n = cycle.len();
        (0..n).map(move |i| edge_key(cycle[i], cycle[(i + 1) % n]))
    }
}

type Adjacency = BTreeMap<ScanId, BTreeSet<ScanId>>;

/// First simple cycle of exactly `len` nodes over unused edges: DFS from
/// each start in ascending id, neighbours in ascending id.
pub fn find_cycle(adj: &Adjacency, used: &BTreeSet<EdgeKey>, len: usize) -> Option<Vec<ScanId>> {
    fn dfs(adj: &Adjacency, used: &BTreeSet<EdgeKey>, len: usize, path: &mut Vec<ScanId>) -> bool {
        let last = *path.last().expect("non-empty path");
        if path.len() == len {
            return !used.contains(&edge_key(last, path[0])) && adj[&last].contains(&path[0]);
        }
        for &nb in &adj[&last] {
            if used.contains(&edge_key(last, nb)) || path.contains(&nb) {
                continue;
            }
            path.push(nb);
            if dfs(adj, used, len, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    for &start in adj.keys() {
        let mut path = alloc::vec![start];
        if dfs(adj, used, len, &mut path) {
            return Some(path);
        }
    }
    None
}

/// Greedy edge-disjoint decomposition: exhausts 5-cycles, then 4-cycles,
/// then 3-cycles; remaining edges become pairwise leftovers.
pub fn decompose_cycles(graph: &PoseGraph) -> CyclePlan {
    let adj = graph.neighbors();
    let mut used = BTreeSet::new();
    let mut cycles = Vec::new();
    for len in [5, 4, 3] {
        while let Some(c) = find_cycle(&adj, &used, len) {
            used.extend(CyclePlan::cycle_edges(&c));
            cycles.push(c);
        }
    }
    let leftover_edges = graph.edges.keys().filter(|e| !used.contains(*e)).copied().collect();
    let plan = CyclePlan { cycles, leftover_edges };
    assert_partition(graph, &plan);
    plan
}

fn assert_partition(graph: &PoseGraph, plan: &CyclePlan) {
    let mut seen = BTreeSet::new();
    let all = plan.cycles.iter().flat_map(|c| CyclePlan::cycle_edges(c)).chain(plan.leftover_edges.iter().copied());
    for e in all {
        assert!(graph.edges.contains_key(&e), "plan edge {e:?} not in graph");
        assert!(seen.insert(e), "edge {e:?} used twice");
    }
    assert_eq!(seen.len(), graph.edges.len(), "plan does not cover the graph");
}

/// Replays a plan: checks disjointness and coverage, and that no accepted
/// cycle could have been a longer one given the edges still unused at the
/// time, and that the leftovers hold no cycle of length 3 to 5.
pub fn verify_plan(graph: &PoseGraph, plan: &CyclePlan) -> Result<(), String> {
    let adj = graph.neighbors();
    let mut used: BTreeSet<EdgeKey> = BTreeSet::new();
    for (i, c) in plan.cycles.iter().enumerate() {
        if !(3..=5).contains(&c.len()) {
            return Err(format!("cycle {i} has length {}", c.len()));
        }
        for longer in c.len() + 1..=5 {
            if let Some(o) = find_cycle(&adj, &used, longer) {
                return Err(format!("cycle {i} accepted while {o:?} was available"));
            }
        }
        for e in CyclePlan::cycle_edges(c) {
            if !graph.edges.contains_key(&e) {
                return Err(format!("cycle {i} uses missing edge {e:?}"));
            }
            if !used.insert(e) {
                return Err(format!("cycle {i} reuses edge {e:?}"));
            }
        }
    }
    for len in 3..=5 {
        if let Some(o) = find_cycle(&adj, &used, len) {
            return Err(format!("leftovers contain cycle {o:?}"));
        }
    }
    for e in &plan.leftover_edges {
        if !used.insert(*e) {
            return Err(format!("leftover {e:?} overlaps a cycle"));
        }
    }
    if used.len() != graph.edges.len() {
        return Err(format!("{} of {} edges covered", used.len(), graph.edges.len()));
    }
    Ok(())
}
