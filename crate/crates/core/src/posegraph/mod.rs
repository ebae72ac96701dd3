//! Pose graphs over scans: construction from matches, decomposition into
//! edge-disjoint 5-, 4- and 3-cycles, relative pose estimation, rotation
//! averaging and the linear translation solve.

mod averaging;
mod decompose;
mod estimate;
mod pipeline;
mod translations;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solvers::{PointMatch, ScanId};

pub use averaging::{average_rotations, rotation_average, AveragingConfig, RotationAverage};
pub use decompose::{decompose_cycles, find_cycle, verify_plan, Census, CyclePlan};
pub use estimate::{
    assemble, estimate_relative_poses, plan_jobs, run_job, EdgeEstimate, EdgeFailure, EstimationConfig, Job,
    Provenance, RelativePoseSet,
};
pub use pipeline::{register, register_with, RegisterConfig, Registration};
pub use translations::{solve_translations, AbsolutePoses};

pub const DEFAULT_T_MIN: usize = 15;

pub type EdgeKey = (ScanId, ScanId);

/// Orders a pair as `(min, max)`.
pub fn edge_key(a: ScanId, b: ScanId) -> EdgeKey {
    if a <= b { (a, b) } else { (b, a) }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseGraphError {
    #[error("node {node} is not tied to reference {reference} by any inlier match")]
    RankDeficient { node: ScanId, reference: ScanId },
    #[error("graph has no nodes")]
    Empty,
}

/// Scans as nodes; an edge wherever a pair has at least `t_min` matches.
/// Edge match lists are oriented from the smaller id to the larger.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseGraph {
    pub nodes: Vec<ScanId>,
    pub edges: BTreeMap<EdgeKey, Vec<PointMatch>>,
}

impl PoseGraph {
    pub fn neighbors(&self) -> BTreeMap<ScanId, BTreeSet<ScanId>> {
        let mut adj: BTreeMap<ScanId, BTreeSet<ScanId>> = self.nodes.iter().map(|n| (*n, BTreeSet::new())).collect();
        for &(a, b) in self.edges.keys() {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    /// Matches of the edge `{a, b}` oriented from `a` to `b`.
    pub fn matches(&self, a: ScanId, b: ScanId) -> Option<Vec<PointMatch>> {
        let list = self.edges.get(&edge_key(a, b))?;
        Some(if a <= b { list.clone() } else { list.iter().map(PointMatch::flipped).collect() })
    }

    pub fn has_edge(&self, a: ScanId, b: ScanId) -> bool {
        self.edges.contains_key(&edge_key(a, b))
    }
}

/// Groups matches by unordered scan pair and keeps pairs with at least
/// `t_min` of them. Self matches are dropped. Every scan id seen in the
/// input becomes a node.
pub fn build_graph(matches: &[PointMatch], t_min: usize) -> PoseGraph {
    let mut nodes = BTreeSet::new();
    let mut grouped: BTreeMap<EdgeKey, Vec<PointMatch>> = BTreeMap::new();
    for m in matches {
        nodes.insert(m.scan_a);
        nodes.insert(m.scan_b);
        if m.scan_a == m.scan_b {
            continue;
        }
        let oriented = if m.scan_a < m.scan_b { *m } else { m.flipped() };
        grouped.entry(edge_key(m.scan_a, m.scan_b)).or_default().push(oriented);
    }
    grouped.retain(|_, v| v.len() >= t_min);
    PoseGraph { nodes: nodes.into_iter().collect(), edges: grouped }
}

/// Connected components, each sorted, ordered by smallest id.
pub fn components(nodes: &[ScanId], edges: impl Iterator<Item = EdgeKey>) -> Vec<Vec<ScanId>> {
    let mut adj: BTreeMap<ScanId, Vec<ScanId>> = nodes.iter().map(|n| (*n, Vec::new())).collect();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = alloc::vec![start];
        let mut stack = alloc::vec![start];
        while let Some(n) = stack.pop() {
            for &m in &adj[&n] {
                if seen.insert(m) {
                    comp.push(m);
                    stack.push(m);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests;
