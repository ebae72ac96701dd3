use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{components, PoseGraph, RelativePoseSet};
use crate::geometry::{rotation_angle, so3_exp, so3_log, RotationMatrix, Vec3};
use crate::solvers::ScanId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AveragingConfig {
    /// Scale of the robust weight `(δ² / (δ² + r²))²`, degrees.
    pub delta_deg: f64,
    /// Floor on the residual in the L1 weights `1 / max(r, ε)`, radians.
    pub eps_w: f64,
    /// Stop once the largest node update is below this, radians.
    pub tolerance: f64,
    /// Iteration cap per phase.
    pub max_iterations: usize,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        Self { delta_deg: 5.0, eps_w: 1e-5, tolerance: 1e-8, max_iterations: 100 }
    }
}

/// Absolute rotations, each taking a scan's frame into its component's
/// reference frame (the smallest id, fixed to identity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationAverage {
    pub rotations: BTreeMap<ScanId, RotationMatrix>,
    pub components: Vec<Vec<ScanId>>,
    /// Iterations spent in the L1 and robust phases.
    pub iterations: (usize, usize),
}

/// Averages relative rotations `(i, j, R_ij)`, where `R_ij` takes the frame
/// of `i` into the frame of `j`, so that `R_ij ≈ R_jᵀ R_i`.
pub fn average_rotations(nodes: &[ScanId], edges: &[(ScanId, ScanId, RotationMatrix)], cfg: &AveragingConfig) -> RotationAverage {
    let comps = components(nodes, edges.iter().map(|e| (e.0, e.1)));
    let mut rotations = BTreeMap::new();
    let mut iterations = (0, 0);
    for comp in &comps {
        let index: BTreeMap<ScanId, usize> = comp.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        let local: Vec<(usize, usize, RotationMatrix)> = edges
            .iter()
            .filter_map(|(a, b, r)| Some((*index.get(a)?, *index.get(b)?, *r)))
            .collect();
        let mut rot = spanning_tree_init(comp.len(), &local, cfg.delta_deg.to_radians());
        let l1 = l1_phase(&mut rot, &local, cfg);
        let robust = robust_phase(&mut rot, &local, cfg);
        iterations.0 = iterations.0.max(l1);
        iterations.1 = iterations.1.max(robust);
        for (k, n) in comp.iter().enumerate() {
            rotations.insert(*n, rot[k]);
        }
    }
    RotationAverage { rotations, components: comps, iterations }
}

/// Chains relative rotations from node 0 along a maximum spanning tree.
/// An edge weighs the number of triangles it closes within `δ`, so that the
/// tree prefers edges confirmed by their neighbours; ties fall to the
/// smaller pair.
fn spanning_tree_init(n: usize, edges: &[(usize, usize, RotationMatrix)], delta: f64) -> Vec<RotationMatrix> {
    let mut rel: BTreeMap<(usize, usize), RotationMatrix> = BTreeMap::new();
    for &(a, b, r) in edges {
        // R_b = R_a R_abᵀ and R_a = R_b R_ab
        rel.insert((a, b), r);
        rel.insert((b, a), r.inverse());
    }
    let mut adj: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); n];
    for &(a, b) in rel.keys() {
        adj[a].insert(b);
    }
    let mut scored: Vec<(usize, usize, usize)> = edges
        .iter()
        .map(|&(a, b, _)| {
            let support = adj[a]
                .intersection(&adj[b])
                .filter(|&&c| {
                    let loop_rot = rel[&(c, a)] * rel[&(b, c)] * rel[&(a, b)];
                    rotation_angle(&loop_rot) < delta
                })
                .count();
            (support, a.min(b), a.max(b))
        })
        .collect();
    scored.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    // Kruskal
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut tree: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for &(_, a, b) in &scored {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree[a].push(b);
            tree[b].push(a);
        }
    }
    let mut rot: Vec<Option<RotationMatrix>> = alloc::vec![None; n];
    rot[0] = Some(RotationMatrix::identity());
    let mut queue = VecDeque::from([0]);
    while let Some(a) = queue.pop_front() {
        let ra = rot[a].expect("visited");
        tree[a].sort_unstable();
        for &b in &tree[a] {
            if rot[b].is_none() {
                rot[b] = Some(ra * rel[&(a, b)].inverse());
                queue.push_back(b);
            }
        }
    }
    rot.into_iter().map(|r| r.unwrap_or_else(RotationMatrix::identity)).collect()
}

/// Residual of edge `(a, b)` in the reference frame:
/// `R_b log(R_ab R_aᵀ R_b)`. A left update `R_i ← exp(x_i) R_i` changes it
/// to first order by `x_b − x_a`.
fn residual(rot: &[RotationMatrix], a: usize, b: usize, r_ab: &RotationMatrix) -> Vec3 {
    rot[b] * so3_log(&(r_ab * rot[a].inverse() * rot[b]))
}

type Residual = (usize, usize, Vec3);

/// Minimizes `Σ w_e ‖x_b − x_a + r_e‖²` with `x_0 = 0`. Each axis
/// separates into the same weighted graph Laplacian.
fn weighted_step(n: usize, res: &[Residual], weights: &[f64]) -> Option<Vec<Vec3>> {
    let m = n - 1;
    let mut lap = DMatrix::<f64>::zeros(m, m);
    let mut rhs = [DVector::<f64>::zeros(m), DVector::<f64>::zeros(m), DVector::<f64>::zeros(m)];
    for (&(a, b, r), &w) in res.iter().zip(weights) {
        let (ia, ib) = (a.checked_sub(1), b.checked_sub(1));
        if let Some(i) = ia {
            lap[(i, i)] += w;
        }
        if let Some(j) = ib {
            lap[(j, j)] += w;
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            lap[(i, j)] -= w;
            lap[(j, i)] -= w;
        }
        for (axis, v) in rhs.iter_mut().enumerate() {
            if let Some(j) = ib {
                v[j] -= w * r[axis];
            }
            if let Some(i) = ia {
                v[i] += w * r[axis];
            }
        }
    }
    let chol = lap.cholesky()?;
    let sol: Vec<DVector<f64>> = rhs.iter().map(|v| chol.solve(v)).collect();
    let mut x = alloc::vec![Vec3::zeros(); n];
    for k in 0..m {
        x[k + 1] = Vec3::new(sol[0][k], sol[1][k], sol[2][k]);
    }
    Some(x)
}

fn residuals(rot: &[RotationMatrix], edges: &[(usize, usize, RotationMatrix)]) -> Vec<Residual> {
    edges.iter().map(|&(a, b, r)| (a, b, residual(rot, a, b, &r))).collect()
}

/// Applies `R_i ← exp(x_i) R_i` and returns the largest update norm.
fn apply_update(rot: &mut [RotationMatrix], x: &[Vec3]) -> f64 {
    let mut max_step: f64 = 0.0;
    for (r, xi) in rot.iter_mut().zip(x) {
        max_step = max_step.max(xi.norm());
        *r = so3_exp(xi) * *r;
    }
    max_step
}

/// L1 phase: each linearization is solved for the L1 objective
/// `Σ ‖x_b − x_a + r_e‖` by inner reweighting with `1 / max(·, ε)`.
fn l1_phase(rot: &mut [RotationMatrix], edges: &[(usize, usize, RotationMatrix)], cfg: &AveragingConfig) -> usize {
    if rot.len() < 2 || edges.is_empty() {
        return 0;
    }
    for it in 0..cfg.max_iterations {
        let res = residuals(rot, edges);
        let mut x = alloc::vec![Vec3::zeros(); rot.len()];
        for _ in 0..cfg.max_iterations {
            let w: Vec<f64> = res.iter().map(|&(a, b, r)| 1.0 / (x[b] - x[a] + r).norm().max(cfg.eps_w)).collect();
            let Some(next) = weighted_step(rot.len(), &res, &w) else { return it };
            let change = next.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            x = next;
            if change < cfg.tolerance {
                break;
            }
        }
        if apply_update(rot, &x) < cfg.tolerance {
            return it + 1;
        }
    }
    cfg.max_iterations
}

/// Robust phase: one reweighted Gauss–Newton step per iteration with
/// the Geman–McClure weight `w = (δ² / (δ² + ‖r‖²))²`.
fn robust_phase(rot: &mut [RotationMatrix], edges: &[(usize, usize, RotationMatrix)], cfg: &AveragingConfig) -> usize {
    if rot.len() < 2 || edges.is_empty() {
        return 0;
    }
    let d2 = cfg.delta_deg.to_radians().powi(2);
    for it in 0..cfg.max_iterations {
        let res = residuals(rot, edges);
        let w: Vec<f64> = res.iter().map(|(_, _, r)| (d2 / (d2 + r.norm_squared())).powi(2)).collect();
        let Some(x) = weighted_step(rot.len(), &res, &w) else { return it };
        if apply_update(rot, &x) < cfg.tolerance {
            return it + 1;
        }
    }
    cfg.max_iterations
}

/// Averages the rotations of every estimated edge of the graph.
pub fn rotation_average(relative: &RelativePoseSet, graph: &PoseGraph, cfg: &AveragingConfig) -> RotationAverage {
    let edges: Vec<_> = relative.estimates.values().map(|e| (e.from, e.to, e.transform.rotation)).collect();
    average_rotations(&graph.nodes, &edges, cfg)
}
