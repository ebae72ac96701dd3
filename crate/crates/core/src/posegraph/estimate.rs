use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{edge_key, CyclePlan, EdgeKey, PoseGraph};
use crate::geometry::RigidTransform;
use crate::rng::salted;
use crate::robust::{ransac_cycle, MatchPool, RansacConfig};
use crate::solvers::{refine_procrustes, PointMatch, ScanId, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    pub ransac_iterations: usize,
    pub inlier_threshold: f64,
    pub seed: u64,
    /// Procrustes refinement of each edge on its inliers.
    pub refine: bool,
    /// Edges keeping fewer inliers than this are reported as failed.
    pub min_inliers: usize,
    /// Re-solve the edges of a failed cycle with the pairwise solver.
    pub pairwise_retry: bool,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            ransac_iterations: 2000,
            inlier_threshold: 0.1,
            seed: 0,
            refine: true,
            min_inliers: 6,
            pairwise_retry: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum Provenance {
    /// Solved jointly as cycle `index` of the plan.
    Cycle { index: usize, length: usize },
    Pairwise,
}

/// Estimate for the edge `(from, to)` with `from < to`; `transform` maps
/// points of `from` into `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub from: ScanId,
    pub to: ScanId,
    pub transform: RigidTransform,
    pub inliers: Vec<PointMatch>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFailure {
    pub edge: EdgeKey,
    pub provenance: Provenance,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RelativePoseSet {
    pub estimates: BTreeMap<EdgeKey, EdgeEstimate>,
    pub failures: Vec<EdgeFailure>,
}

/// One RANSAC problem: a cycle of the plan or a leftover edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub scans: Vec<ScanId>,
    pub provenance: Provenance,
}

impl Job {
    pub fn kind(&self) -> SolverKind {
        match self.scans.len() {
            2 => SolverKind::Pairwise,
            3 => SolverKind::Cycle3,
            4 => SolverKind::Cycle4,
            _ => SolverKind::Cycle5,
        }
    }
}

pub fn plan_jobs(plan: &CyclePlan) -> Vec<Job> {
    let cycles = plan.cycles.iter().enumerate().map(|(index, c)| Job {
        scans: c.clone(),
        provenance: Provenance::Cycle { index, length: c.len() },
    });
    let pairs = plan.leftover_edges.iter().map(|&(a, b)| Job { scans: alloc::vec![a, b], provenance: Provenance::Pairwise });
    cycles.chain(pairs).collect()
}

fn pool_for(graph: &PoseGraph, scans: &[ScanId]) -> MatchPool {
    let n = scans.len();
    let get = |a, b| graph.matches(a, b).unwrap_or_default();
    let adjacent = scans.windows(2).map(|w| get(w[0], w[1])).collect();
    let closure = if n > 2 { get(scans[0], scans[n - 1]) } else { Vec::new() };
    MatchPool { scans: scans.to_vec(), adjacent, closure }
}

/// Solves job number `index` and returns one outcome per edge it covers.
/// The RANSAC seed is derived from the configured seed and `index`.
pub fn run_job(job: &Job, index: usize, graph: &PoseGraph, cfg: &EstimationConfig) -> Vec<Result<EdgeEstimate, EdgeFailure>> {
    let pool = pool_for(graph, &job.scans);
    let ransac = RansacConfig {
        iterations: cfg.ransac_iterations,
        inlier_threshold: cfg.inlier_threshold,
        seed: salted(cfg.seed, index as u64),
        kind: job.kind(),
    };
    let n = job.scans.len();
    let edges: Vec<(ScanId, ScanId)> = if n == 2 {
        alloc::vec![(job.scans[0], job.scans[1])]
    } else {
        let mut e: Vec<_> = job.scans.windows(2).map(|w| (w[0], w[1])).collect();
        e.push((job.scans[0], job.scans[n - 1]));
        e
    };
    let res = match ransac_cycle(&pool, &ransac) {
        Ok(r) => r,
        Err(err) => {
            if cfg.pairwise_retry && n > 2 {
                return edges
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &(a, b))| {
                        let retry = Job { scans: alloc::vec![a, b], provenance: Provenance::Pairwise };
                        run_job(&retry, (1 << 20) + index * 8 + k, graph, cfg)
                    })
                    .collect();
            }
            return edges
                .iter()
                .map(|&(a, b)| Err(EdgeFailure { edge: edge_key(a, b), provenance: job.provenance, reason: err.to_string() }))
                .collect();
        }
    };
    edges
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            let list = pool.edges().nth(e).expect("edge in pool");
            let inliers: Vec<PointMatch> = res.inliers[e].iter().map(|&i| list[i]).collect();
            let fail = |reason: String| EdgeFailure { edge: edge_key(a, b), provenance: job.provenance, reason };
            if inliers.len() < cfg.min_inliers {
                return Err(fail(format!("{} inliers, {} required", inliers.len(), cfg.min_inliers)));
            }
            let mut t = pool.edge_transform(&res.best, e);
            if cfg.refine {
                if let Ok(r) = refine_procrustes(&inliers) {
                    t = r;
                }
            }
            // store oriented from the smaller id
            let (from, to, transform, inliers) = if a < b {
                (a, b, t, inliers)
            } else {
                (b, a, t.inverse(), inliers.iter().map(PointMatch::flipped).collect())
            };
            Ok(EdgeEstimate { from, to, transform, inliers, provenance: job.provenance })
        })
        .collect()
}

pub fn assemble(outcomes: impl IntoIterator<Item = Result<EdgeEstimate, EdgeFailure>>) -> RelativePoseSet {
    let mut set = RelativePoseSet::default();
    for o in outcomes {
        match o {
            Ok(e) => {
                set.estimates.insert((e.from, e.to), e);
            }
            Err(f) => set.failures.push(f),
        }
    }
    set
}

/// Runs every job of the plan in order.
pub fn estimate_relative_poses(plan: &CyclePlan, graph: &PoseGraph, cfg: &EstimationConfig) -> RelativePoseSet {
    let jobs = plan_jobs(plan);
    assemble(jobs.iter().enumerate().flat_map(|(i, j)| run_job(j, i, graph, cfg)))
}
