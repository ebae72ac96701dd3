//! RANSAC over the minimal solvers.
//!
//! Each iteration draws the minimal layout edge by edge, solves, and scores
//! every returned solution against all matches of the cycle. Iteration `k`
//! owns the random stream `(seed, k)`, so iterations can run in any order or
//! in parallel and [`select_best`] still returns the same result.

use alloc::vec::Vec;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::RigidTransform;
use crate::rng::stream;
use crate::solvers::{solve, CycleInstance, CycleSolution, PointMatch, ScanId, SolveError, SolverKind, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub iterations: usize,
    pub inlier_threshold: f64,
    pub seed: u64,
    pub kind: SolverKind,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self { iterations: 1000, inlier_threshold: 50.0, seed: 0, kind: SolverKind::Cycle3 }
    }
}

/// Matches available to one cycle, oriented along it.
///
/// `adjacent[i]` links `scans[i]` to `scans[i + 1]`, `closure` links
/// `scans[0]` to the last scan. The two-scan solvers draw every match from
/// `adjacent[0]` and leave `closure` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPool {
    pub scans: Vec<ScanId>,
    pub adjacent: Vec<Vec<PointMatch>>,
    pub closure: Vec<PointMatch>,
}

impl MatchPool {
    /// Match lists in scoring order: adjacent edges, then the closure edge
    /// when the cycle has one.
    pub fn edges(&self) -> impl Iterator<Item = &[PointMatch]> {
        let closure = (self.scans.len() > 2).then_some(self.closure.as_slice());
        self.adjacent.iter().map(Vec::as_slice).chain(closure)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacent.len() + usize::from(self.scans.len() > 2)
    }

    pub fn match_count(&self) -> usize {
        self.edges().map(<[PointMatch]>::len).sum()
    }

    /// Transform taking points of the first scan of edge `e` to its second.
    pub fn edge_transform(&self, sol: &CycleSolution, e: usize) -> RigidTransform {
        if e < self.adjacent.len() {
            sol.edge_transforms[e]
        } else {
            sol.composed()
        }
    }

    pub fn check(&self, kind: SolverKind) -> Result<(), RansacError> {
        let n = kind.cycle_len();
        if self.scans.len() != n || self.adjacent.len() != n - 1 {
            return Err(RansacError::Layout { kind, scans: self.scans.len() });
        }
        let needs: Vec<usize> = if n == 2 {
            alloc::vec![kind.total_matches()]
        } else {
            let mut v = alloc::vec![kind.per_edge(); n - 1];
            v.push(kind.closure_count());
            v
        };
        for (edge, (list, need)) in self.edges().zip(needs).enumerate() {
            if list.len() < need {
                return Err(RansacError::InsufficientMatches { edge, have: list.len(), need });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RansacError {
    #[error("{kind} needs {} scans, pool has {scans}", kind.cycle_len())]
    Layout { kind: SolverKind, scans: usize },
    #[error("edge {edge} has {have} matches, the minimal sample needs {need}")]
    InsufficientMatches { edge: usize, have: usize, need: usize },
    #[error("no iteration produced a solution")]
    NoValidSample,
}

/// Inlier indices per pool edge and the summed distance of those inliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inliers {
    pub per_edge: Vec<Vec<usize>>,
    pub residual_sum: f64,
}

impl Inliers {
    pub fn score(&self) -> usize {
        self.per_edge.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacResult {
    pub best: CycleSolution,
    pub inliers: Vec<Vec<usize>>,
    pub score: usize,
    pub residual_sum: f64,
    pub iterations_run: usize,
    /// Iteration that produced `best`.
    pub iteration: usize,
}

/// Best hypothesis of a single iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub solution: CycleSolution,
    pub inliers: Inliers,
    pub iteration: usize,
}

impl Candidate {
    /// Higher score wins, then smaller residual sum, then earlier iteration.
    pub fn beats(&self, other: &Candidate) -> bool {
        let (a, b) = (self.inliers.score(), other.inliers.score());
        if a != b {
            return a > b;
        }
        if self.inliers.residual_sum != other.inliers.residual_sum {
            return self.inliers.residual_sum < other.inliers.residual_sum;
        }
        self.iteration < other.iteration
    }
}

/// Inliers of `solution` over the whole pool: matches whose forward
/// distance `‖T p_a − p_b‖` is at most `threshold`.
pub fn inliers(solution: &CycleSolution, pool: &MatchPool, threshold: f64) -> Inliers {
    let mut residual_sum = 0.0;
    let per_edge = pool
        .edges()
        .enumerate()
        .map(|(e, list)| {
            let t = pool.edge_transform(solution, e);
            list.iter()
                .enumerate()
                .filter_map(|(i, m)| {
                    let d = (t.apply(&m.p_a) - m.p_b).norm();
                    (d <= threshold).then(|| {
                        residual_sum += d;
                        i
                    })
                })
                .collect()
        })
        .collect();
    Inliers { per_edge, residual_sum }
}

/// Inlier count per pool edge.
pub fn count_inliers(solution: &CycleSolution, pool: &MatchPool, threshold: f64) -> Vec<usize> {
    inliers(solution, pool, threshold).per_edge.iter().map(Vec::len).collect()
}

/// Draws a minimal instance, uniformly without replacement on each edge.
pub fn sample_instance<R: rand::Rng + ?Sized>(pool: &MatchPool, kind: SolverKind, rng: &mut R) -> CycleInstance {
    let pick = |list: &[PointMatch], k: usize, rng: &mut R| -> Vec<PointMatch> {
        sample(rng, list.len(), k).into_iter().map(|i| list[i]).collect()
    };
    if kind.cycle_len() == 2 {
        let mut drawn = pick(&pool.adjacent[0], kind.total_matches(), rng);
        let closure = drawn.split_off(kind.per_edge());
        return CycleInstance { kind, scans: pool.scans.clone(), adjacent: alloc::vec![drawn], closure };
    }
    let adjacent = pool.adjacent.iter().map(|l| pick(l, kind.per_edge(), rng)).collect();
    let closure = pick(&pool.closure, kind.closure_count(), rng);
    CycleInstance { kind, scans: pool.scans.clone(), adjacent, closure }
}

/// One RANSAC iteration. `Err` when the solver rejected the sample,
/// `Ok(None)` when it returned no solution.
pub fn run_iteration(pool: &MatchPool, config: &RansacConfig, iteration: usize) -> Result<Option<Candidate>, SolveError> {
    let mut rng = stream(config.seed, iteration as u64);
    let inst = sample_instance(pool, config.kind, &mut rng);
    let opts = SolverOptions::with_accept_tol(config.inlier_threshold);
    let set = solve(&inst, &opts)?;
    let mut best: Option<Candidate> = None;
    for sol in set.solutions {
        let inl = inliers(&sol, pool, config.inlier_threshold);
        let cand = Candidate { solution: sol, inliers: inl, iteration };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    Ok(best)
}

/// Reduces per-iteration outcomes, given in iteration order.
pub fn select_best<I>(outcomes: I) -> Result<RansacResult, RansacError>
where
    I: IntoIterator<Item = Result<Option<Candidate>, SolveError>>,
{
    let mut best: Option<Candidate> = None;
    let mut ran = 0;
    for cand in outcomes.into_iter().inspect(|_| ran += 1).flatten().flatten() {
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    let c = best.ok_or(RansacError::NoValidSample)?;
    Ok(RansacResult {
        score: c.inliers.score(),
        residual_sum: c.inliers.residual_sum,
        inliers: c.inliers.per_edge,
        best: c.solution,
        iterations_run: ran,
        iteration: c.iteration,
    })
}

/// Runs exactly `config.iterations` iterations and keeps the hypothesis
/// with the most inliers over all edges.
pub fn ransac_cycle(pool: &MatchPool, config: &RansacConfig) -> Result<RansacResult, RansacError> {
    pool.check(config.kind)?;
    select_best((0..config.iterations).map(|k| run_iteration(pool, config, k)))
}
