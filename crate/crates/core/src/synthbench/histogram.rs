use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instances::planted_instance;
use crate::rng::stream;
use crate::solvers::{solve, SolveError, SolverKind, SolverOptions};

pub const DEFAULT_HISTOGRAM_TRIALS: usize = 10_000;

/// Side of the cube the histogram instances are drawn in.
const SIDE: f64 = 400.0;

/// `counts[k]` is the number of trials that returned `k` real solutions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub kind: SolverKind,
    pub trials: usize,
    pub counts: Vec<u64>,
    /// Trials where the solver returned an error.
    pub failures: u64,
}

impl Histogram {
    pub fn new(kind: SolverKind) -> Self {
        Self { kind, trials: 0, counts: alloc::vec![0; kind.max_solutions() + 1], failures: 0 }
    }

    pub fn record(&mut self, outcome: Result<usize, SolveError>) {
        self.trials += 1;
        match outcome {
            Ok(k) => {
                if k >= self.counts.len() {
                    self.counts.resize(k + 1, 0);
                }
                self.counts[k] += 1;
            }
            Err(_) => self.failures += 1,
        }
    }

    pub fn max_observed(&self) -> Option<usize> {
        self.counts.iter().rposition(|c| *c > 0)
    }

    /// `(n_solutions, count)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().copied().enumerate()
    }
}

/// Real-solution count for trial `trial`: a fresh noise-free instance drawn
/// from stream `(seed, trial)`.
pub fn histogram_trial(kind: SolverKind, seed: u64, trial: usize) -> Result<usize, SolveError> {
    let mut rng = stream(seed, trial as u64);
    let p = planted_instance(kind, &mut rng, SIDE);
    solve(&p.instance, &SolverOptions::default()).map(|s| s.len())
}

pub fn solution_count_histogram(kind: SolverKind, trials: usize, seed: u64) -> Histogram {
    let mut h = Histogram::new(kind);
    for t in 0..trials {
        h.record(histogram_trial(kind, seed, t));
    }
    h
}
