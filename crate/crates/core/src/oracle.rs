//! Brute-force reference solver: Levenberg–Marquardt from many random
//! starts on the full closure system, keeping converged points that meet
//! the acceptance tolerance. Slow and independent of the elimination code.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::math::wrap_angle;
use crate::rng::stream;
use crate::solvers::chain::Chain;
use crate::solvers::{CycleInstance, SolutionSet, SolveError, SolverOptions};

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { starts: 2000, max_iterations: 100, seed: 0 }
    }
}

/// All verified real solutions reachable from `starts` random starts.
pub fn multistart_solve(
    inst: &CycleInstance,
    opts: &SolverOptions,
    oracle: &OracleOptions,
) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let m = chain.unknowns();
    let mut rng = stream(oracle.seed, 0);
    let mut set = SolutionSet::default();
    for _ in 0..oracle.starts {
        let mut x: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
        levenberg_marquardt(&chain, &mut x, oracle.max_iterations);
        let sol = chain.solution(&x);
        if sol.residual <= tol {
            set.insert_dedup(sol, opts.dedup_tol);
        }
    }
    Ok(set)
}

fn levenberg_marquardt(chain: &Chain, x: &mut [f64], iterations: usize) {
    let m = x.len();
    let mut lambda = 1e-3;
    let mut cost = chain.cost(x);
    for _ in 0..iterations {
        let (r, j) = chain.linearize(x);
        let rows = r.len();
        let jm = DMatrix::from_fn(rows, m, |a, b| j[a][b]);
        let rv = DVector::from_vec(r);
        let jtj = jm.transpose() * &jm;
        let jtr = jm.transpose() * rv;
        let mut improved = false;
        for _ in 0..10 {
            let mut a = jtj.clone();
            for d in 0..m {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = a.lu().solve(&jtr) else { break };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(v, s)| wrap_angle(v - s)).collect();
            let c = chain.cost(&trial);
            if c < cost {
                x.copy_from_slice(&trial);
                let done = step.amax() < 1e-14 || cost - c < 1e-30;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if done {
                    return;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            return;
        }
    }
}
