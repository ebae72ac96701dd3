use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::scene::{generate_scene, SceneConfig};
use crate::geometry::{rotation_angle_error, RigidTransform};
use crate::rng::salted;
use crate::robust::{ransac_cycle, RansacConfig};
use crate::solvers::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Pairwise,
    Cycle3,
    Cycle4Pairwise,
    Cycle5,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pairwise, Method::Cycle3, Method::Cycle4Pairwise, Method::Cycle5];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pairwise => "Pairwise",
            Method::Cycle3 => "3-cycle",
            Method::Cycle4Pairwise => "4-,2-cycle",
            Method::Cycle5 => "5-cycle",
        }
    }

    /// Scan chains solved one after another to get from scan 0 to scan 4.
    pub fn segments(self) -> Vec<(SolverKind, Vec<usize>)> {
        use alloc::vec;
        match self {
            Method::Pairwise => (0..4).map(|i| (SolverKind::Pairwise, vec![i, i + 1])).collect(),
            Method::Cycle3 => vec![(SolverKind::Cycle3, vec![0, 1, 2]), (SolverKind::Cycle3, vec![2, 3, 4])],
            Method::Cycle4Pairwise => vec![(SolverKind::Cycle4, vec![0, 1, 2, 3]), (SolverKind::Pairwise, vec![3, 4])],
            Method::Cycle5 => vec![(SolverKind::Cycle5, vec![0, 1, 2, 3, 4])],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    /// Scene template; its noise `sigma0` is overwritten per level.
    pub scene: SceneConfig,
    pub ransac_iterations: usize,
    pub inlier_threshold: f64,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            ransac_iterations: 1000,
            inlier_threshold: 50.0,
            noise_levels: alloc::vec![0.0, 1.0, 2.0, 4.0, 8.0],
            trials: 200,
            seed: 0,
        }
    }
}

/// Errors of the composed scan-0 → scan-4 transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub rot_err_deg: f64,
    pub trans_err: f64,
    pub inlier_pct: f64,
}

/// Runs one method on one trial. The scene depends only on the trial, so
/// every method and every noise level sees the same cameras and points.
pub fn run_trial(cfg: &ComparisonConfig, sigma0: f64, trial: usize, method: Method) -> Option<TrialMetrics> {
    let scene_seed = salted(cfg.seed, trial as u64);
    let mut sc = cfg.scene.clone();
    sc.seed = scene_seed;
    sc.noise.sigma0 = sigma0;
    let scene = generate_scene(&sc);
    let last = sc.n_cameras - 1;
    let mut total = RigidTransform::identity();
    let (mut inliers, mut matches) = (0usize, 0usize);
    for (k, (kind, scans)) in method.segments().into_iter().enumerate() {
        let pool = scene.pool(&scans);
        let rc = RansacConfig {
            iterations: cfg.ransac_iterations,
            inlier_threshold: cfg.inlier_threshold,
            seed: salted(scene_seed, (method as u64) << 8 | k as u64),
            kind,
        };
        let res = ransac_cycle(&pool, &rc).ok()?;
        inliers += res.score;
        matches += pool.match_count();
        total = res.best.composed().compose(&total);
    }
    let truth = scene.relative(0, last);
    Some(TrialMetrics {
        rot_err_deg: rotation_angle_error(&total.rotation, &truth.rotation),
        trans_err: (total.translation - truth.translation).norm(),
        inlier_pct: 100.0 * inliers as f64 / matches.max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub noise_sigma0: f64,
    pub mean_rot_err_deg: f64,
    pub mean_trans_err: f64,
    pub mean_inlier_pct: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Means over the successful trials, in trial order.
pub fn summarize(method: Method, sigma0: f64, outcomes: &[Option<TrialMetrics>]) -> ComparisonRow {
    let ok: Vec<&TrialMetrics> = outcomes.iter().flatten().collect();
    let n = ok.len().max(1) as f64;
    let mean = |f: fn(&TrialMetrics) -> f64| if ok.is_empty() { f64::NAN } else { ok.iter().map(|m| f(m)).sum::<f64>() / n };
    ComparisonRow {
        method,
        noise_sigma0: sigma0,
        mean_rot_err_deg: mean(|m| m.rot_err_deg),
        mean_trans_err: mean(|m| m.trans_err),
        mean_inlier_pct: mean(|m| m.inlier_pct),
        trials: outcomes.len(),
        failures: outcomes.len() - ok.len(),
    }
}

/// All levels × methods, serially. Rows are ordered by level, then method.
pub fn run_method_comparison(cfg: &ComparisonConfig) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    for &sigma in &cfg.noise_levels {
        for m in Method::ALL {
            let outcomes: Vec<_> = (0..cfg.trials).map(|t| run_trial(cfg, sigma, t, m)).collect();
            rows.push(summarize(m, sigma, &outcomes));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_exact() {
        let cfg = ComparisonConfig { ransac_iterations: 30, ..ComparisonConfig::default() };
        for trial in 0..3 {
            for m in Method::ALL {
                let r = run_trial(&cfg, 0.0, trial, m).expect("trial runs");
                assert!(r.rot_err_deg < 1e-6, "{} {}", m.name(), r.rot_err_deg);
                assert!(r.trans_err < 1e-6, "{} {}", m.name(), r.trans_err);
                assert!((r.inlier_pct - 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn summary_counts_failures() {
        let m = TrialMetrics { rot_err_deg: 1.0, trans_err: 2.0, inlier_pct: 50.0 };
        let row = summarize(Method::Cycle5, 1.0, &[Some(m), None, Some(TrialMetrics { rot_err_deg: 3.0, ..m })]);
        assert_eq!((row.trials, row.failures), (3, 1));
        assert_eq!(row.mean_rot_err_deg, 2.0);
    }
}
