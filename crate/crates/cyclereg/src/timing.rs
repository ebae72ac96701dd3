//! Wall-clock timing of the minimal solvers.

use std::time::Instant;

use cyclereg_core::rng::stream;
use cyclereg_core::synthbench::planted_instance;
use cyclereg_core::{solve, SolverKind, SolverOptions};
use serde::Serialize;

use crate::eval::Summary;

/// Reference per-call times of a Matlab implementation, milliseconds.
pub const REFERENCE_MS: [(SolverKind, f64); 4] = [
    (SolverKind::Pairwise, 0.0392),
    (SolverKind::Cycle3, 0.1192),
    (SolverKind::Cycle4, 3.3422),
    (SolverKind::Cycle5, 24.954),
];

pub const TIMED_SOLVERS: [SolverKind; 4] = [SolverKind::Pairwise, SolverKind::Cycle3, SolverKind::Cycle4, SolverKind::Cycle5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingRow {
    pub solver: SolverKind,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub trials: usize,
}

/// Times `trials` separate `solve` calls per solver on random noise-free
/// instances. Instances are built before the clock starts and the first
/// few are solved once untimed.
pub fn timing_bench(kinds: &[SolverKind], trials: usize, seed: u64) -> Vec<TimingRow> {
    let opts = SolverOptions::default();
    kinds
        .iter()
        .map(|&kind| {
            let instances: Vec<_> = (0..trials)
                .map(|t| planted_instance(kind, &mut stream(seed, t as u64), 400.0).instance)
                .collect();
            for inst in instances.iter().take(10) {
                let _ = std::hint::black_box(solve(inst, &opts));
            }
            let ms: Vec<f64> = instances
                .iter()
                .map(|inst| {
                    let start = Instant::now();
                    let out = solve(std::hint::black_box(inst), &opts);
                    let dt = start.elapsed();
                    std::hint::black_box(out.ok());
                    dt.as_secs_f64() * 1e3
                })
                .collect();
            let s = Summary::of(&ms);
            TimingRow { solver: kind, mean_ms: s.mean, median_ms: s.median, trials }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingMeta {
    pub hardware: String,
    pub trials: usize,
    pub seed: u64,
    pub build: &'static str,
    /// Matlab figures for reference only.
    pub reference_ms: Vec<(SolverKind, f64)>,
}

impl TimingMeta {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            hardware: hardware_string(),
            trials,
            seed,
            build: if cfg!(debug_assertions) { "debug" } else { "release" },
            reference_ms: REFERENCE_MS.to_vec(),
        }
    }
}

/// CPU model (from `/proc/cpuinfo` when available), architecture, OS and
/// logical core count.
pub fn hardware_string() -> String {
    let model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| s.lines().find(|l| l.starts_with("model name")).and_then(|l| l.split(':').nth(1)).map(|m| m.trim().to_string()))
        .unwrap_or_else(|| String::from("unknown cpu"));
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{model}; {} {}; {cores} logical cores", std::env::consts::ARCH, std::env::consts::OS)
}
