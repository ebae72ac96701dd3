//! The JSON configuration file. Every key is optional; missing keys take
//! the library defaults, unknown keys are rejected.

use std::fs;
use std::path::Path;

use anyhow::Context;
use cyclereg_core::posegraph::RegisterConfig;
use cyclereg_core::synthbench::{ComparisonConfig, GraphConfig, DEFAULT_HISTOGRAM_TRIALS};
use cyclereg_core::SolverOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Tolerances of the minimal solvers (`solve`).
    pub solver: SolverOptions,
    /// Graph threshold, RANSAC, refinement and averaging (`register`).
    pub register: RegisterConfig,
    /// Noise sweep (`synth-bench`), including the scene template.
    pub comparison: ComparisonConfig,
    pub histogram: HistogramConfig,
    pub timing: TimingConfig,
    /// Synthetic scan sequence (`gen-graph`).
    pub graph: GraphConfig,
    /// Cube side for generated minimal instances (`gen-instance`).
    pub instance: InstanceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { trials: DEFAULT_HISTOGRAM_TRIALS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self { trials: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub cube_side: f64,
    pub seed: u64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self { cube_side: 400.0, seed: 0 }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Replaces every seed in the file.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.register.estimation.seed = seed;
        self.comparison.seed = seed;
        self.histogram.seed = seed;
        self.timing.seed = seed;
        self.graph.seed = seed;
        self.instance.seed = seed;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
