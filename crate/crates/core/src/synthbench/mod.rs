//! Synthetic scenes, noise models and the simulation studies.

mod comparison;
mod graphs;
mod histogram;
mod instances;
mod scene;

pub use comparison::{run_method_comparison, run_trial, summarize, ComparisonConfig, ComparisonRow, Method, TrialMetrics};
pub use graphs::{generate_graph, rotation_graph, GraphConfig, RotationGraph, RotationGraphConfig, SyntheticGraph};
pub use histogram::{histogram_trial, solution_count_histogram, Histogram, DEFAULT_HISTOGRAM_TRIALS};
pub use instances::{planted_instance, random_in_cube, random_pose, random_rotation, PlantedInstance};
pub use scene::{
    apply_noise, apply_noise_world, generate_scene, pool_from_poses, LabeledMatch, NoiseConfig, NoiseModel, PoolSpec,
    SceneConfig, SyntheticScene,
};
