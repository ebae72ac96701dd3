use serde::{Deserialize, Serialize};

use super::{
    build_graph, decompose_cycles, estimate_relative_poses, rotation_average, solve_translations, AbsolutePoses,
    AveragingConfig, Census, CyclePlan, EstimationConfig, PoseGraph, PoseGraphError, RelativePoseSet,
    RotationAverage, DEFAULT_T_MIN,
};
use crate::solvers::PointMatch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegisterConfig {
    pub t_min: usize,
    pub estimation: EstimationConfig,
    pub averaging: AveragingConfig,
}

impl Default for RegisterConfig {
    fn default() -> Self {
        Self { t_min: DEFAULT_T_MIN, estimation: EstimationConfig::default(), averaging: AveragingConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub graph: PoseGraph,
    pub plan: CyclePlan,
    pub census: Census,
    pub relative: RelativePoseSet,
    pub rotations: RotationAverage,
    pub poses: AbsolutePoses,
}

/// Graph construction, decomposition, estimation and averaging in one go.
/// `estimate` runs the relative pose stage, letting callers fan it out.
pub fn register_with(
    matches: &[PointMatch],
    cfg: &RegisterConfig,
    estimate: impl FnOnce(&CyclePlan, &PoseGraph, &EstimationConfig) -> RelativePoseSet,
) -> Result<Registration, PoseGraphError> {
    let graph = build_graph(matches, cfg.t_min);
    if graph.nodes.is_empty() {
        return Err(PoseGraphError::Empty);
    }
    let plan = decompose_cycles(&graph);
    let relative = estimate(&plan, &graph, &cfg.estimation);
    let rotations = rotation_average(&relative, &graph, &cfg.averaging);
    let poses = solve_translations(&rotations, &relative)?;
    Ok(Registration { census: plan.census(), graph, plan, relative, rotations, poses })
}

pub fn register(matches: &[PointMatch], cfg: &RegisterConfig) -> Result<Registration, PoseGraphError> {
    register_with(matches, cfg, estimate_relative_poses)
}
