//! Trajectory comparison up to the gauge.

use std::collections::BTreeMap;

use cyclereg_core::geometry::rotation_angle_error;
use cyclereg_core::{RigidTransform, ScanId};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("scan {id} appears in the {present} trajectory only")]
    MissingId { id: ScanId, present: &'static str },
    #[error("trajectories are empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Self { mean: v.iter().sum::<f64>() / n as f64, median, max: v[n - 1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairError {
    pub from: ScanId,
    pub to: ScanId,
    pub rot_err_deg: f64,
    pub trans_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub scans: usize,
    /// Relative poses between consecutive ids.
    pub pairs: Vec<PairError>,
    pub rot_err_deg: Summary,
    pub trans_err: Summary,
    /// Absolute errors after mapping the estimate's first scan onto the
    /// ground truth's.
    pub aligned_rot_err_deg: Summary,
    pub aligned_trans_err: Summary,
}

/// `rel(i → j) = P_j⁻¹ P_i` for poses mapping scan frames into a common
/// frame.
fn relative(poses: &BTreeMap<ScanId, RigidTransform>, i: ScanId, j: ScanId) -> RigidTransform {
    poses[&j].inverse().compose(&poses[&i])
}

pub fn evaluate(
    estimate: &BTreeMap<ScanId, RigidTransform>,
    truth: &BTreeMap<ScanId, RigidTransform>,
) -> Result<EvalReport, EvalError> {
    if let Some(id) = estimate.keys().find(|k| !truth.contains_key(k)) {
        return Err(EvalError::MissingId { id: *id, present: "estimated" });
    }
    if let Some(id) = truth.keys().find(|k| !estimate.contains_key(k)) {
        return Err(EvalError::MissingId { id: *id, present: "ground-truth" });
    }
    let ids: Vec<ScanId> = truth.keys().copied().collect();
    let Some(&first) = ids.first() else { return Err(EvalError::Empty) };
    let pairs: Vec<PairError> = ids
        .windows(2)
        .map(|w| {
            let (e, g) = (relative(estimate, w[0], w[1]), relative(truth, w[0], w[1]));
            PairError {
                from: w[0],
                to: w[1],
                rot_err_deg: rotation_angle_error(&e.rotation, &g.rotation),
                trans_err: (e.translation - g.translation).norm(),
            }
        })
        .collect();
    let gauge = truth[&first].compose(&estimate[&first].inverse());
    let (mut abs_r, mut abs_t) = (Vec::new(), Vec::new());
    for id in &ids {
        let e = gauge.compose(&estimate[id]);
        abs_r.push(rotation_angle_error(&e.rotation, &truth[id].rotation));
        abs_t.push((e.translation - truth[id].translation).norm());
    }
    let r: Vec<f64> = pairs.iter().map(|p| p.rot_err_deg).collect();
    let t: Vec<f64> = pairs.iter().map(|p| p.trans_err).collect();
    Ok(EvalReport {
        scans: ids.len(),
        rot_err_deg: Summary::of(&r),
        trans_err: Summary::of(&t),
        pairs,
        aligned_rot_err_deg: Summary::of(&abs_r),
        aligned_trans_err: Summary::of(&abs_t),
    })
}
