use std::fs;
use std::path::{Path, PathBuf};

use cyclereg_core::{CycleInstance, PointMatch, RigidTransform, ScanId, SolveError, SolverKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{read_matches, write_matches, FormatError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Layout(#[from] SolveError),
}

/// Reads a minimal instance stored as a match file. Rows are in layout
/// order: `per_edge` rows for each adjacent pair along the loop, then the
/// closure rows linking the first scan to the last.
pub fn read_instance(path: &Path, kind: SolverKind) -> Result<CycleInstance, InstanceError> {
    let rows = read_matches(path)?;
    if rows.is_empty() {
        return Err(FormatError::invalid(path, "instance has no matches").into());
    }
    let layout_err = |detail: String| SolveError::Layout { solver: kind.name(), layout: kind.layout(), detail };
    if rows.len() != kind.total_matches() {
        return Err(layout_err(format!("{} matches given", rows.len())).into());
    }
    let n_adj = (kind.cycle_len() - 1) * kind.per_edge();
    let adjacent: Vec<Vec<PointMatch>> = rows[..n_adj].chunks(kind.per_edge()).map(<[PointMatch]>::to_vec).collect();
    let closure = rows[n_adj..].to_vec();
    let mut scans: Vec<ScanId> = adjacent.iter().map(|e| e[0].scan_a).collect();
    scans.push(adjacent.last().map(|e| e[0].scan_b).unwrap_or(rows[0].scan_b));
    Ok(CycleInstance::new(kind, scans, adjacent, closure)?)
}

/// Writes the instance rows in the order [`read_instance`] expects.
pub fn write_instance(path: &Path, inst: &CycleInstance) -> Result<(), FormatError> {
    let rows: Vec<PointMatch> = inst.all_matches().copied().collect();
    write_matches(path, &rows)
}

/// Ground truth stored next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub solver: SolverKind,
    pub scans: Vec<ScanId>,
    /// Angle per edge in the solver's parameterization, radians.
    pub angles: Vec<f64>,
    /// `S_i → S_{i+1}` transforms as row-major 3×4 blocks `[R | t]`.
    pub edge_transforms: Vec<[[f64; 4]; 3]>,
}

pub fn transform_rows(t: &RigidTransform) -> [[f64; 4]; 3] {
    let m = t.to_matrix3x4();
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

/// `<instance>.truth.json`
pub fn truth_path(instance: &Path) -> PathBuf {
    let mut s = instance.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

pub fn write_truth(path: &Path, truth: &TruthSidecar) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(truth).map_err(|e| FormatError::invalid(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| FormatError::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<TruthSidecar, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| FormatError::parse(path, e.line() as u64, e.to_string()))
}
