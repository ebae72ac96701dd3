//! Text formats: match CSV, trajectories, ASCII PLY and minimal instances.

mod instance;
mod matches;
mod ply;
mod trajectory;

use std::path::PathBuf;

use thiserror::Error;

pub use instance::{read_instance, read_truth, transform_rows, truth_path, write_instance, write_truth, InstanceError, TruthSidecar};
pub use matches::{read_matches, write_matches, MatchRecord};
pub use ply::{read_ply, write_ply};
pub use trajectory::{poses_to_records, read_trajectory, records_to_poses, write_trajectory, TrajectoryRecord};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl FormatError {
    pub(crate) fn parse(path: &std::path::Path, line: u64, message: impl Into<String>) -> Self {
        FormatError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }

    pub(crate) fn invalid(path: &std::path::Path, message: impl Into<String>) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), source }
    }
}

/// 17 significant digits, enough to read back the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(path: &std::path::Path, line: u64, field: &str, what: &str) -> Result<f64, FormatError> {
    let v: f64 = field.trim().parse().map_err(|_| FormatError::parse(path, line, format!("{what}: not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(FormatError::parse(path, line, format!("{what}: not finite")));
    }
    Ok(v)
}
