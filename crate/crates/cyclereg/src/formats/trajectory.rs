use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use cyclereg_core::{RigidTransform, ScanId, Vec3};
use nalgebra::{Quaternion, UnitQuaternion};

use super::{fmt_f64, parse_f64, FormatError};

/// `id tx ty tz qx qy qz qw`, Hamilton quaternion with `w` last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub id: ScanId,
    pub t: [f64; 3],
    pub q: [f64; 4],
}

impl TrajectoryRecord {
    pub fn from_pose(id: ScanId, pose: &RigidTransform) -> Self {
        let q = UnitQuaternion::from_rotation_matrix(&pose.rotation);
        let q = if q.w < 0.0 { UnitQuaternion::new_unchecked(-q.into_inner()) } else { q };
        Self { id, t: [pose.translation.x, pose.translation.y, pose.translation.z], q: [q.i, q.j, q.k, q.w] }
    }

    pub fn pose(&self) -> RigidTransform {
        let [x, y, z, w] = self.q;
        let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        RigidTransform::new(q.to_rotation_matrix(), Vec3::from(self.t))
    }
}

pub fn poses_to_records(poses: &BTreeMap<ScanId, RigidTransform>) -> Vec<TrajectoryRecord> {
    poses.iter().map(|(id, p)| TrajectoryRecord::from_pose(*id, p)).collect()
}

pub fn records_to_poses(records: &[TrajectoryRecord]) -> BTreeMap<ScanId, RigidTransform> {
    records.iter().map(|r| (r.id, r.pose())).collect()
}

/// Parses a trajectory. `#` starts a comment; ids must be unique.
pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut out: Vec<TrajectoryRecord> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = (k + 1) as u64;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(FormatError::parse(path, line, format!("expected 8 fields `id tx ty tz qx qy qz qw`, found {}", fields.len())));
        }
        let id: ScanId = fields[0].parse().map_err(|_| FormatError::parse(path, line, format!("bad scan id {:?}", fields[0])))?;
        let mut v = [0.0; 7];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = parse_f64(path, line, f, "pose")?;
        }
        let q = [v[3], v[4], v[5], v[6]];
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(FormatError::parse(path, line, format!("quaternion norm {norm} is not 1")));
        }
        if out.iter().any(|r| r.id == id) {
            return Err(FormatError::parse(path, line, format!("scan id {id} repeats")));
        }
        out.push(TrajectoryRecord { id, t: [v[0], v[1], v[2]], q });
    }
    Ok(out)
}

pub fn write_trajectory(path: &Path, records: &[TrajectoryRecord]) -> Result<(), FormatError> {
    let mut buf = Vec::new();
    write_trajectory_to(&mut buf, records).map_err(|e| FormatError::io(path, e))?;
    fs::write(path, buf).map_err(|e| FormatError::io(path, e))
}

pub(crate) fn write_trajectory_to(w: &mut impl Write, records: &[TrajectoryRecord]) -> std::io::Result<()> {
    writeln!(w, "# id tx ty tz qx qy qz qw")?;
    for r in records {
        write!(w, "{}", r.id)?;
        for v in r.t.iter().chain(r.q.iter()) {
            write!(w, " {}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
