use nalgebra::{Matrix3, SymmetricEigen};

use crate::geometry::{RigidTransform, RotationMatrix, Vec3};

use super::{PointMatch, SolveError};

/// Least-squares rigid transform taking every `p_a` onto its `p_b`.
///
/// Centres both point sets, takes the SVD of the cross-covariance and flips
/// the last singular direction when that is needed to keep `det R = +1`.
pub fn refine_procrustes(matches: &[PointMatch]) -> Result<RigidTransform, SolveError> {
    if matches.len() < 3 {
        return Err(SolveError::DegenerateConfiguration);
    }
    let n = matches.len() as f64;
    let ca = matches.iter().fold(Vec3::zeros(), |acc, m| acc + m.p_a) / n;
    let cb = matches.iter().fold(Vec3::zeros(), |acc, m| acc + m.p_b) / n;
    let mut cross = Matrix3::<f64>::zeros();
    let mut scatter = Matrix3::<f64>::zeros();
    for m in matches {
        let a = m.p_a - ca;
        let b = m.p_b - cb;
        cross += b * a.transpose();
        scatter += a * a.transpose();
    }
    let mut ev: [f64; 3] = SymmetricEigen::new(scatter).eigenvalues.into();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[0] > 0.0) || ev[1] <= 1e-12 * ev[0] {
        return Err(SolveError::DegenerateConfiguration);
    }
    let svd = cross.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(SolveError::DegenerateConfiguration);
    };
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = u * d * v_t;
    let rotation = RotationMatrix::from_matrix_unchecked(r);
    Ok(RigidTransform { rotation, translation: cb - rotation * ca })
}

/// Root-mean-square residual of a transform on a match list.
pub fn rms_residual(t: &RigidTransform, matches: &[PointMatch]) -> f64 {
    if matches.is_empty() {
        return 0.0;
    }
    let sum: f64 = matches.iter().map(|m| (t.apply(&m.p_a) - m.p_b).norm_squared()).sum();
    (sum / matches.len() as f64).sqrt()
}
