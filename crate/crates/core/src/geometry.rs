//! Rigid transforms, the z-rotation parameterization and the predefined
//! alignment transforms that reduce every scan pair to one unknown angle.

use core::f64::consts::PI;

use nalgebra::{Matrix3, Matrix3x4, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;


pub type Vec3 = Vector3<f64>;
pub type RotationMatrix = Rotation3<f64>;

/// Default minimum chord length for [`align_z`].
pub const DEFAULT_EPSILON_AXIS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate virtual axis: anchor points are {length} apart")]
    DegenerateAxis { length: f64 },
}

/// A point in homogeneous coordinates. Depth sensors give metric points, so
/// the canonical form always has `w = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl HomPoint {
    pub fn from_vec(p: Vec3) -> Self {
        Self { x: p.x, y: p.y, z: p.z, w: 1.0 }
    }

    /// Regular coordinates. Returns `None` when `w == 0`.
    pub fn canonical(&self) -> Option<Vec3> {
        if self.w == 0.0 || !self.w.is_finite() {
            return None;
        }
        Some(Vec3::new(self.x / self.w, self.y / self.w, self.z / self.w))
    }
}

/// An element of SE(3). `apply(p) = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self { rotation: RotationMatrix::identity(), translation: Vec3::zeros() }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self { rotation: RotationMatrix::identity(), translation }
    }

    pub fn from_rotation(rotation: RotationMatrix) -> Self {
        Self { rotation, translation: Vec3::zeros() }
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    #[inline]
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    #[inline]
    pub fn inverse(&self) -> RigidTransform {
        let r_inv = self.rotation.inverse();
        RigidTransform { rotation: r_inv, translation: -(r_inv * self.translation) }
    }

    /// The upper 3×4 block of the homogeneous matrix.
    pub fn to_matrix3x4(&self) -> Matrix3x4<f64> {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.set_column(3, &self.translation);
        m
    }

    /// Checks `RᵀR = I` and `det R = 1` within `tol`, and finite entries.
    pub fn is_valid(&self, tol: f64) -> bool {
        let r = self.rotation.matrix();
        let orth = (r.transpose() * r - Matrix3::identity()).amax();
        r.iter().chain(self.translation.iter()).all(|v| v.is_finite())
            && orth <= tol
            && (r.determinant() - 1.0).abs() <= tol
    }
}

/// Free function form of [`RigidTransform::compose`].
pub fn compose(a: &RigidTransform, b: &RigidTransform) -> RigidTransform {
    a.compose(b)
}

pub fn inverse(t: &RigidTransform) -> RigidTransform {
    t.inverse()
}

pub fn apply(t: &RigidTransform, p: &Vec3) -> Vec3 {
    t.apply(p)
}

/// Rotation by `theta` about the z-axis.
pub fn rot_z_matrix(theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix::from_matrix_unchecked(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

/// Rotation about z from an already-evaluated (cos, sin) pair.
pub fn rot_z_from_cs(c: f64, s: f64) -> RotationMatrix {
    RotationMatrix::from_matrix_unchecked(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

/// The one-degree-of-freedom transform `L(theta)`.
pub fn rot_z(theta: f64) -> RigidTransform {
    RigidTransform::from_rotation(rot_z_matrix(theta))
}

/// Shortest-arc rotation taking the unit vector `d` onto `+z`. Directions
/// within 1e-9 of `-z` are first flipped by a half turn about x.
fn rotation_to_z(d: &Vec3) -> RotationMatrix {
    let flip = RotationMatrix::from_matrix_unchecked(Matrix3::new(
        1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0,
    ));
    if d.z < -1.0 + 1e-9 {
        let d2 = flip * d;
        return shortest_arc_to_z(&d2) * flip;
    }
    shortest_arc_to_z(d)
}

fn shortest_arc_to_z(d: &Vec3) -> RotationMatrix {
    // Rodrigues with v = d × z, c = d·z: R = I + [v]x + [v]x² / (1 + c)
    let v = Vec3::new(d.y, -d.x, 0.0);
    let c = d.z;
    let vx = v.cross_matrix();
    let m = Matrix3::identity() + vx + vx * vx * (1.0 / (1.0 + c));
    RotationMatrix::from_matrix_unchecked(m)
}

/// Rigid transform sending `p1` to the origin and `p2` onto the positive
/// z-axis at distance `‖p2 − p1‖`.
pub fn align_z(p1: &Vec3, p2: &Vec3) -> Result<RigidTransform, GeometryError> {
    align_z_with(p1, p2, DEFAULT_EPSILON_AXIS)
}

pub fn align_z_with(p1: &Vec3, p2: &Vec3, epsilon_axis: f64) -> Result<RigidTransform, GeometryError> {
    let chord = p2 - p1;
    let length = chord.norm();
    if !(length > epsilon_axis) {
        return Err(GeometryError::DegenerateAxis { length });
    }
    let rotation = rotation_to_z(&(chord / length));
    Ok(RigidTransform { rotation, translation: -(rotation * p1) })
}

/// The pair of predefined transforms for one scan pair: `h` moves scan A to
/// its aligned frame, `g` moves scan B to its aligned frame. After both, the
/// remaining unknown is a rotation about z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredefinedPair {
    pub h: RigidTransform,
    pub g: RigidTransform,
    pub axis_length_a: f64,
    pub axis_length_b: f64,
}

impl PredefinedPair {
    /// `g⁻¹ ∘ L(theta) ∘ h`, the A→B transform for a given angle.
    pub fn edge_transform(&self, theta: f64) -> RigidTransform {
        self.g.inverse().compose(&rot_z(theta)).compose(&self.h)
    }

    /// Angle of the z-rotation left after removing the predefined transforms
    /// from a full A→B transform. Exact only when `t` is consistent with the
    /// anchor matches.
    pub fn angle_of(&self, t: &RigidTransform) -> f64 {
        let l = self.g.compose(t).compose(&self.h.inverse());
        let m = l.rotation.matrix();
        m[(1, 0)].atan2(m[(0, 0)])
    }
}

/// Builds the predefined pair from two matches `(point in A, point in B)`.
pub fn make_predefined(
    match1: (Vec3, Vec3),
    match2: (Vec3, Vec3),
) -> Result<PredefinedPair, GeometryError> {
    make_predefined_with(match1, match2, DEFAULT_EPSILON_AXIS)
}

pub fn make_predefined_with(
    match1: (Vec3, Vec3),
    match2: (Vec3, Vec3),
    epsilon_axis: f64,
) -> Result<PredefinedPair, GeometryError> {
    let h = align_z_with(&match1.0, &match2.0, epsilon_axis)?;
    let g = align_z_with(&match1.1, &match2.1, epsilon_axis)?;
    Ok(PredefinedPair {
        h,
        g,
        axis_length_a: (match2.0 - match1.0).norm(),
        axis_length_b: (match2.1 - match1.1).norm(),
    })
}

/// `h_next ∘ g_prev⁻¹`: the fixed transform between the two aligned frames
/// attached to the same intermediate scan.
pub fn k_matrix(h_next: &RigidTransform, g_prev: &RigidTransform) -> RigidTransform {
    h_next.compose(&g_prev.inverse())
}

/// Angle of `a·bᵀ` in degrees.
pub fn rotation_angle_error(a: &RotationMatrix, b: &RotationMatrix) -> f64 {
    rotation_angle(&(a * b.inverse())).to_degrees()
}

/// Rotation angle in radians, in [0, pi]. Uses the atan2 form of
/// `arccos((tr R − 1) / 2)`, which keeps precision near 0 and pi.
pub fn rotation_angle(r: &RotationMatrix) -> f64 {
    let m = r.matrix();
    let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin = 0.5 * vee(&(m - m.transpose())).norm();
    sin.atan2(cos)
}

fn vee(m: &Matrix3<f64>) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rotation vector (axis × angle) of `r`.
pub fn so3_log(r: &RotationMatrix) -> Vec3 {
    let m = r.matrix();
    let theta = rotation_angle(r);
    let w = vee(&(m - m.transpose())) * 0.5; // sin(theta) * axis
    if theta < 1e-4 {
        // theta / sin(theta) ≈ 1 + theta²/6
        return w * (1.0 + theta * theta / 6.0);
    }
    if theta < PI / 2.0 {
        return w * (theta / theta.sin());
    }
    // Symmetric part: (R + Rᵀ)/2 − cos(theta) I = (1 − cos theta) n nᵀ.
    let cos = theta.cos();
    let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos;
    let b = b / (1.0 - cos);
    let (mut k, mut best) = (0, b[(0, 0)]);
    for i in 1..3 {
        if b[(i, i)] > best {
            k = i;
            best = b[(i, i)];
        }
    }
    let nk = best.max(0.0).sqrt();
    let mut n = Vec3::zeros();
    for i in 0..3 {
        n[i] = if i == k { nk } else { b[(i, k)] / nk };
    }
    let n = n.normalize();
    let sign = if w.norm() > 1e-12 {
        if n.dot(&w) >= 0.0 { 1.0 } else { -1.0 }
    } else {
        // exactly pi: both signs are valid; keep the largest off-diagonal
        // coupling of the dominant axis positive
        let mut j = (k + 1) % 3;
        let other = (k + 2) % 3;
        if n[other].abs() > n[j].abs() {
            j = other;
        }
        if n[j] >= 0.0 { 1.0 } else { -1.0 }
    };
    n * (sign * theta)
}

pub fn so3_exp(v: &Vec3) -> RotationMatrix {
    let theta = v.norm();
    let k = v.cross_matrix();
    let (a, b) = if theta < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    RotationMatrix::from_matrix_unchecked(Matrix3::identity() + k * a + k * k * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn arb_vec(scale: f64) -> impl Strategy<Value = Vec3> {
        (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn arb_transform() -> impl Strategy<Value = RigidTransform> {
        (arb_vec(3.0), arb_vec(100.0))
            .prop_map(|(w, t)| RigidTransform::new(so3_exp(&w), t))
    }

    #[test]
    fn rot_z_cases() {
        assert_eq!(rot_z(0.0), RigidTransform::identity());
        let m = rot_z(PI).rotation.into_inner();
        assert_relative_eq!(m, Matrix3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0)), epsilon = 1e-15);
        let m = rot_z(0.3).rotation.into_inner();
        assert_eq!(m[(0, 0)], 0.3f64.cos());
        assert_eq!(m[(0, 1)], -(0.3f64.sin()));
        assert_eq!(m[(1, 0)], 0.3f64.sin());
        assert_eq!(m[(1, 1)], 0.3f64.cos());
        assert_eq!(rot_z(0.3).translation, Vec3::zeros());
    }

    #[test]
    fn align_z_already_aligned_is_identity() {
        let t = align_z(&Vec3::zeros(), &Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert_relative_eq!(t.rotation.into_inner(), Matrix3::identity(), epsilon = 1e-15);
        assert_eq!(t.translation, Vec3::zeros());
    }

    #[test]
    fn align_z_antiparallel_is_half_turn_in_plane() {
        let p1 = Vec3::new(1.0, 0.0, 0.0);
        let p2 = Vec3::new(1.0, 0.0, -3.0);
        let t = align_z(&p1, &p2).unwrap();
        assert_relative_eq!(t.apply(&p1), Vec3::zeros(), epsilon = 1e-12);
        assert_relative_eq!(t.apply(&p2), Vec3::new(0.0, 0.0, 3.0), epsilon = 1e-12);
        assert_relative_eq!(rotation_angle(&t.rotation), PI, epsilon = 1e-12);
        let axis = so3_log(&t.rotation).normalize();
        assert!(axis.z.abs() < 1e-12);
        assert!(t.is_valid(1e-12));
    }

    #[test]
    fn align_z_nearly_antiparallel_is_exact() {
        let p1 = Vec3::new(0.0, 0.0, 0.0);
        let p2 = Vec3::new(1e-6, -2e-6, -4.0);
        let t = align_z(&p1, &p2).unwrap();
        assert_relative_eq!(t.apply(&p2), Vec3::new(0.0, 0.0, p2.norm()), epsilon = 1e-12);
    }

    #[test]
    fn align_z_rejects_coincident_points() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(align_z(&p, &p), Err(GeometryError::DegenerateAxis { .. })));
        assert!(make_predefined((p, p), (p, Vec3::zeros())).is_err());
    }

    #[test]
    fn predefined_identical_scans_on_z_axis() {
        let a = Vec3::zeros();
        let b = Vec3::new(0.0, 0.0, 1.0);
        let pair = make_predefined((a, a), (b, b)).unwrap();
        assert_eq!(pair.h, RigidTransform::identity());
        assert_eq!(pair.g, RigidTransform::identity());
    }

    #[test]
    fn predefined_recovers_z_rotation() {
        // Scan B = rot_z(0.7) applied to scan A, anchors on the z-axis.
        let t = rot_z(0.7);
        let a1 = Vec3::new(0.0, 0.0, 1.0);
        let a2 = Vec3::new(0.0, 0.0, 4.0);
        let pair = make_predefined((a1, t.apply(&a1)), (a2, t.apply(&a2))).unwrap();
        assert_relative_eq!(pair.angle_of(&t), 0.7, epsilon = 1e-12);
        let rebuilt = pair.edge_transform(0.7);
        assert_relative_eq!(rebuilt.rotation.into_inner(), t.rotation.into_inner(), epsilon = 1e-12);
        assert_relative_eq!(rebuilt.translation, t.translation, epsilon = 1e-12);
    }

    #[test]
    fn k_matrix_cases() {
        let h = RigidTransform::new(so3_exp(&Vec3::new(0.1, 0.2, 0.3)), Vec3::new(1.0, 2.0, 3.0));
        let k = k_matrix(&h, &h);
        assert_relative_eq!(k.rotation.into_inner(), Matrix3::identity(), epsilon = 1e-14);
        assert_relative_eq!(k.translation, Vec3::zeros(), epsilon = 1e-14);
        assert_eq!(k_matrix(&h, &RigidTransform::identity()), h);
    }

    #[test]
    fn quarter_turn_and_inverse_identity() {
        assert_relative_eq!(rot_z(PI / 2.0).apply(&Vec3::x()), Vec3::y(), epsilon = 1e-15);
        assert_eq!(RigidTransform::identity().inverse(), RigidTransform::identity());
    }

    #[test]
    fn rotation_error_cases() {
        let a = so3_exp(&Vec3::new(0.3, -0.2, 0.1));
        assert_eq!(rotation_angle_error(&a, &a), 0.0);
        let b = a * rot_z_matrix(PI);
        assert_relative_eq!(rotation_angle_error(&a, &b), 180.0, epsilon = 1e-9);
    }

    #[test]
    fn so3_log_exp_basics() {
        assert_eq!(so3_log(&RotationMatrix::identity()), Vec3::zeros());
        let r = so3_exp(&Vec3::new(0.0, 0.0, 1.2));
        assert_relative_eq!(r.into_inner(), rot_z_matrix(1.2).into_inner(), epsilon = 1e-15);
        let half = so3_exp(&Vec3::new(PI, 0.0, 0.0));
        assert_relative_eq!(so3_log(&half).norm(), PI, epsilon = 1e-12);
        let near = so3_exp(&Vec3::new(0.0, PI - 1e-7, 0.0));
        assert_relative_eq!(so3_log(&near), Vec3::new(0.0, PI - 1e-7, 0.0), epsilon = 1e-8);
    }

    proptest! {
        #[test]
        fn align_z_postconditions(p1 in arb_vec(300.0), p2 in arb_vec(300.0)) {
            prop_assume!((p2 - p1).norm() > 1e-6);
            let t = align_z(&p1, &p2).unwrap();
            let len = (p2 - p1).norm();
            prop_assert!(t.apply(&p1).norm() <= 1e-12 * (1.0 + p1.norm()));
            prop_assert!((t.apply(&p2) - Vec3::new(0.0, 0.0, len)).norm() <= 1e-12 * (1.0 + len + p1.norm()));
            prop_assert!(t.is_valid(1e-9));
        }

        #[test]
        fn rot_z_is_additive(a in -10.0..10.0f64, b in -10.0..10.0f64) {
            let lhs = rot_z(a).compose(&rot_z(b)).rotation.into_inner();
            let rhs = rot_z(a + b).rotation.into_inner();
            prop_assert!((lhs - rhs).amax() <= 1e-12);
        }

        #[test]
        fn group_axioms(s in arb_transform(), t in arb_transform(), p in arb_vec(100.0)) {
            let st = s.compose(&t);
            prop_assert!(st.is_valid(1e-9));
            prop_assert!((st.apply(&p) - s.apply(&t.apply(&p))).norm() <= 1e-10);
            prop_assert!((t.inverse().apply(&t.apply(&p)) - p).norm() <= 1e-12 * (1.0 + p.norm() + t.translation.norm()));
        }

        #[test]
        fn k_matrix_identity(h in arb_transform(), g in arb_transform()) {
            let k = k_matrix(&h, &g).compose(&g);
            prop_assert!((k.rotation.into_inner() - h.rotation.into_inner()).amax() <= 1e-12);
            prop_assert!((k.translation - h.translation).norm() <= 1e-12 * (1.0 + h.translation.norm() + g.translation.norm()));
        }

        #[test]
        fn rotation_error_is_symmetric(a in arb_vec(3.0), b in arb_vec(3.0)) {
            let (ra, rb) = (so3_exp(&a), so3_exp(&b));
            prop_assert!((rotation_angle_error(&ra, &rb) - rotation_angle_error(&rb, &ra)).abs() <= 1e-9);
        }

        #[test]
        fn so3_round_trip(v in arb_vec(1.8)) {
            prop_assume!(v.norm() < 3.0);
            let r = so3_exp(&v);
            prop_assert!((so3_log(&r) - v).norm() <= 1e-9);
            prop_assert!((so3_exp(&so3_log(&r)).into_inner() - r.into_inner()).amax() <= 1e-9);
        }
    }
}
