use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::wrap_angle;

use super::PolyError;

/// `a1·cosθ + a2·sinθ + a3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigLinearEq {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// A point on the unit circle, `(cosθ, sinθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCosPair {
    pub c: f64,
    pub s: f64,
}

impl SinCosPair {
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { c, s }
    }

    pub fn angle(&self) -> f64 {
        self.s.atan2(self.c)
    }

    pub fn unit_defect(&self) -> f64 {
        (self.c * self.c + self.s * self.s - 1.0).abs()
    }
}

impl TrigLinearEq {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn residual(&self, p: SinCosPair) -> f64 {
        self.a1 * p.c + self.a2 * p.s + self.a3
    }

    /// Norm of the (cos, sin) coefficients.
    pub fn strength(&self) -> f64 {
        self.a1.hypot(self.a2)
    }

    /// Solves with the relative degeneracy tolerance `1e-12`.
    pub fn solve(&self) -> Result<Vec<SinCosPair>, PolyError> {
        solve_trig_linear(self, 1e-12)
    }
}

/// Solves a trig-linear equation on the unit circle.
///
/// Substituting the line `a1 c + a2 s = −a3` into `c² + s² = 1` gives a
/// quadratic whose two roots come out paired with the sign of `s` that
/// satisfies the line. A double root is returned once. An empty list means
/// the line misses the circle.
pub fn solve_trig_linear(eq: &TrigLinearEq, tol: f64) -> Result<Vec<SinCosPair>, PolyError> {
    let scale = eq.a1.abs().max(eq.a2.abs()).max(eq.a3.abs());
    if scale == 0.0 {
        return Err(PolyError::Identically);
    }
    let r2 = eq.a1 * eq.a1 + eq.a2 * eq.a2;
    let r = r2.sqrt();
    if r <= tol * scale {
        return Err(PolyError::Inconsistent);
    }
    let (a1, a2, a3) = (eq.a1 / r, eq.a2 / r, eq.a3 / r);
    let disc = 1.0 - a3 * a3;
    let mut out = Vec::with_capacity(2);
    if disc < -1e-12 {
        return Ok(out);
    }
    if disc <= 1e-24 {
        out.push(SinCosPair { c: -a1 * a3, s: -a2 * a3 });
        return Ok(out);
    }
    let root = disc.sqrt();
    out.push(SinCosPair { c: -a1 * a3 - a2 * root, s: -a2 * a3 + a1 * root });
    out.push(SinCosPair { c: -a1 * a3 + a2 * root, s: -a2 * a3 - a1 * root });
    Ok(out)
}

/// `t = tan(θ/2)`, or the point at infinity for `θ = π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfAngle {
    Finite(f64),
    Infinity,
}

pub fn half_angle_encode(theta: f64) -> HalfAngle {
    let w = wrap_angle(theta);
    if (PI - w).abs() < 1e-15 {
        return HalfAngle::Infinity;
    }
    HalfAngle::Finite((w * 0.5).tan())
}

pub fn half_angle_decode(t: HalfAngle) -> SinCosPair {
    match t {
        HalfAngle::Infinity => SinCosPair { c: -1.0, s: 0.0 },
        HalfAngle::Finite(t) => {
            let d = 1.0 + t * t;
            SinCosPair { c: (1.0 - t * t) / d, s: 2.0 * t / d }
        }
    }
}

/// Ascending polynomial coefficients of `(1 + t²)·{cosθ, sinθ, 1}`.
pub fn half_angle_basis() -> [[f64; 3]; 3] {
    [[1.0, 0.0, -1.0], [0.0, 2.0, 0.0], [1.0, 0.0, 1.0]]
}
