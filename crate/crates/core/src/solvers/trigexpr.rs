use crate::geometry::{RigidTransform, Vec3};
use crate::polysolve::{half_angle_basis, BivariatePoly, TrigLinearEq};

/// A point that depends on one angle: `c·u + s·v + w`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TrigAffine {
    pub u: Vec3,
    pub v: Vec3,
    pub w: Vec3,
}

impl TrigAffine {
    /// `t ∘ L(θ)` applied to `p`.
    pub fn rotated_point(t: &RigidTransform, p: &Vec3) -> Self {
        let r = t.rotation;
        Self {
            u: r * Vec3::new(p.x, p.y, 0.0),
            v: r * Vec3::new(-p.y, p.x, 0.0),
            w: r * Vec3::new(0.0, 0.0, p.z) + t.translation,
        }
    }

    pub fn eval(&self, c: f64, s: f64) -> Vec3 {
        self.u * c + self.v * s + self.w
    }

    pub fn component(&self, axis: usize) -> [f64; 3] {
        [self.u[axis], self.v[axis], self.w[axis]]
    }

    /// `‖·‖²` as a trig-linear form. Relies on `u ⊥ v` and `‖u‖ = ‖v‖`.
    pub fn norm2(&self) -> [f64; 3] {
        [2.0 * self.u.dot(&self.w), 2.0 * self.v.dot(&self.w), self.u.norm_squared() + self.w.norm_squared()]
    }
}

pub(crate) fn trig_eq(coeffs: [f64; 3], rhs: f64) -> TrigLinearEq {
    TrigLinearEq::new(coeffs[0], coeffs[1], coeffs[2] - rhs)
}

/// Coefficients over `{cos, sin, 1}` of one angle times `{cos, sin, 1}` of
/// another: `grid[i][j]`.
pub(crate) type TrigGrid = [[f64; 3]; 3];

/// `Σ grid[i][j] b_i(u) b_j(v)` after multiplying through by
/// `(1 + u²)(1 + v²)`.
pub(crate) fn grid_to_bivariate(grid: &TrigGrid) -> BivariatePoly {
    let basis = half_angle_basis();
    let mut out = BivariatePoly::zeros(2, 2);
    for i in 0..3 {
        for j in 0..3 {
            let g = grid[i][j];
            if g == 0.0 {
                continue;
            }
            for a in 0..3 {
                for b in 0..3 {
                    out.coeffs[a][b] += g * basis[i][a] * basis[j][b];
                }
            }
        }
    }
    out
}

/// Grid of `f(α)·1 − 1·g(β)`.
pub(crate) fn separable_grid(f: [f64; 3], g: [f64; 3]) -> TrigGrid {
    let mut grid = [[0.0; 3]; 3];
    for i in 0..3 {
        grid[i][2] += f[i];
        grid[2][i] -= g[i];
    }
    grid
}

pub(crate) fn grid_scale(grid: &TrigGrid) -> f64 {
    grid.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Trig-linear equation in the first angle once the second is fixed.
pub(crate) fn grid_at_second(grid: &TrigGrid, c: f64, s: f64) -> TrigLinearEq {
    let row = |i: usize| grid[i][0] * c + grid[i][1] * s + grid[i][2];
    TrigLinearEq::new(row(0), row(1), row(2))
}

pub(crate) fn grid_eval(grid: &TrigGrid, c1: f64, s1: f64, c2: f64, s2: f64) -> f64 {
    let a = [c1, s1, 1.0];
    let b = [c2, s2, 1.0];
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += grid[i][j] * a[i] * b[j];
        }
    }
    acc
}
