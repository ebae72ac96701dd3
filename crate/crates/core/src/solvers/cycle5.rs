use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Matrix3;

use crate::geometry::{RigidTransform, Vec3};
use crate::polysolve::{half_angle_seeds, sylvester_resultant, RootOptions, Var};

use super::chain::{xy_angle, Chain};
use super::cycle3::trig_roots;
use super::trigexpr::{grid_at_second, grid_eval, grid_scale, grid_to_bivariate, TrigAffine, TrigGrid};
use super::{POLISH_ITERATIONS, SEED_IMAG_ANGLE, CycleInstance, SolutionSet, SolveError, SolverOptions};

/// `L(θ₄) K₄ L(θ₃) K₃ L(θ₂) K₂ L(θ₁) p̃₁ᵏ = p̃₅ᵏ` for two closure matches.
///
/// Split at scan 4: `L(θ₃) Xᵏ(θ₁, θ₂) = Wᵏ(φ)` with
/// `Xᵏ = K₃ L(θ₂) K₂ L(θ₁) p̃₁ᵏ`, `Wᵏ = K₄⁻¹ L(φ) p̃₅ᵏ` and `φ = −θ₄`.
/// Each match gives a z-row and a norm row, both of the form
/// `F(θ₁, θ₂) = f·(cos φ, sin φ, 1)`. Three of the four are solved for
/// `(cos φ, sin φ, 1)`; the unit circle and the constant 1 leave two
/// equations in (θ₁, θ₂) whose resultant is a degree-16 polynomial in
/// `tan(θ₂/2)`. Candidates are verified on all six closure rows.
pub fn solve_5cycle(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let k2 = chain.k[0];
    let k3 = chain.k[1];
    let k4_inv = chain.k[2].inverse();

    let mut rows: Vec<(TrigGrid, [f64; 3])> = Vec::with_capacity(4);
    let mut xs = Vec::with_capacity(2);
    let mut ws = Vec::with_capacity(2);
    for (p1, p5) in &chain.closure {
        let x = BilinearPoint::new(&k2, &k3, p1);
        let w = TrigAffine::rotated_point(&k4_inv, p5);
        rows.push((x.z_grid(), w.component(2)));
        rows.push((x.norm2_grid(), w.norm2()));
        xs.push(x);
        ws.push(w);
    }
    for (grid, f) in rows.iter_mut() {
        let m = grid_scale(grid).max(f.iter().fold(0.0, |a, v| a.max(v.abs())));
        if m > 0.0 {
            grid.iter_mut().flatten().for_each(|v| *v /= m);
            f.iter_mut().for_each(|v| *v /= m);
        }
    }

    let (lambda, chosen) = best_triple(&rows).ok_or(SolveError::DegenerateClosure)?;
    // (cos φ, sin φ, 1) = Λ · (F_a, F_b, F_c)
    let mut p = [[[0.0; 3]; 3]; 3];
    for r in 0..3 {
        for (e, idx) in chosen.iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    p[r][i][j] += lambda[(r, e)] * rows[*idx].0[i][j];
                }
            }
        }
    }
    let mut g1 = p[2];
    g1[2][2] -= 1.0;
    let one = grid_to_bivariate(&unit_grid());
    let b1 = grid_to_bivariate(&g1).normalized();
    let pc = grid_to_bivariate(&p[0]);
    let ps = grid_to_bivariate(&p[1]);
    let b2 = pc.mul(&pc).add(&ps.mul(&ps)).add(&one.mul(&one).scale(-1.0)).normalized();

    let res = sylvester_resultant(&b1, &b2, Var::U).map_err(|_| SolveError::ResolverFallback)?;
    let ropts = RootOptions { imag_tol: opts.imag_tol, ..RootOptions::default() };
    let mut theta2: Vec<f64> = half_angle_seeds(&res.normalized(), &ropts, SEED_IMAG_ANGLE)
        .map_err(|_| SolveError::ResolverFallback)?
        .into_iter()
        .map(|t| 2.0 * t.atan())
        .collect();
    theta2.push(PI);

    let mut set = SolutionSet::default();
    for t2 in theta2 {
        let (s2, c2) = t2.sin_cos();
        let eq = grid_at_second(&g1, c2, s2);
        let Some(t1s) = trig_roots(&eq, 1.0) else { continue };
        for t1 in t1s {
            let f = |grid: &TrigGrid| grid_eval(grid, t1.c, t1.s, c2, s2);
            let phi = f(&p[1]).atan2(f(&p[0]));
            let (sp, cp) = phi.sin_cos();
            // the point with the larger xy-radius fixes θ₃
            let k = if xs[0].eval(t1.c, t1.s, c2, s2).xy_norm() >= xs[1].eval(t1.c, t1.s, c2, s2).xy_norm() { 0 } else { 1 };
            let xk = xs[k].eval(t1.c, t1.s, c2, s2);
            let wk = ws[k].eval(cp, sp);
            let t3 = xy_angle(&wk) - xy_angle(&xk);
            let mut angles = [t1.angle(), t2, t3, -phi];
            chain.polish(&mut angles, POLISH_ITERATIONS);
            let sol = chain.solution(&angles);
            if sol.residual <= tol {
                set.insert_dedup(sol, opts.dedup_tol);
            }
        }
    }
    Ok(set)
}

fn unit_grid() -> TrigGrid {
    let mut g = [[0.0; 3]; 3];
    g[2][2] = 1.0;
    g
}

/// Picks the three rows whose φ-coefficient matrix is best conditioned and
/// returns its inverse with the chosen row indices.
fn best_triple(rows: &[(TrigGrid, [f64; 3])]) -> Option<(Matrix3<f64>, [usize; 3])> {
    let mut best: Option<(f64, Matrix3<f64>, [usize; 3])> = None;
    for skip in (0..rows.len()).rev() {
        let idx: Vec<usize> = (0..rows.len()).filter(|i| *i != skip).collect();
        let idx = [idx[0], idx[1], idx[2]];
        let m = Matrix3::from_fn(|r, c| rows[idx[r]].1[c]);
        let norms: f64 = (0..3).map(|r| m.row(r).norm()).product();
        if norms == 0.0 {
            continue;
        }
        let quality = m.determinant().abs() / norms;
        if best.as_ref().is_none_or(|b| quality > b.0) {
            if let Some(inv) = m.try_inverse() {
                best = Some((quality, inv, idx));
            }
        }
    }
    match best {
        Some((q, inv, idx)) if q > 1e-12 => Some((inv, idx)),
        _ => None,
    }
}

/// `K₃ L(θ₂) K₂ L(θ₁) p` as a grid of vectors over
/// `{cos θ₁, sin θ₁, 1} × {cos θ₂, sin θ₂, 1}`.
struct BilinearPoint {
    grid: [[Vec3; 3]; 3],
    inner_norm2: [f64; 3],
    t3: Vec3,
}

impl BilinearPoint {
    fn new(k2: &RigidTransform, k3: &RigidTransform, p: &Vec3) -> Self {
        let u = TrigAffine::rotated_point(k2, p);
        let inner = [u.u, u.v, u.w];
        let r3 = k3.rotation;
        let mut grid = [[Vec3::zeros(); 3]; 3];
        for i in 0..3 {
            let a = inner[i];
            grid[i][0] = r3 * Vec3::new(a.x, a.y, 0.0);
            grid[i][1] = r3 * Vec3::new(-a.y, a.x, 0.0);
            grid[i][2] = r3 * Vec3::new(0.0, 0.0, a.z);
        }
        grid[2][2] += k3.translation;
        Self { grid, inner_norm2: u.norm2(), t3: k3.translation }
    }

    fn z_grid(&self) -> TrigGrid {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = self.grid[i][j].z;
            }
        }
        g
    }

    /// `‖X‖² = ‖L(θ₂) U‖² + 2 t₃·R₃ L(θ₂) U + ‖t₃‖²` with `‖L U‖ = ‖U‖`.
    fn norm2_grid(&self) -> TrigGrid {
        let mut g = [[0.0; 3]; 3];
        let t = self.t3;
        for i in 0..3 {
            for j in 0..3 {
                let mut rot = self.grid[i][j];
                if i == 2 && j == 2 {
                    rot -= t;
                }
                g[i][j] = 2.0 * t.dot(&rot);
            }
            g[i][2] += self.inner_norm2[i];
        }
        g[2][2] += t.norm_squared();
        g
    }

    fn eval(&self, c1: f64, s1: f64, c2: f64, s2: f64) -> Vec3 {
        let a = [c1, s1, 1.0];
        let b = [c2, s2, 1.0];
        let mut out = Vec3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out += self.grid[i][j] * (a[i] * b[j]);
            }
        }
        out
    }
}

trait XyNorm {
    fn xy_norm(&self) -> f64;
}

impl XyNorm for Vec3 {
    fn xy_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}
