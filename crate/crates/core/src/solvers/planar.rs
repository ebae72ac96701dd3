use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{PredefinedPair, RigidTransform, Vec3};
use crate::polysolve::{sylvester_resultant, univariate_real_roots, RootOptions, Var};

use super::chain::{xy_angle, Chain};
use super::cycle3::trig_roots;
use super::pairwise::single_row_angles;
use super::trigexpr::{grid_to_bivariate, trig_eq, TrigAffine, TrigGrid};
use super::{POLISH_ITERATIONS, CycleInstance, PointMatch, SolutionSet, SolveError, SolverOptions};

/// Planar motion rotates about z, so the predefined transforms only need to
/// move the anchor points to the origin.
pub fn make_predefined_planar(m: &PointMatch) -> PredefinedPair {
    PredefinedPair {
        h: RigidTransform::from_translation(-m.p_a),
        g: RigidTransform::from_translation(-m.p_b),
        axis_length_a: 0.0,
        axis_length_b: 0.0,
    }
}

fn consistency_tol(inst: &CycleInstance, opts: &SolverOptions) -> f64 {
    opts.consistency_tol.unwrap_or_else(|| opts.accept_tol_for(inst))
}

/// Two matches on one pair: the first is the anchor, the second gives
/// `L(α) ã = b̃`. The z-row has no unknown and only gates the instance.
pub fn solve_planar_pairwise(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let (a, b) = chain.closure[0];
    let mut set = SolutionSet::default();
    if (a.z - b.z).abs() > consistency_tol(inst, opts) {
        return Ok(set);
    }
    for alpha in single_row_angles(&a, &b, tol)? {
        let mut angles = [alpha];
        chain.polish(&mut angles, 3);
        let sol = chain.solution(&angles);
        if sol.residual <= tol {
            set.insert_dedup(sol, opts.dedup_tol);
        }
    }
    Ok(set)
}

/// `L(β) (L(α) p̃₁ + t) = p̃₃` in the plane. The x- and y-rows are bilinear
/// in the two angles; their resultant in `tan(β/2)` gives `tan(α/2)`.
pub fn solve_planar_3cycle(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let (p1, p3) = chain.closure[0];
    let mut set = SolutionSet::default();
    let x = TrigAffine::rotated_point(&chain.k[0], &p1);
    if (x.w.z - p3.z).abs() > consistency_tol(inst, opts) {
        return Ok(set);
    }
    let (xa, ya) = (x.component(0), x.component(1));
    if xa[0].hypot(xa[1]) <= 1e-12 * (1.0 + inst.point_scale()) || p3.x.hypot(p3.y) <= 1e-12 {
        return Err(SolveError::DegenerateClosure);
    }
    // cos β · X_x − sin β · X_y = p̃₃x and sin β · X_x + cos β · X_y = p̃₃y
    let mut row_x: TrigGrid = [[0.0; 3]; 3];
    let mut row_y: TrigGrid = [[0.0; 3]; 3];
    for i in 0..3 {
        row_x[i][0] = xa[i];
        row_x[i][1] = -ya[i];
        row_y[i][0] = ya[i];
        row_y[i][1] = xa[i];
    }
    row_x[2][2] -= p3.x;
    row_y[2][2] -= p3.y;
    let bx = grid_to_bivariate(&row_x).normalized();
    let by = grid_to_bivariate(&row_y).normalized();
    let res = sylvester_resultant(&bx, &by, Var::V).map_err(|_| SolveError::ResolverFallback)?;
    let ropts = RootOptions { imag_tol: opts.imag_tol, ..RootOptions::default() };
    let mut alphas: Vec<f64> = univariate_real_roots(&res.normalized(), &ropts)
        .map_err(|_| SolveError::ResolverFallback)?
        .into_iter()
        .map(|t| 2.0 * t.atan())
        .collect();
    alphas.push(PI);
    for alpha in alphas {
        let (s, c) = alpha.sin_cos();
        let beta = xy_angle(&p3) - xy_angle(&x.eval(c, s));
        let mut angles = [alpha, beta];
        chain.polish(&mut angles, POLISH_ITERATIONS);
        let sol = chain.solution(&angles);
        if sol.residual <= tol {
            set.insert_dedup(sol, opts.dedup_tol);
        }
    }
    Ok(set)
}

/// Number of samples of the one-parameter family returned for the planar
/// 4-cycle.
pub const PLANAR4_FAMILY_SAMPLES: usize = 64;

/// Planar 4-cycle. With all rotations about z the closure z-row holds no
/// unknown, leaving two equations in three angles. The solver reports the
/// solution curve sampled at 64 values of α instead of isolated solutions.
pub fn solve_planar_4cycle(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let (p1, p4) = chain.closure[0];
    let x = TrigAffine::rotated_point(&chain.k[0], &p1);
    let w = TrigAffine::rotated_point(&chain.k[1].inverse(), &p4);
    if (x.w.z - w.w.z).abs() > consistency_tol(inst, opts) {
        return Ok(SolutionSet::default());
    }
    let mut family = Vec::new();
    for k in 0..PLANAR4_FAMILY_SAMPLES {
        let alpha = -PI + 2.0 * PI * (k + 1) as f64 / PLANAR4_FAMILY_SAMPLES as f64;
        family.extend(family_points(&x, &w, alpha, inst.point_scale()));
    }
    Err(SolveError::UnderDetermined { family })
}

/// Points of the planar 4-cycle solution curve at a given α: up to two
/// `(α, β, γ)` triples.
pub fn planar4_family_at(inst: &CycleInstance, alpha: f64, opts: &SolverOptions) -> Result<Vec<[f64; 3]>, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let (p1, p4) = chain.closure[0];
    let x = TrigAffine::rotated_point(&chain.k[0], &p1);
    let w = TrigAffine::rotated_point(&chain.k[1].inverse(), &p4);
    Ok(family_points(&x, &w, alpha, inst.point_scale()))
}

fn family_points(x: &TrigAffine, w: &TrigAffine, alpha: f64, scale: f64) -> Vec<[f64; 3]> {
    let (s, c) = alpha.sin_cos();
    let xa = x.eval(c, s);
    // ‖W(φ)_xy‖² = ‖X(α)_xy‖², both z-coordinates being constant
    let mut wxy = *w;
    wxy.u.z = 0.0;
    wxy.v.z = 0.0;
    wxy.w.z = 0.0;
    let target = xa.x * xa.x + xa.y * xa.y;
    let eq = trig_eq(wxy.norm2(), target);
    let unit = (1.0 + scale) * (1.0 + scale);
    trig_roots(&eq, unit)
        .unwrap_or_default()
        .into_iter()
        .map(|phi| {
            let wp = w.eval(phi.c, phi.s);
            let beta = xy_angle(&wp) - xy_angle(&Vec3::new(xa.x, xa.y, 0.0));
            [
                crate::math::wrap_angle(alpha),
                crate::math::wrap_angle(beta),
                crate::math::wrap_angle(-phi.angle()),
            ]
        })
        .collect()
}
