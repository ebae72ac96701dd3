use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::polysolve::{half_angle_seeds, sylvester_resultant, RootOptions, Var};

use super::chain::{xy_angle, Chain};
use super::cycle3::trig_roots;
use super::trigexpr::{grid_to_bivariate, separable_grid, trig_eq, TrigAffine};
use super::{POLISH_ITERATIONS, SEED_IMAG_ANGLE, CycleInstance, SolutionSet, SolveError, SolverOptions};

/// `L(γ) K₃ L(β) K₂ L(α) p̃₁ = p̃₄`, split at the middle scan:
/// `L(β) X(α) = W(φ)` with `X = K₂ L(α) p̃₁`, `W = K₃⁻¹ L(φ) p̃₄`, `φ = −γ`.
///
/// A rotation about z keeps the z-coordinate and the norm, so
/// `X_z = W_z` and `‖X‖² = ‖W‖²`. Both are separable trig-linear forms in
/// (α, φ); their resultant in `tan(φ/2)` is a degree-8 polynomial in
/// `tan(α/2)`. β then follows from the xy-angles.
pub fn solve_4cycle(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let scale = 1.0 + inst.point_scale();
    let (p1, p4) = chain.closure[0];
    let x = TrigAffine::rotated_point(&chain.k[0], &p1);
    let w = TrigAffine::rotated_point(&chain.k[1].inverse(), &p4);

    let alphas = middle_frame_alphas(&x, &w, opts)?;

    let mut set = SolutionSet::default();
    for alpha in alphas {
        let (sa, ca) = alpha.sin_cos();
        let xa = x.eval(ca, sa);
        let ez = trig_eq(w.component(2), xa.z);
        let en = trig_eq(w.norm2(), xa.norm_squared());
        // the norm row carries squared units
        let (pick, unit) = if ez.strength() * scale >= en.strength() { (ez, scale) } else { (en, scale * scale) };
        let Some(phis) = trig_roots(&pick, unit) else { continue };
        for phi in phis {
            let wp = w.eval(phi.c, phi.s);
            let beta = xy_angle(&wp) - xy_angle(&xa);
            let mut angles = [alpha, beta, -phi.angle()];
            chain.polish(&mut angles, POLISH_ITERATIONS);
            let sol = chain.solution(&angles);
            if sol.residual <= tol {
                set.insert_dedup(sol, opts.dedup_tol);
            }
        }
    }
    Ok(set)
}

/// Real α satisfying the two middle-frame equations for some φ, including
/// the half-angle point at infinity α = π.
pub(crate) fn middle_frame_alphas(x: &TrigAffine, w: &TrigAffine, opts: &SolverOptions) -> Result<Vec<f64>, SolveError> {
    let ez = grid_to_bivariate(&separable_grid(x.component(2), w.component(2))).normalized();
    let en = grid_to_bivariate(&separable_grid(x.norm2(), w.norm2())).normalized();
    let res = sylvester_resultant(&ez, &en, Var::V).map_err(|_| SolveError::ResolverFallback)?;
    let ropts = RootOptions { imag_tol: opts.imag_tol, ..RootOptions::default() };
    let mut alphas: Vec<f64> = match half_angle_seeds(&res.normalized(), &ropts, SEED_IMAG_ANGLE) {
        Ok(ts) => ts.into_iter().map(|t| 2.0 * t.atan()).collect(),
        Err(_) => return Err(SolveError::ResolverFallback),
    };
    // invisible to the resultant in tan(α/2); verification filters it
    alphas.push(PI);
    Ok(alphas)
}
