use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::polysolve::{solve_trig_linear, SinCosPair, TrigLinearEq};

use super::chain::Chain;
use super::trigexpr::{trig_eq, TrigAffine};
use super::{CycleInstance, SolutionSet, SolveError, SolverOptions};

/// `L(β) K₂ L(α) p̃₁ = p̃₃`. The z-row of the forward form depends on α
/// only, the z-row of `K₂⁻¹ L(−β) p̃₃ = L(α) p̃₁` on β only.
pub fn solve_3cycle(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let scale = 1.0 + inst.point_scale();
    let k2 = chain.k[0];
    let (p1, p3) = chain.closure[0];

    let fwd = TrigAffine::rotated_point(&k2, &p1);
    let alpha_eq = trig_eq(fwd.component(2), p3.z);
    // φ = −β
    let inv = TrigAffine::rotated_point(&k2.inverse(), &p3);
    let phi_eq = trig_eq(inv.component(2), p1.z);

    let alphas = trig_roots(&alpha_eq, scale);
    let phis = trig_roots(&phi_eq, scale);

    let mut candidates: Vec<[f64; 2]> = Vec::new();
    match (alphas, phis) {
        (Some(alphas), Some(phis)) => {
            for a in &alphas {
                for f in &phis {
                    candidates.push([a.angle(), -f.angle()]);
                }
            }
        }
        (Some(alphas), None) => {
            // β from the xy-rows of K₂⁻¹ L(φ) p̃₃ = L(α) p̃₁
            for a in &alphas {
                let target = rotate(&p1, a);
                for f in xy_row_roots(&inv, &target, scale) {
                    candidates.push([a.angle(), -f.angle()]);
                }
            }
        }
        (None, Some(phis)) => {
            // α from the xy-rows of K₂ L(α) p̃₁ = L(−β) p̃₃
            for f in &phis {
                let target = rotate(&p3, f);
                for a in xy_row_roots(&fwd, &target, scale) {
                    candidates.push([a.angle(), -f.angle()]);
                }
            }
        }
        (None, None) => return Err(SolveError::DegenerateClosure),
    }

    let mut set = SolutionSet::default();
    for angles in candidates {
        let sol = chain.solution(&angles);
        if sol.residual <= tol {
            set.insert_dedup(sol, opts.dedup_tol);
        }
    }
    Ok(set)
}

fn rotate(p: &Vec3, cs: &SinCosPair) -> Vec3 {
    Vec3::new(cs.c * p.x - cs.s * p.y, cs.s * p.x + cs.c * p.y, p.z)
}

/// Roots of a trig-linear equation, or `None` when its angle coefficients
/// vanish relative to the point scale.
pub(crate) fn trig_roots(eq: &TrigLinearEq, scale: f64) -> Option<Vec<SinCosPair>> {
    if eq.strength() <= 1e-9 * scale {
        return None;
    }
    solve_trig_linear(eq, 1e-15).ok()
}

/// Roots of `expr(θ) = target` from whichever xy-row is better conditioned.
pub(crate) fn xy_row_roots(expr: &TrigAffine, target: &Vec3, scale: f64) -> Vec<SinCosPair> {
    let ex = trig_eq(expr.component(0), target.x);
    let ey = trig_eq(expr.component(1), target.y);
    let eq = if ex.strength() >= ey.strength() { ex } else { ey };
    trig_roots(&eq, scale).unwrap_or_default()
}
