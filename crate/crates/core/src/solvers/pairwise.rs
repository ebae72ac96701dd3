use crate::geometry::Vec3;
use crate::polysolve::{solve_trig_linear, TrigLinearEq};

use super::chain::Chain;
use super::{CycleInstance, SolutionSet, SolveError, SolverOptions};

/// Two scans, three matches. The first two fix the predefined pair; the
/// third gives `L(α) ã = b̃`.
pub fn solve_pairwise_minimal(inst: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    let chain = Chain::build(inst, opts.epsilon_axis)?;
    let tol = opts.accept_tol_for(inst);
    let (a, b) = chain.closure[0];
    let mut set = SolutionSet::default();
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

/// Candidate angles for `L(α) a = b` from one xy-row plus the unit circle.
/// The x- and y-rows have equal strength `‖a_xy‖`, so the x-row is used and
/// the y-row decides between the two roots by back-substitution.
pub(crate) fn single_row_angles(a: &Vec3, b: &Vec3, tol: f64) -> Result<alloc::vec::Vec<f64>, SolveError> {
    let rho = a.x.hypot(a.y);
    if rho <= 1e-12 * (1.0 + a.norm().max(b.norm())) {
        return Err(SolveError::DegenerateClosure);
    }
    let row_x = TrigLinearEq::new(a.x, -a.y, -b.x);
    let row_y = TrigLinearEq::new(a.y, a.x, -b.y);
    let roots = solve_trig_linear(&row_x, 1e-12).map_err(|_| SolveError::DegenerateClosure)?;
    Ok(roots
        .into_iter()
        .filter(|p| row_y.residual(*p).abs() <= tol)
        .map(|p| p.angle())
        .collect())
}
