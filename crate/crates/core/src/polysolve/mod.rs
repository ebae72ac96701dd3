//! Small polynomial machinery: trig-linear equations, the half-angle
//! substitution, univariate real roots via the companion matrix, and the
//! Sylvester resultant of two bivariate polynomials.

mod bivariate;
mod trig;
mod univariate;

pub use bivariate::{sylvester_resultant, BivariatePoly, Var};
pub use trig::{
    half_angle_basis, half_angle_decode, half_angle_encode, solve_trig_linear, HalfAngle,
    SinCosPair, TrigLinearEq,
};
pub use univariate::{half_angle_seeds, univariate_real_roots, RootOptions, UnivariatePoly};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PolyError {
    #[error("trig-linear equation has no solution (cos and sin coefficients vanish)")]
    Inconsistent,
    #[error("trig-linear equation is identically satisfied")]
    Identically,
    #[error("polynomial has no nonzero coefficient")]
    DegeneratePolynomial,
    #[error("Sylvester matrix is singular at every sample point")]
    RankDeficient,
    #[error("polynomial has zero degree in the eliminated variable")]
    ZeroDegree,
}
