//! Minimal solvers for mini-loop closures in multi-scan 3D registration.
//!
//! The crate is `no_std` with `alloc`. It contains everything that is pure
//! computation: rigid-transform algebra, the small polynomial toolkit used
//! for elimination, the pairwise / 3- / 4- / 5-cycle solvers and their planar
//! variants, RANSAC over those solvers, pose-graph decomposition and
//! averaging, and the synthetic benchmark harness. File formats, the CLI and
//! wall-clock timing live in the `cyclereg` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod polysolve;
pub mod posegraph;
pub mod rng;
pub mod robust;
pub mod solvers;
pub mod synthbench;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub(crate) mod math;

pub use geometry::{HomPoint, PredefinedPair, RigidTransform, RotationMatrix, Vec3};
pub use solvers::{
    solve, CycleInstance, CycleSolution, PointMatch, ScanId, SolutionSet, SolveError,
    SolverKind, SolverOptions,
};
