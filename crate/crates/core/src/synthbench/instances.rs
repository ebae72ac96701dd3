use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{rot_z_matrix, RigidTransform, RotationMatrix, Vec3};
use crate::solvers::{predefined_pairs, CycleInstance, PointMatch, SolveError, SolverKind, SolverOptions};

/// A noise-free minimal instance together with the transforms that
/// generated it.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub instance: CycleInstance,
    /// Scan-to-world poses.
    pub poses: Vec<RigidTransform>,
    /// Ground-truth edge transforms `S_i → S_{i+1}`.
    pub truth: Vec<RigidTransform>,
}

impl PlantedInstance {
    /// Ground-truth angle per edge in the solver's parameterization.
    pub fn true_angles(&self, opts: &SolverOptions) -> Result<Vec<f64>, SolveError> {
        let pairs = predefined_pairs(&self.instance, opts)?;
        Ok(pairs.iter().zip(&self.truth).map(|(p, t)| p.angle_of(t)).collect())
    }
}

/// Uniform rotation on SO(3) from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let q: [f64; 4] = core::array::from_fn(|_| StandardNormal.sample(rng));
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        if quat.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(quat).to_rotation_matrix();
        }
    }
}

pub fn random_in_cube<R: Rng + ?Sized>(rng: &mut R, side: f64) -> Vec3 {
    let h = 0.5 * side;
    Vec3::new(rng.random_range(-h..h), rng.random_range(-h..h), rng.random_range(-h..h))
}

/// Random pose: uniform rotation (about z only when `planar`) and a
/// translation uniform in the cube (in the xy-plane when `planar`).
pub fn random_pose<R: Rng + ?Sized>(rng: &mut R, side: f64, planar: bool) -> RigidTransform {
    if planar {
        let theta = rng.random_range(-PI..PI);
        let mut t = random_in_cube(rng, side);
        t.z = 0.0;
        RigidTransform::new(rot_z_matrix(theta), t)
    } else {
        let r = random_rotation(rng);
        RigidTransform::new(r, random_in_cube(rng, side))
    }
}

/// Generates a random noise-free instance of `kind` in a cube of side
/// `side`: random scan poses, world points uniform in the cube, and each
/// match formed by observing one world point from both scans.
pub fn planted_instance<R: Rng + ?Sized>(kind: SolverKind, rng: &mut R, side: f64) -> PlantedInstance {
    let n = kind.cycle_len();
    let planar = kind.is_planar();
    let poses: Vec<RigidTransform> = (0..n).map(|_| random_pose(rng, side, planar)).collect();
    let inv: Vec<RigidTransform> = poses.iter().map(RigidTransform::inverse).collect();
    let scans: Vec<u32> = (0..n as u32).collect();
    let mut observe = |a: usize, b: usize| {
        let x = random_in_cube(rng, side);
        PointMatch::new(scans[a], scans[b], inv[a].apply(&x), inv[b].apply(&x))
    };
    let adjacent: Vec<Vec<PointMatch>> =
        (0..n - 1).map(|i| (0..kind.per_edge()).map(|_| observe(i, i + 1)).collect()).collect();
    let closure: Vec<PointMatch> = (0..kind.closure_count()).map(|_| observe(0, n - 1)).collect();
    let truth = (0..n - 1).map(|i| inv[i + 1].compose(&poses[i])).collect();
    let instance = CycleInstance { kind, scans, adjacent, closure };
    PlantedInstance { instance, poses, truth }
}
