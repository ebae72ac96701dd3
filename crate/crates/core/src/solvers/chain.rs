use alloc::vec::Vec;

use nalgebra::{Matrix4, Vector4};

use crate::geometry::{k_matrix, make_predefined_with, GeometryError, PredefinedPair, RigidTransform, Vec3};
use crate::math::wrap_angle;

use super::planar::make_predefined_planar;
use super::{CycleInstance, CycleSolution, SolveError};

/// The closure problem in aligned frames:
/// `L(θ_{n−1}) K_{n−1} … K_2 L(θ_1) p̃_1 = p̃_n` for every closure match.
#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub pairs: Vec<PredefinedPair>,
    /// `k[i]` sits between `L(θ_{i})` and `L(θ_{i+1})`.
    pub k: Vec<RigidTransform>,
    /// `(p̃_1, p̃_n)` per closure match.
    pub closure: Vec<(Vec3, Vec3)>,
}

impl Chain {
    pub fn build(inst: &CycleInstance, epsilon_axis: f64) -> Result<Self, SolveError> {
        let pairs = if inst.kind.is_planar() {
            inst.adjacent.iter().map(|e| make_predefined_planar(&e[0])).collect()
        } else {
            inst.adjacent
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    make_predefined_with((e[0].p_a, e[0].p_b), (e[1].p_a, e[1].p_b), epsilon_axis)
                        .map_err(|GeometryError::DegenerateAxis { length }| SolveError::DegenerateAxis { edge: i, length })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Self::from_pairs(pairs, inst.closure.iter().map(|m| (m.p_a, m.p_b))))
    }

    pub fn from_pairs(pairs: Vec<PredefinedPair>, closure: impl Iterator<Item = (Vec3, Vec3)>) -> Self {
        let k = pairs.windows(2).map(|w| k_matrix(&w[1].h, &w[0].g)).collect();
        let first = pairs[0].h;
        let last = pairs[pairs.len() - 1].g;
        let closure = closure.map(|(a, b)| (first.apply(&a), last.apply(&b))).collect();
        Self { pairs, k, closure }
    }

    #[cfg(any(test, feature = "oracle"))]
    pub fn unknowns(&self) -> usize {
        self.pairs.len()
    }

    /// Pushes `p` through the chain.
    pub fn forward(&self, angles: &[f64], p: &Vec3) -> Vec3 {
        let mut q = *p;
        for (i, a) in angles.iter().enumerate() {
            q = rotate_z(*a, &q);
            if i < self.k.len() {
                q = self.k[i].apply(&q);
            }
        }
        q
    }

    /// Largest closure residual norm.
    pub fn max_residual(&self, angles: &[f64]) -> f64 {
        self.closure
            .iter()
            .map(|(a, b)| (self.forward(angles, a) - b).norm())
            .fold(0.0, f64::max)
    }

    /// Stacked residual rows and their Jacobian columns.
    pub fn linearize(&self, angles: &[f64]) -> (Vec<f64>, Vec<[f64; 4]>) {
        let m = angles.len();
        let mut rows = Vec::with_capacity(3 * self.closure.len());
        let mut jac = Vec::with_capacity(3 * self.closure.len());
        for (a, b) in &self.closure {
            // points entering each L(θ_i)
            let mut inputs = [Vec3::zeros(); 4];
            let mut q = *a;
            for i in 0..m {
                inputs[i] = q;
                q = rotate_z(angles[i], &q);
                if i < self.k.len() {
                    q = self.k[i].apply(&q);
                }
            }
            let r = q - b;
            let mut cols = [Vec3::zeros(); 4];
            for i in 0..m {
                let p = inputs[i];
                let (s, c) = angles[i].sin_cos();
                let mut d = Vec3::new(-s * p.x - c * p.y, c * p.x - s * p.y, 0.0);
                for j in i..m {
                    if j > i {
                        d = rotate_z(angles[j], &d);
                    }
                    if j < self.k.len() {
                        d = self.k[j].rotation * d;
                    }
                }
                cols[i] = d;
            }
            for axis in 0..3 {
                rows.push(r[axis]);
                let mut row = [0.0; 4];
                for i in 0..m {
                    row[i] = cols[i][axis];
                }
                jac.push(row);
            }
        }
        (rows, jac)
    }

    /// Gauss–Newton with step halving on the closure rows. Stops when no
    /// halved step lowers the cost or the step drops below 1e-15.
    pub fn polish(&self, angles: &mut [f64], iterations: usize) {
        let m = angles.len();
        let mut cost = self.cost(angles);
        for _ in 0..iterations {
            let (r, j) = self.linearize(angles);
            let mut jtj = Matrix4::<f64>::zeros();
            let mut jtr = Vector4::<f64>::zeros();
            for (ri, row) in r.iter().zip(&j) {
                for a in 0..m {
                    jtr[a] += row[a] * ri;
                    for b in 0..m {
                        jtj[(a, b)] += row[a] * row[b];
                    }
                }
            }
            for a in m..4 {
                jtj[(a, a)] = 1.0;
            }
            let Some(step) = jtj.lu().solve(&jtr) else { return };
            // backtrack by halving until the cost drops
            let mut scale = 1.0;
            let mut accepted = false;
            let mut trial = [0.0; 4];
            for _ in 0..8 {
                for a in 0..m {
                    trial[a] = wrap_angle(angles[a] - scale * step[a]);
                }
                let new_cost = self.cost(&trial[..m]);
                if new_cost < cost {
                    angles.copy_from_slice(&trial[..m]);
                    cost = new_cost;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted || scale * step.amax() < 1e-15 {
                return;
            }
        }
    }

    pub fn cost(&self, angles: &[f64]) -> f64 {
        self.closure
            .iter()
            .map(|(a, b)| (self.forward(angles, a) - b).norm_squared())
            .sum()
    }

    pub fn solution(&self, angles: &[f64]) -> CycleSolution {
        let angles: Vec<f64> = angles.iter().map(|a| wrap_angle(*a)).collect();
        CycleSolution {
            edge_transforms: super::recover_edge_transforms(&angles, &self.pairs),
            residual: self.max_residual(&angles),
            angles,
        }
    }
}

pub(crate) fn rotate_z(theta: f64, p: &Vec3) -> Vec3 {
    let (s, c) = theta.sin_cos();
    Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
}

/// Polar angle of the xy-part.
pub(crate) fn xy_angle(p: &Vec3) -> f64 {
    p.y.atan2(p.x)
}
