use alloc::vec::Vec;

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::instances::{random_in_cube, random_pose, random_rotation};
use super::scene::{apply_noise, NoiseConfig};
use crate::geometry::{so3_exp, RigidTransform, RotationMatrix, Vec3};
use crate::rng::stream;
use crate::solvers::{PointMatch, ScanId};

/// A scan sequence where scan `i` overlaps every scan within `window`
/// positions of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub n_scans: usize,
    pub window: usize,
    pub matches_per_edge: usize,
    pub cube_side: f64,
    pub noise: NoiseConfig,
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            n_scans: 20,
            window: 3,
            matches_per_edge: 30,
            cube_side: 400.0,
            noise: NoiseConfig::default(),
            outlier_fraction: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGraph {
    /// Scan-to-scan-0 transforms; the first is the identity.
    pub poses: Vec<RigidTransform>,
    pub matches: Vec<PointMatch>,
}

pub fn generate_graph(cfg: &GraphConfig) -> SyntheticGraph {
    let mut rng = stream(cfg.seed, 0);
    let side = cfg.cube_side;
    let mut poses: Vec<RigidTransform> = (0..cfg.n_scans).map(|_| random_pose(&mut rng, side, false)).collect();
    if let Some(first) = poses.first().map(RigidTransform::inverse) {
        for p in &mut poses {
            *p = first.compose(p);
        }
    }
    let inv: Vec<RigidTransform> = poses.iter().map(RigidTransform::inverse).collect();
    let mut matches = Vec::new();
    for i in 0..cfg.n_scans {
        for j in i + 1..cfg.n_scans.min(i + cfg.window + 1) {
            let k = cfg.matches_per_edge;
            let n_out = (cfg.outlier_fraction * k as f64).round() as usize;
            let out = sample(&mut rng, k, n_out).into_vec();
            for slot in 0..k {
                let x = random_in_cube(&mut rng, side);
                let y = if out.contains(&slot) { random_in_cube(&mut rng, side) } else { x };
                let pa = apply_noise(&inv[i].apply(&x), &cfg.noise, &mut rng);
                let pb = apply_noise(&inv[j].apply(&y), &cfg.noise, &mut rng);
                matches.push(PointMatch::new(i as ScanId, j as ScanId, pa, pb));
            }
        }
    }
    SyntheticGraph { poses, matches }
}

/// Circulant graph of relative rotations: node `i` links to `i ± o` for
/// every offset `o`, so each node has degree `2 · offsets.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RotationGraphConfig {
    pub n_nodes: usize,
    pub offsets: Vec<usize>,
    /// Share of edges replaced by uniformly random rotations.
    pub corrupt_fraction: f64,
    /// Per-axis Gaussian perturbation of the clean edges, degrees.
    pub noise_deg: f64,
    pub seed: u64,
}

impl Default for RotationGraphConfig {
    fn default() -> Self {
        Self { n_nodes: 20, offsets: alloc::vec![1, 2, 3, 4], corrupt_fraction: 0.2, noise_deg: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationGraph {
    /// Node-to-node-0 rotations; the first is the identity.
    pub truth: Vec<RotationMatrix>,
    /// `(i, j, R_ij)` with `R_ij ≈ R_jᵀ R_i`.
    pub edges: Vec<(ScanId, ScanId, RotationMatrix)>,
    pub corrupted: Vec<bool>,
}

pub fn rotation_graph(cfg: &RotationGraphConfig) -> RotationGraph {
    let mut rng = stream(cfg.seed, 0);
    let n = cfg.n_nodes;
    let mut truth: Vec<RotationMatrix> = (0..n).map(|_| random_rotation(&mut rng)).collect();
    if let Some(first) = truth.first().map(|r| r.inverse()) {
        for r in &mut truth {
            *r = first * *r;
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for &o in &cfg.offsets {
            let j = (i + o) % n;
            let key = (i.min(j), i.max(j));
            if i != j && !pairs.contains(&key) {
                pairs.push(key);
            }
        }
    }
    pairs.sort_unstable();
    let n_bad = (cfg.corrupt_fraction * pairs.len() as f64).round() as usize;
    let bad = sample(&mut rng, pairs.len(), n_bad).into_vec();
    let noise = Normal::new(0.0, cfg.noise_deg.to_radians().max(0.0)).expect("finite noise");
    let mut edges = Vec::with_capacity(pairs.len());
    let mut corrupted = Vec::with_capacity(pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let is_bad = bad.contains(&k);
        let r = if is_bad {
            random_rotation(&mut rng)
        } else {
            let clean = truth[j].inverse() * truth[i];
            if cfg.noise_deg > 0.0 {
                let v = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
                so3_exp(&v) * clean
            } else {
                clean
            }
        };
        edges.push((i as ScanId, j as ScanId, r));
        corrupted.push(is_bad);
    }
    RotationGraph { truth, edges, corrupted }
}
