use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::instances::{random_in_cube, random_pose};
use crate::geometry::{RigidTransform, Vec3};
use crate::rng::stream;
use crate::robust::MatchPool;
use crate::solvers::{PointMatch, ScanId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    Linear,
    Quadratic,
}

/// Range-dependent Gaussian noise: `σ(d) = sigma0 · (d / d_ref)` or its
/// square, `d` being the distance to the camera center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub model: NoiseModel,
    pub sigma0: f64,
    pub d_ref: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { model: NoiseModel::Linear, sigma0: 0.0, d_ref: 200.0 }
    }
}

impl NoiseConfig {
    pub fn sigma_at(&self, d: f64) -> f64 {
        let r = d / self.d_ref;
        match self.model {
            NoiseModel::Linear => self.sigma0 * r,
            NoiseModel::Quadratic => self.sigma0 * r * r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub n_points: usize,
    pub cube_side: f64,
    pub n_cameras: usize,
    /// Each camera pair keeps a fraction of the points drawn from this range.
    pub corr_fraction: (f64, f64),
    pub noise: NoiseConfig,
    /// Share of each pair's matches whose target point is resampled
    /// uniformly in the cube.
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_points: 400,
            cube_side: 400.0,
            n_cameras: 5,
            corr_fraction: (0.2, 0.7),
            noise: NoiseConfig::default(),
            outlier_fraction: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatch {
    pub m: PointMatch,
    pub inlier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    /// Scan-to-world poses.
    pub poses: Vec<RigidTransform>,
    pub world: Vec<Vec3>,
    /// `observed[s][k]`: world point `k` seen from scan `s`, noise applied.
    pub observed: Vec<Vec<Vec3>>,
    /// Matches for every pair `(i, j)`, `i < j`, oriented from `i` to `j`.
    pub pairs: BTreeMap<(usize, usize), Vec<LabeledMatch>>,
}

/// Adds isotropic Gaussian noise to a point given in camera coordinates.
pub fn apply_noise<R: Rng + ?Sized>(p: &Vec3, noise: &NoiseConfig, rng: &mut R) -> Vec3 {
    let sigma = noise.sigma_at(p.norm());
    if sigma <= 0.0 {
        return *p;
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    p + Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng))
}

/// Same as [`apply_noise`] for a point in world coordinates seen by a camera
/// with pose `camera` (camera-to-world).
pub fn apply_noise_world<R: Rng + ?Sized>(x: &Vec3, camera: &RigidTransform, noise: &NoiseConfig, rng: &mut R) -> Vec3 {
    let local = camera.inverse().apply(x);
    camera.apply(&apply_noise(&local, noise, rng))
}

pub fn generate_scene(cfg: &SceneConfig) -> SyntheticScene {
    let mut rng = stream(cfg.seed, 0);
    let side = cfg.cube_side;
    let world: Vec<Vec3> = (0..cfg.n_points).map(|_| random_in_cube(&mut rng, side)).collect();
    let poses: Vec<RigidTransform> = (0..cfg.n_cameras).map(|_| random_pose(&mut rng, side, false)).collect();
    let observed: Vec<Vec<Vec3>> = poses
        .iter()
        .map(|pose| {
            let inv = pose.inverse();
            world.iter().map(|x| apply_noise(&inv.apply(x), &cfg.noise, &mut rng)).collect()
        })
        .collect();
    let mut pairs = BTreeMap::new();
    let (lo, hi) = cfg.corr_fraction;
    for i in 0..cfg.n_cameras {
        for j in i + 1..cfg.n_cameras {
            let frac = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let keep = ((frac * cfg.n_points as f64).round() as usize).clamp(1, cfg.n_points);
            let mut idx = sample(&mut rng, cfg.n_points, keep).into_vec();
            idx.sort_unstable();
            let n_out = (cfg.outlier_fraction * keep as f64).round() as usize;
            let out: Vec<usize> = sample(&mut rng, keep, n_out).into_vec();
            let inv_j = poses[j].inverse();
            let list = idx
                .iter()
                .enumerate()
                .map(|(slot, &k)| {
                    let inlier = !out.contains(&slot);
                    let p_b = if inlier {
                        observed[j][k]
                    } else {
                        inv_j.apply(&random_in_cube(&mut rng, side))
                    };
                    LabeledMatch { m: PointMatch::new(i as ScanId, j as ScanId, observed[i][k], p_b), inlier }
                })
                .collect();
            pairs.insert((i, j), list);
        }
    }
    SyntheticScene { poses, world, observed, pairs }
}

impl SyntheticScene {
    pub fn matches(&self, i: usize, j: usize) -> Vec<PointMatch> {
        self.pairs[&(i, j)].iter().map(|l| l.m).collect()
    }

    /// Ground-truth transform from scan `i` to scan `j`.
    pub fn relative(&self, i: usize, j: usize) -> RigidTransform {
        self.poses[j].inverse().compose(&self.poses[i])
    }

    /// RANSAC pool for the loop through `scans` (increasing ids).
    pub fn pool(&self, scans: &[usize]) -> MatchPool {
        let n = scans.len();
        let ids = scans.iter().map(|s| *s as ScanId).collect();
        let adjacent = scans.windows(2).map(|w| self.matches(w[0], w[1])).collect();
        let closure = if n > 2 { self.matches(scans[0], scans[n - 1]) } else { Vec::new() };
        MatchPool { scans: ids, adjacent, closure }
    }
}

/// Settings for a single planted RANSAC pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSpec {
    pub side: f64,
    /// Matches per edge of the pool.
    pub per_edge: usize,
    pub inlier_fraction: f64,
    /// Constant isotropic noise added to both ends of every match.
    pub sigma: f64,
}

/// Builds a pool for the loop through `poses` (one pose per scan, ids
/// `0..n`): each edge gets `per_edge` matches, the first
/// `round(per_edge · inlier_fraction)` of them inliers. Returns the pool and
/// the inlier labels per edge.
pub fn pool_from_poses<R: Rng + ?Sized>(poses: &[RigidTransform], spec: &PoolSpec, rng: &mut R) -> (MatchPool, Vec<Vec<bool>>) {
    let n = poses.len();
    let inv: Vec<RigidTransform> = poses.iter().map(RigidTransform::inverse).collect();
    let n_in = (spec.per_edge as f64 * spec.inlier_fraction).round() as usize;
    let edge = |a: usize, b: usize, rng: &mut R| {
        let mut labels = Vec::with_capacity(spec.per_edge);
        let list = (0..spec.per_edge)
            .map(|k| {
                let x = random_in_cube(rng, spec.side);
                let inlier = k < n_in;
                labels.push(inlier);
                let y = if inlier { x } else { random_in_cube(rng, spec.side) };
                let pa = jitter(&inv[a].apply(&x), spec.sigma, rng);
                let pb = jitter(&inv[b].apply(&y), spec.sigma, rng);
                PointMatch::new(a as ScanId, b as ScanId, pa, pb)
            })
            .collect::<Vec<_>>();
        (list, labels)
    };
    let mut adjacent = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n - 1 {
        let (l, b) = edge(i, i + 1, rng);
        adjacent.push(l);
        labels.push(b);
    }
    let mut closure = Vec::new();
    if n > 2 {
        let (l, b) = edge(0, n - 1, rng);
        closure = l;
        labels.push(b);
    }
    (MatchPool { scans: (0..n as ScanId).collect(), adjacent, closure }, labels)
}

fn jitter<R: Rng + ?Sized>(p: &Vec3, sigma: f64, rng: &mut R) -> Vec3 {
    if sigma <= 0.0 {
        return *p;
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    p + Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng))
}
