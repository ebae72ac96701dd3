use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{components, PoseGraphError, RelativePoseSet, RotationAverage};
use crate::geometry::{RigidTransform, Vec3};
use crate::solvers::ScanId;

/// Per-node transforms from the scan frame into the reference frame of the
/// node's component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsolutePoses {
    pub poses: BTreeMap<ScanId, RigidTransform>,
    pub components: Vec<Vec<ScanId>>,
}

/// Least-squares translations with rotations held fixed. Each inlier match
/// `(p_a, p_b)` on edge `(a, b)` contributes `R_a p_a + t_a = R_b p_b + t_b`;
/// the smallest id of every component gets `t = 0`.
pub fn solve_translations(rotations: &RotationAverage, relative: &RelativePoseSet) -> Result<AbsolutePoses, PoseGraphError> {
    let nodes: Vec<ScanId> = rotations.rotations.keys().copied().collect();
    let tied = relative.estimates.values().filter(|e| !e.inliers.is_empty()).map(|e| (e.from, e.to));
    let match_comps = components(&nodes, tied);
    // every rotation component must stay connected through inlier matches
    for comp in &rotations.components {
        let reference = comp[0];
        let home = match_comps.iter().find(|c| c.contains(&reference)).expect("reference in a component");
        if let Some(&node) = comp.iter().find(|n| !home.contains(n)) {
            return Err(PoseGraphError::RankDeficient { node, reference });
        }
    }
    let mut poses = BTreeMap::new();
    for comp in &rotations.components {
        let index: BTreeMap<ScanId, usize> = comp.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        let m = comp.len() - 1;
        let mut t = alloc::vec![Vec3::zeros(); comp.len()];
        if m > 0 {
            let mut lap = DMatrix::<f64>::zeros(m, m);
            let mut rhs = [DVector::<f64>::zeros(m), DVector::<f64>::zeros(m), DVector::<f64>::zeros(m)];
            for e in relative.estimates.values() {
                let (Some(&a), Some(&b)) = (index.get(&e.from), index.get(&e.to)) else { continue };
                let (ra, rb) = (rotations.rotations[&e.from], rotations.rotations[&e.to]);
                let (ia, ib) = (a.checked_sub(1), b.checked_sub(1));
                for mt in &e.inliers {
                    // t_a − t_b = d
                    let d = rb * mt.p_b - ra * mt.p_a;
                    if let Some(i) = ia {
                        lap[(i, i)] += 1.0;
                    }
                    if let Some(j) = ib {
                        lap[(j, j)] += 1.0;
                    }
                    if let (Some(i), Some(j)) = (ia, ib) {
                        lap[(i, j)] -= 1.0;
                        lap[(j, i)] -= 1.0;
                    }
                    for (axis, v) in rhs.iter_mut().enumerate() {
                        if let Some(i) = ia {
                            v[i] += d[axis];
                        }
                        if let Some(j) = ib {
                            v[j] -= d[axis];
                        }
                    }
                }
            }
            let chol = lap.cholesky().ok_or(PoseGraphError::RankDeficient { node: comp[1], reference: comp[0] })?;
            let sol: Vec<DVector<f64>> = rhs.iter().map(|v| chol.solve(v)).collect();
            for k in 0..m {
                t[k + 1] = Vec3::new(sol[0][k], sol[1][k], sol[2][k]);
            }
        }
        for (k, n) in comp.iter().enumerate() {
            poses.insert(*n, RigidTransform::new(rotations.rotations[n], t[k]));
        }
    }
    Ok(AbsolutePoses { poses, components: rotations.components.clone() })
}
