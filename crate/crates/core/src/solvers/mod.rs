//! Minimal solvers for the pairwise, 3-, 4- and 5-cycle problems and their
//! planar variants, plus Procrustes refinement.
//!
//! Every solver works in the aligned frames of the predefined transforms,
//! where each edge is a single rotation `L(θ)` about z, and reports the
//! angle tuples together with the reconstructed edge transforms.

pub(crate) mod chain;
mod cycle3;
mod cycle4;
mod cycle5;
mod pairwise;
mod planar;
mod procrustes;
mod trigexpr;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PredefinedPair, RigidTransform, Vec3, DEFAULT_EPSILON_AXIS};
use crate::math::angle_distance;

pub use planar::{make_predefined_planar, planar4_family_at};
pub use procrustes::{refine_procrustes, rms_residual};

pub type ScanId = u32;

/// Gauss–Newton budget for seeds coming out of an elimination. Seeds from
/// spurious branches may start far from a root and need the extra steps to
/// land on it exactly, where deduplication then merges them.
pub(crate) const POLISH_ITERATIONS: usize = 30;
/// Resultant roots within this many radians of the real line, measured as
/// angles, still seed the local solve.
pub(crate) const SEED_IMAG_ANGLE: f64 = 0.05;

/// A 3D correspondence: `p_a` in scan `scan_a` and `p_b` in scan `scan_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMatch {
    pub scan_a: ScanId,
    pub scan_b: ScanId,
    pub p_a: Vec3,
    pub p_b: Vec3,
}

impl PointMatch {
    pub fn new(scan_a: ScanId, scan_b: ScanId, p_a: Vec3, p_b: Vec3) -> Self {
        Self { scan_a, scan_b, p_a, p_b }
    }

    /// The same correspondence seen from the other scan.
    pub fn flipped(&self) -> Self {
        Self { scan_a: self.scan_b, scan_b: self.scan_a, p_a: self.p_b, p_b: self.p_a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Pairwise,
    Cycle3,
    Cycle4,
    Cycle5,
    Planar2,
    Planar3,
    Planar4,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Pairwise,
        SolverKind::Cycle3,
        SolverKind::Cycle4,
        SolverKind::Cycle5,
        SolverKind::Planar2,
        SolverKind::Planar3,
        SolverKind::Planar4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pairwise => "pairwise",
            SolverKind::Cycle3 => "cycle3",
            SolverKind::Cycle4 => "cycle4",
            SolverKind::Cycle5 => "cycle5",
            SolverKind::Planar2 => "planar2",
            SolverKind::Planar3 => "planar3",
            SolverKind::Planar4 => "planar4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Number of scans in the loop.
    pub fn cycle_len(self) -> usize {
        match self {
            SolverKind::Pairwise | SolverKind::Planar2 => 2,
            SolverKind::Cycle3 | SolverKind::Planar3 => 3,
            SolverKind::Cycle4 | SolverKind::Planar4 => 4,
            SolverKind::Cycle5 => 5,
        }
    }

    pub fn is_planar(self) -> bool {
        matches!(self, SolverKind::Planar2 | SolverKind::Planar3 | SolverKind::Planar4)
    }

    /// Matches required on each adjacent pair.
    pub fn per_edge(self) -> usize {
        if self.is_planar() { 1 } else { 2 }
    }

    /// Matches between the first and last scan. For the two-scan solvers
    /// this is the extra match on the single pair.
    pub fn closure_count(self) -> usize {
        if self == SolverKind::Cycle5 { 2 } else { 1 }
    }

    pub fn total_matches(self) -> usize {
        (self.cycle_len() - 1) * self.per_edge() + self.closure_count()
    }

    pub fn max_solutions(self) -> usize {
        match self {
            SolverKind::Pairwise | SolverKind::Planar2 => 2,
            SolverKind::Cycle3 | SolverKind::Planar3 => 4,
            SolverKind::Cycle4 | SolverKind::Planar4 => 16,
            SolverKind::Cycle5 => 32,
        }
    }

    pub fn layout(self) -> String {
        format!(
            "{} per adjacent edge x {} edges + {} closure = {}",
            self.per_edge(),
            self.cycle_len() - 1,
            self.closure_count(),
            self.total_matches()
        )
    }
}

impl core::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{solver} expects {layout}: {detail}")]
    Layout { solver: &'static str, layout: String, detail: String },
    #[error("degenerate virtual axis on edge {edge}: anchors {length} apart")]
    DegenerateAxis { edge: usize, length: f64 },
    #[error("closure constraint carries no information about the unknown angles")]
    DegenerateClosure,
    #[error("points are collinear or coincident")]
    DegenerateConfiguration,
    #[error("elimination is rank deficient; fall back to the multistart solver")]
    ResolverFallback,
    #[error("under-determined system; one-parameter family of {} samples", family.len())]
    UnderDetermined { family: Vec<[f64; 3]> },
}

/// A minimal problem: `n` scans in a loop with the match layout required by
/// `kind`.
///
/// `adjacent[i]` holds matches from `scans[i]` to `scans[i + 1]`. `closure`
/// holds matches from `scans[0]` to `scans[n - 1]`; for the two-scan solvers
/// that is the same pair as `adjacent[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleInstance {
    pub kind: SolverKind,
    pub scans: Vec<ScanId>,
    pub adjacent: Vec<Vec<PointMatch>>,
    pub closure: Vec<PointMatch>,
}

impl CycleInstance {
    /// Builds and validates an instance. The layout must match the solver
    /// exactly; in particular a 4-cycle consumes 7 matches and a 5-cycle 10.
    pub fn new(
        kind: SolverKind,
        scans: Vec<ScanId>,
        adjacent: Vec<Vec<PointMatch>>,
        closure: Vec<PointMatch>,
    ) -> Result<Self, SolveError> {
        let inst = Self { kind, scans, adjacent, closure };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let kind = self.kind;
        let err = |detail: String| SolveError::Layout { solver: kind.name(), layout: kind.layout(), detail };
        let n = kind.cycle_len();
        if self.scans.len() != n {
            return Err(err(format!("{} scans given, {} required", self.scans.len(), n)));
        }
        if self.adjacent.len() != n - 1 {
            return Err(err(format!("{} adjacent edges given", self.adjacent.len())));
        }
        for (i, edge) in self.adjacent.iter().enumerate() {
            if edge.len() != kind.per_edge() {
                return Err(err(format!("edge {} has {} matches", i, edge.len())));
            }
            for m in edge {
                if m.scan_a != self.scans[i] || m.scan_b != self.scans[i + 1] {
                    return Err(err(format!(
                        "edge {} match links scans {}-{}, expected {}-{}",
                        i, m.scan_a, m.scan_b, self.scans[i], self.scans[i + 1]
                    )));
                }
            }
        }
        if self.closure.len() != kind.closure_count() {
            return Err(err(format!("{} closure matches given", self.closure.len())));
        }
        let (first, last) = (self.scans[0], self.scans[n - 1]);
        for m in &self.closure {
            if m.scan_a != first || m.scan_b != last {
                return Err(err(format!(
                    "closure match links scans {}-{}, expected {}-{}",
                    m.scan_a, m.scan_b, first, last
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.scans[i] == self.scans[j] {
                    return Err(err(format!("scan {} repeats", self.scans[i])));
                }
            }
        }
        let total = self.match_count();
        if total != kind.total_matches() {
            return Err(err(format!("{} matches given", total)));
        }
        Ok(())
    }

    pub fn match_count(&self) -> usize {
        self.adjacent.iter().map(Vec::len).sum::<usize>() + self.closure.len()
    }

    pub fn all_matches(&self) -> impl Iterator<Item = &PointMatch> {
        self.adjacent.iter().flatten().chain(self.closure.iter())
    }

    /// Largest absolute point coordinate.
    pub fn point_scale(&self) -> f64 {
        self.all_matches()
            .flat_map(|m| m.p_a.iter().chain(m.p_b.iter()).copied().collect::<Vec<_>>())
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// One real solution: the angle per edge and the edge transforms
/// `T(S_i → S_{i+1}) = g_i⁻¹ ∘ L(θ_i) ∘ h_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSolution {
    pub angles: Vec<f64>,
    pub edge_transforms: Vec<RigidTransform>,
    /// Largest closure residual, scene units.
    pub residual: f64,
}

impl CycleSolution {
    /// Transform from the first scan to the last one.
    pub fn composed(&self) -> RigidTransform {
        self.edge_transforms
            .iter()
            .fold(RigidTransform::identity(), |acc, t| t.compose(&acc))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub solutions: Vec<CycleSolution>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, CycleSolution> {
        self.solutions.iter()
    }

    /// Inserts unless an existing solution lies within `tol` in max-norm
    /// angle distance, in which case the one with smaller residual stays.
    pub fn insert_dedup(&mut self, sol: CycleSolution, tol: f64) {
        for existing in self.solutions.iter_mut() {
            if angles_close(&existing.angles, &sol.angles, tol) {
                if sol.residual < existing.residual {
                    *existing = sol;
                }
                return;
            }
        }
        self.solutions.push(sol);
    }

    pub fn contains_angles(&self, angles: &[f64], tol: f64) -> bool {
        self.solutions.iter().any(|s| angles_close(&s.angles, angles, tol))
    }
}

pub fn angles_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| angle_distance(*x, *y) <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Closure residual a candidate must meet. `None` means
    /// `1e-6 · (1 + point scale)`.
    pub accept_tol: Option<f64>,
    /// Max-norm angle distance below which two solutions are merged.
    pub dedup_tol: f64,
    pub epsilon_axis: f64,
    /// Tolerance on the angle-free z-row of the planar solvers. `None` uses
    /// the accept tolerance.
    pub consistency_tol: Option<f64>,
    /// Imaginary-part threshold for accepting eigenvalues as real seeds.
    pub imag_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            accept_tol: None,
            dedup_tol: 1e-6,
            epsilon_axis: DEFAULT_EPSILON_AXIS,
            consistency_tol: None,
            imag_tol: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn with_accept_tol(tol: f64) -> Self {
        Self { accept_tol: Some(tol), ..Self::default() }
    }

    pub(crate) fn accept_tol_for(&self, inst: &CycleInstance) -> f64 {
        self.accept_tol.unwrap_or_else(|| 1e-6 * (1.0 + inst.point_scale()))
    }
}

/// Solves any minimal instance with the solver matching its kind.
pub fn solve(instance: &CycleInstance, opts: &SolverOptions) -> Result<SolutionSet, SolveError> {
    instance.validate()?;
    let mut set = match instance.kind {
        SolverKind::Pairwise => pairwise::solve_pairwise_minimal(instance, opts),
        SolverKind::Cycle3 => cycle3::solve_3cycle(instance, opts),
        SolverKind::Cycle4 => cycle4::solve_4cycle(instance, opts),
        SolverKind::Cycle5 => cycle5::solve_5cycle(instance, opts),
        SolverKind::Planar2 => planar::solve_planar_pairwise(instance, opts),
        SolverKind::Planar3 => planar::solve_planar_3cycle(instance, opts),
        SolverKind::Planar4 => planar::solve_planar_4cycle(instance, opts),
    }?;
    let max = instance.kind.max_solutions();
    if set.len() > max {
        // only reachable with very loose accept tolerances
        set.solutions.sort_by(|a, b| a.residual.total_cmp(&b.residual));
        set.solutions.truncate(max);
    }
    Ok(set)
}

pub use pairwise::solve_pairwise_minimal;
pub use cycle3::solve_3cycle;
pub use cycle4::solve_4cycle;
pub use cycle5::solve_5cycle;
pub use planar::{solve_planar_3cycle, solve_planar_4cycle, solve_planar_pairwise};

/// Edge transforms `g_i⁻¹ ∘ L(θ_i) ∘ h_i`.
pub fn recover_edge_transforms(angles: &[f64], pairs: &[PredefinedPair]) -> Vec<RigidTransform> {
    assert_eq!(angles.len(), pairs.len(), "one angle per predefined pair");
    angles.iter().zip(pairs).map(|(a, p)| p.edge_transform(*a)).collect()
}

/// Predefined pairs of an instance, one per adjacent edge.
pub fn predefined_pairs(instance: &CycleInstance, opts: &SolverOptions) -> Result<Vec<PredefinedPair>, SolveError> {
    Ok(chain::Chain::build(instance, opts.epsilon_axis)?.pairs)
}
