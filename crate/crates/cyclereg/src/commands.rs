use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use cyclereg_core::posegraph::{
    assemble, plan_jobs, register_with, run_job, Census, EdgeFailure, EdgeKey, Provenance, Registration,
};
use cyclereg_core::rng::stream;
use cyclereg_core::synthbench::{
    generate_graph, histogram_trial, planted_instance, run_trial, summarize, ComparisonRow, Histogram, Method,
    NoiseModel,
};
use cyclereg_core::{RigidTransform, ScanId, SolverKind, Vec3};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{
    EvalArgs, GenGraphArgs, GenInstanceArgs, HistogramArgs, NoiseModelArg, RegisterArgs, SolveArgs, SynthBenchArgs,
    TimingArgs, EXIT_NO_SOLUTION,
};
use crate::config::Config;
use crate::eval::evaluate;
use crate::formats::{
    fmt_f64, poses_to_records, read_instance, read_matches, read_trajectory, records_to_poses, transform_rows,
    truth_path, write_instance, write_matches, write_ply, write_trajectory, write_truth, TrajectoryRecord,
    TruthSidecar,
};
use crate::parallel::thread_pool;
use crate::timing::{timing_bench, TimingMeta, TIMED_SOLVERS};

/// Writes to `path`, or standard output when `None`.
pub(crate) fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json(value: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

fn parse_kind(name: &str) -> anyhow::Result<SolverKind> {
    SolverKind::from_name(name).ok_or_else(|| {
        let names: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
        anyhow!("unknown solver {name:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Serialize)]
struct SolutionDump {
    angles: Vec<f64>,
    residual: f64,
    edge_transforms: Vec<[[f64; 4]; 3]>,
}

#[derive(Serialize)]
struct SolveDump {
    solver: SolverKind,
    layout: String,
    scans: Vec<ScanId>,
    solutions: Vec<SolutionDump>,
}

pub(crate) fn solve(cfg: &Config, a: &SolveArgs) -> anyhow::Result<ExitCode> {
    let kind = parse_kind(&a.solver)?;
    let inst = read_instance(&a.instance, kind)?;
    let set = cyclereg_core::solve(&inst, &cfg.solver).with_context(|| format!("solving {}", a.instance.display()))?;
    let dump = SolveDump {
        solver: kind,
        layout: kind.layout(),
        scans: inst.scans.clone(),
        solutions: set
            .iter()
            .map(|s| SolutionDump {
                angles: s.angles.clone(),
                residual: s.residual,
                edge_transforms: s.edge_transforms.iter().map(transform_rows).collect(),
            })
            .collect(),
    };
    emit(a.out.output.as_deref(), &json(&dump))?;
    if set.is_empty() {
        eprintln!("no real solution");
        return Ok(ExitCode::from(EXIT_NO_SOLUTION));
    }
    Ok(ExitCode::SUCCESS)
}


#[derive(Serialize)]
struct EdgeReport {
    from: ScanId,
    to: ScanId,
    provenance: Provenance,
    inliers: usize,
    transform: [[f64; 4]; 3],
}

#[derive(Serialize)]
struct RegisterReport {
    scans: Vec<ScanId>,
    census: Census,
    components: Vec<Vec<ScanId>>,
    cycles: Vec<Vec<ScanId>>,
    leftover_edges: Vec<EdgeKey>,
    edges: Vec<EdgeReport>,
    failures: Vec<EdgeFailure>,
    averaging_iterations: [usize; 2],
}

impl RegisterReport {
    fn new(reg: &Registration) -> Self {
        Self {
            scans: reg.graph.nodes.clone(),
            census: reg.census,
            components: reg.poses.components.clone(),
            cycles: reg.plan.cycles.clone(),
            leftover_edges: reg.plan.leftover_edges.clone(),
            edges: reg
                .relative
                .estimates
                .values()
                .map(|e| EdgeReport {
                    from: e.from,
                    to: e.to,
                    provenance: e.provenance,
                    inliers: e.inliers.len(),
                    transform: transform_rows(&e.transform),
                })
                .collect(),
            failures: reg.relative.failures.clone(),
            averaging_iterations: [reg.rotations.iterations.0, reg.rotations.iterations.1],
        }
    }
}

pub(crate) fn register(cfg: &Config, a: &RegisterArgs) -> anyhow::Result<ExitCode> {
    let matches = read_matches(&a.matches)?;
    let pool = thread_pool()?;
    let reg = pool
        .install(|| {
            register_with(&matches, &cfg.register, |plan, graph, ecfg| {
                let jobs = plan_jobs(plan);
                let outcomes: Vec<_> = jobs.par_iter().enumerate().map(|(i, j)| run_job(j, i, graph, ecfg)).collect();
                assemble(outcomes.into_iter().flatten())
            })
        })
        .with_context(|| format!("registering {}", a.matches.display()))?;
    write_trajectory(&a.output, &poses_to_records(&reg.poses.poses))?;
    if let Some(path) = &a.report {
        emit(Some(path), &json(&RegisterReport::new(&reg)))?;
    }
    if let Some(path) = &a.cloud {
        let pts: Vec<Vec3> = matches
            .iter()
            .filter_map(|m| {
                let (pa, pb) = (reg.poses.poses.get(&m.scan_a)?, reg.poses.poses.get(&m.scan_b)?);
                Some([pa.apply(&m.p_a), pb.apply(&m.p_b)])
            })
            .flatten()
            .collect();
        write_ply(path, &pts)?;
    }
    if reg.poses.components.len() > 1 {
        eprintln!("{} components, each in the frame of its smallest scan id", reg.poses.components.len());
    }
    if !reg.relative.failures.is_empty() {
        eprintln!("{} edges failed; see the report", reg.relative.failures.len());
    }
    Ok(ExitCode::SUCCESS)
}

/// RFC 4180 CSV; fields holding a comma or quote get quoted.
fn csv_bytes<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.as_ref())?;
    }
    Ok(w.into_inner().map_err(|e| anyhow!("{e}"))?)
}

fn comparison_csv(rows: &[ComparisonRow]) -> anyhow::Result<Vec<u8>> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.name().to_owned(),
                fmt_f64(r.noise_sigma0),
                fmt_f64(r.mean_rot_err_deg),
                fmt_f64(r.mean_trans_err),
                fmt_f64(r.mean_inlier_pct),
                r.trials.to_string(),
                r.failures.to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &["method", "noise_sigma0", "mean_rot_err_deg", "mean_trans_err", "mean_inlier_pct", "trials", "failures"],
        &body,
    )
}

pub(crate) fn synth_bench(cfg: &Config, a: &SynthBenchArgs) -> anyhow::Result<ExitCode> {
    let mut c = cfg.comparison.clone();
    if let Some(levels) = &a.noise {
        c.noise_levels = levels.clone();
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(i) = a.iterations {
        c.ransac_iterations = i;
    }
    if let Some(t) = a.threshold {
        c.inlier_threshold = t;
    }
    if let Some(m) = a.model {
        c.scene.noise.model = match m {
            NoiseModelArg::Linear => NoiseModel::Linear,
            NoiseModelArg::Quadratic => NoiseModel::Quadratic,
        };
    }
    if c.noise_levels.iter().any(|s| !s.is_finite() || *s < 0.0) {
        bail!("noise levels must be finite and non-negative");
    }
    let cells: Vec<(f64, Method)> = c.noise_levels.iter().flat_map(|&s| Method::ALL.map(|m| (s, m))).collect();
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|k| (0..c.trials).map(move |t| (k, t))).collect();
    let outcomes: Vec<_> = thread_pool()?
        .install(|| tasks.par_iter().map(|&(k, t)| run_trial(&c, cells[k].0, t, cells[k].1)).collect());
    let rows: Vec<ComparisonRow> = cells
        .iter()
        .enumerate()
        .map(|(k, &(s, m))| summarize(m, s, &outcomes[k * c.trials..(k + 1) * c.trials]))
        .collect();
    emit(a.out.output.as_deref(), &comparison_csv(&rows)?)?;
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn histogram(cfg: &Config, a: &HistogramArgs) -> anyhow::Result<ExitCode> {
    let kinds: Vec<SolverKind> = if a.solver == "all" { SolverKind::ALL.to_vec() } else { vec![parse_kind(&a.solver)?] };
    let trials = a.trials.unwrap_or(cfg.histogram.trials);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let seed = cfg.histogram.seed;
    let pool = thread_pool()?;
    let mut body = Vec::new();
    for kind in kinds {
        let outcomes: Vec<_> = pool.install(|| (0..trials).into_par_iter().map(|t| histogram_trial(kind, seed, t)).collect());
        let mut h = Histogram::new(kind);
        for o in outcomes {
            h.record(o);
        }
        for (n, count) in h.rows() {
            body.push(vec![kind.to_string(), n.to_string(), count.to_string()]);
        }
        if h.failures > 0 {
            eprintln!("{kind}: {} of {trials} trials raised a solver error", h.failures);
        }
    }
    emit(a.out.output.as_deref(), &csv_bytes(&["solver", "n_solutions", "count"], &body)?)?;
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn timing(cfg: &Config, a: &TimingArgs) -> anyhow::Result<ExitCode> {
    let trials = a.trials.unwrap_or(cfg.timing.trials);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let rows = timing_bench(&TIMED_SOLVERS, trials, cfg.timing.seed);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.solver.to_string(), fmt_f64(r.mean_ms), fmt_f64(r.median_ms), r.trials.to_string()])
        .collect();
    emit(a.out.output.as_deref(), &csv_bytes(&["solver", "mean_ms", "median_ms", "trials"], &body)?)?;
    let meta = TimingMeta::new(trials, cfg.timing.seed);
    match &a.meta {
        Some(p) => emit(Some(p), &json(&meta))?,
        None => eprintln!("hardware: {}", meta.hardware),
    }
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn eval(a: &EvalArgs) -> anyhow::Result<ExitCode> {
    let est = records_to_poses(&read_trajectory(&a.estimate)?);
    let gt = records_to_poses(&read_trajectory(&a.truth)?);
    let report = evaluate(&est, &gt)?;
    emit(a.out.output.as_deref(), &json(&report))?;
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn gen_instance(cfg: &Config, a: &GenInstanceArgs) -> anyhow::Result<ExitCode> {
    let kind = parse_kind(&a.solver)?;
    let p = planted_instance(kind, &mut stream(cfg.instance.seed, 0), cfg.instance.cube_side);
    let angles = p.true_angles(&cfg.solver).context("generated instance is degenerate; try another seed")?;
    write_instance(&a.output, &p.instance)?;
    let truth = TruthSidecar {
        solver: kind,
        scans: p.instance.scans.clone(),
        angles,
        edge_transforms: p.truth.iter().map(transform_rows).collect(),
    };
    write_truth(&truth_path(&a.output), &truth)?;
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn gen_graph(cfg: &Config, a: &GenGraphArgs) -> anyhow::Result<ExitCode> {
    let mut g = cfg.graph;
    if let Some(n) = a.scans {
        g.n_scans = n;
    }
    if let Some(w) = a.window {
        g.window = w;
    }
    if let Some(m) = a.matches_per_edge {
        g.matches_per_edge = m;
    }
    if let Some(s) = a.noise {
        g.noise.sigma0 = s;
    }
    if let Some(o) = a.outliers {
        g.outlier_fraction = o;
    }
    let syn = generate_graph(&g);
    write_matches(&a.output, &syn.matches)?;
    let poses: BTreeMap<ScanId, RigidTransform> = syn.poses.iter().enumerate().map(|(i, p)| (i as ScanId, *p)).collect();
    let records: Vec<TrajectoryRecord> = poses_to_records(&poses);
    write_trajectory(&a.truth, &records)?;
    Ok(ExitCode::SUCCESS)
}
