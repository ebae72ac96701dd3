use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::geometry::{rotation_angle_error, so3_exp, RigidTransform, RotationMatrix, Vec3};
use crate::rng::stream;
use crate::synthbench::{generate_graph, random_in_cube, rotation_graph, GraphConfig, RotationGraphConfig};

fn pair_matches(a: ScanId, b: ScanId, count: usize) -> Vec<PointMatch> {
    (0..count).map(|k| PointMatch::new(a, b, Vec3::new(k as f64, 1.0, 2.0), Vec3::new(3.0, k as f64, 4.0))).collect()
}

fn graph_of(edges: &[(ScanId, ScanId)]) -> PoseGraph {
    let matches: Vec<_> = edges.iter().flat_map(|&(a, b)| pair_matches(a, b, 3)).collect();
    build_graph(&matches, 3)
}

#[test]
fn build_empty_and_single() {
    assert!(build_graph(&[], 15).edges.is_empty());
    let g = build_graph(&pair_matches(4, 2, 15), 15);
    assert_eq!(g.nodes, vec![2, 4]);
    assert_eq!(g.edges.len(), 1);
    // stored oriented from the smaller id
    assert!(g.edges[&(2, 4)].iter().all(|m| m.scan_a == 2 && m.scan_b == 4));
    assert!(build_graph(&pair_matches(4, 2, 14), 15).edges.is_empty());
    assert!(build_graph(&pair_matches(3, 3, 20), 15).edges.is_empty());
}

#[test]
fn build_matches_recount() {
    let mut rng = stream(3, 0);
    let mut matches = Vec::new();
    for i in 0..100u32 {
        for j in i + 1..(i + 4).min(100) {
            let n = rng.random_range(5..30);
            let list = pair_matches(i, j, n);
            // mix orientations
            matches.extend(list.iter().enumerate().map(|(k, m)| if k % 3 == 0 { m.flipped() } else { *m }));
        }
    }
    let g = build_graph(&matches, 15);
    let mut recount: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    for m in &matches {
        *recount.entry(edge_key(m.scan_a, m.scan_b)).or_default() += 1;
    }
    recount.retain(|_, c| *c >= 15);
    assert_eq!(g.edges.len(), recount.len());
    for (k, c) in recount {
        assert_eq!(g.edges[&k].len(), c);
    }
}

#[test]
fn ring_and_tree() {
    let ring = graph_of(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
    let plan = decompose_cycles(&ring);
    assert_eq!(plan.cycles, vec![vec![0, 1, 2, 3, 4]]);
    assert!(plan.leftover_edges.is_empty());

    let tree = graph_of(&[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]);
    let plan = decompose_cycles(&tree);
    assert!(plan.cycles.is_empty());
    assert_eq!(plan.leftover_edges.len(), 5);
    assert_eq!(plan.census(), Census { pairwise: 5, cycle3: 0, cycle4: 0, cycle5: 0 });
}

#[test]
fn k5_snapshot() {
    let mut edges = Vec::new();
    for a in 0..5 {
        for b in a + 1..5 {
            edges.push((a, b));
        }
    }
    let g = graph_of(&edges);
    let plan = decompose_cycles(&g);
    verify_plan(&g, &plan).unwrap();
    assert_eq!(plan.cycles, vec![vec![0, 1, 2, 3, 4], vec![0, 2, 4, 1, 3]]);
    assert!(plan.leftover_edges.is_empty());
    assert_eq!(plan.census(), Census { pairwise: 0, cycle3: 0, cycle4: 0, cycle5: 2 });
}

#[test]
fn replay_rejects_short_cycle_first() {
    let g = graph_of(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
    let bad = CyclePlan { cycles: vec![vec![0, 1, 2]], leftover_edges: vec![(0, 4), (2, 3), (3, 4)] };
    assert!(verify_plan(&g, &bad).is_err());
    verify_plan(&g, &decompose_cycles(&g)).unwrap();
}

proptest! {
    #[test]
    fn decomposition_partitions_random_graphs(n in 3u32..12, density in 0.1f64..0.9, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(density) {
                    edges.push((a, b));
                }
            }
        }
        let g = graph_of(&edges);
        let plan = decompose_cycles(&g);
        prop_assert!(verify_plan(&g, &plan).is_ok());
        prop_assert_eq!(plan.clone(), decompose_cycles(&g));
    }
}

fn exact_graph(seed: u64, n: usize, window: usize) -> (GraphConfig, crate::synthbench::SyntheticGraph) {
    let cfg = GraphConfig { n_scans: n, window, matches_per_edge: 20, seed, ..GraphConfig::default() };
    let g = generate_graph(&cfg);
    (cfg, g)
}

fn estimation() -> EstimationConfig {
    EstimationConfig { ransac_iterations: 100, inlier_threshold: 1.0, ..EstimationConfig::default() }
}

#[test]
fn noise_free_relative_poses() {
    let (_, syn) = exact_graph(1, 8, 3);
    let g = build_graph(&syn.matches, 15);
    let plan = decompose_cycles(&g);
    let rel = estimate_relative_poses(&plan, &g, &estimation());
    assert!(rel.failures.is_empty(), "{:?}", rel.failures);
    assert_eq!(rel.estimates.len(), g.edges.len());
    for ((a, b), e) in &rel.estimates {
        let truth = syn.poses[*b as usize].inverse().compose(&syn.poses[*a as usize]);
        assert!(rotation_angle_error(&e.transform.rotation, &truth.rotation) < 1e-6);
        assert!((e.transform.translation - truth.translation).norm() < 1e-6);
        assert_eq!(e.inliers.len(), 20);
    }
}

#[test]
fn provenance_follows_plan() {
    let (_, syn) = exact_graph(2, 6, 2);
    let g = build_graph(&syn.matches, 15);
    let plan = CyclePlan { cycles: vec![], leftover_edges: g.edges.keys().copied().collect() };
    let rel = estimate_relative_poses(&plan, &g, &estimation());
    assert!(rel.estimates.values().all(|e| e.provenance == Provenance::Pairwise));

    let (_, syn) = exact_graph(3, 6, 4);
    let g = build_graph(&syn.matches, 15);
    let plan = decompose_cycles(&g);
    let rel = estimate_relative_poses(&plan, &g, &estimation());
    for (i, c) in plan.cycles.iter().enumerate() {
        for e in CyclePlan::cycle_edges(c) {
            assert_eq!(rel.estimates[&e].provenance, Provenance::Cycle { index: i, length: c.len() });
        }
    }
    for e in &plan.leftover_edges {
        assert_eq!(rel.estimates[e].provenance, Provenance::Pairwise);
    }
}

#[test]
fn outlier_edge_is_isolated() {
    let (_, mut syn) = exact_graph(4, 5, 1);
    let mut rng = stream(4, 1);
    for m in syn.matches.iter_mut().filter(|m| (m.scan_a, m.scan_b) == (2, 3)) {
        m.p_b = random_in_cube(&mut rng, 400.0);
    }
    let g = build_graph(&syn.matches, 15);
    let plan = decompose_cycles(&g);
    assert_eq!(plan.leftover_edges.len(), 4);
    let rel = estimate_relative_poses(&plan, &g, &estimation());
    assert_eq!(rel.failures.len(), 1);
    assert_eq!(rel.failures[0].edge, (2, 3));
    assert_eq!(rel.estimates.len(), 3);
}

fn max_error(avg: &RotationAverage, truth: &[RotationMatrix]) -> f64 {
    truth
        .iter()
        .enumerate()
        .map(|(i, t)| rotation_angle_error(&avg.rotations[&(i as ScanId)], t))
        .fold(0.0, f64::max)
}

#[test]
fn consistent_rotations_recovered() {
    for seed in 0..5 {
        let rg = rotation_graph(&RotationGraphConfig { corrupt_fraction: 0.0, seed, ..RotationGraphConfig::default() });
        let nodes: Vec<ScanId> = (0..20).collect();
        let avg = average_rotations(&nodes, &rg.edges, &AveragingConfig::default());
        assert!(max_error(&avg, &rg.truth) < 1e-6);
        assert_eq!(avg.components.len(), 1);
    }
}

#[test]
fn single_edge_average() {
    let r = so3_exp(&Vec3::new(0.3, -0.2, 1.1));
    let avg = average_rotations(&[0, 1], &[(0, 1, r)], &AveragingConfig::default());
    assert_eq!(avg.rotations[&0], RotationMatrix::identity());
    // R_01 = R_1ᵀ R_0, so R_1 = R_01ᵀ
    assert!(rotation_angle_error(&avg.rotations[&1], &r.inverse()) < 1e-12);
}

#[test]
fn gauge_shift_is_equivariant() {
    let rg = rotation_graph(&RotationGraphConfig { corrupt_fraction: 0.0, noise_deg: 2.0, seed: 7, ..RotationGraphConfig::default() });
    let nodes: Vec<ScanId> = (0..20).collect();
    let g = so3_exp(&Vec3::new(0.4, 1.0, -0.7));
    let shifted: Vec<_> = rg.edges.iter().map(|(a, b, r)| (*a, *b, g.inverse() * r * g)).collect();
    let cfg = AveragingConfig::default();
    let base = average_rotations(&nodes, &rg.edges, &cfg);
    let moved = average_rotations(&nodes, &shifted, &cfg);
    for n in &nodes {
        let expect = g.inverse() * base.rotations[n] * g;
        assert!(rotation_angle_error(&moved.rotations[n], &expect) < 1e-7);
    }
}

#[test]
fn corrupted_edges_mostly_recovered() {
    let nodes: Vec<ScanId> = (0..20).collect();
    let mut good = 0;
    for seed in 0..20 {
        let rg = rotation_graph(&RotationGraphConfig { seed, ..RotationGraphConfig::default() });
        let avg = average_rotations(&nodes, &rg.edges, &AveragingConfig::default());
        good += usize::from(max_error(&avg, &rg.truth) < 1.0);
    }
    assert!(good >= 18, "{good}/20");
}

#[test]
fn disconnected_components_get_own_gauge() {
    let r = so3_exp(&Vec3::new(0.1, 0.2, 0.3));
    let avg = average_rotations(&[0, 1, 5, 6], &[(0, 1, r), (5, 6, r)], &AveragingConfig::default());
    assert_eq!(avg.components, vec![vec![0, 1], vec![5, 6]]);
    assert_eq!(avg.rotations[&5], RotationMatrix::identity());
}

fn single_estimate(a: ScanId, b: ScanId, inliers: Vec<PointMatch>) -> RelativePoseSet {
    let mut set = RelativePoseSet::default();
    set.estimates.insert(
        (a, b),
        EdgeEstimate { from: a, to: b, transform: RigidTransform::identity(), inliers, provenance: Provenance::Pairwise },
    );
    set
}

#[test]
fn translation_closed_form_and_duplicates() {
    let r1 = so3_exp(&Vec3::new(0.2, 0.5, -0.1));
    let rots = RotationAverage {
        rotations: [(0, RotationMatrix::identity()), (1, r1)].into_iter().collect(),
        components: vec![vec![0, 1]],
        iterations: (0, 0),
    };
    let m = PointMatch::new(0, 1, Vec3::new(1.0, 2.0, 3.0), Vec3::new(-4.0, 0.5, 2.0));
    let poses = solve_translations(&rots, &single_estimate(0, 1, vec![m])).unwrap();
    let expect = m.p_a - r1 * m.p_b;
    assert!((poses.poses[&1].translation - expect).norm() < 1e-12);
    let dup = solve_translations(&rots, &single_estimate(0, 1, vec![m, m, m])).unwrap();
    assert!((dup.poses[&1].translation - expect).norm() < 1e-12);
    assert_eq!(poses.poses[&0].translation, Vec3::zeros());
}

#[test]
fn translation_rank_deficiency() {
    let rots = RotationAverage {
        rotations: [(0, RotationMatrix::identity()), (1, RotationMatrix::identity())].into_iter().collect(),
        components: vec![vec![0, 1]],
        iterations: (0, 0),
    };
    let err = solve_translations(&rots, &single_estimate(0, 1, vec![])).unwrap_err();
    assert_eq!(err, PoseGraphError::RankDeficient { node: 1, reference: 0 });
}

fn check_exact(reg: &Registration, truth: &[RigidTransform]) {
    for (i, t) in truth.iter().enumerate() {
        let p = reg.poses.poses[&(i as ScanId)];
        assert!(rotation_angle_error(&p.rotation, &t.rotation) < 1e-6, "scan {i}");
        assert!((p.translation - t.translation).norm() < 1e-6, "scan {i}");
    }
}

#[test]
fn pipeline_is_exact_on_clean_graph() {
    let (_, syn) = exact_graph(5, 20, 3);
    let cfg = RegisterConfig { estimation: estimation(), ..RegisterConfig::default() };
    let reg = register(&syn.matches, &cfg).unwrap();
    assert!(reg.relative.failures.is_empty());
    check_exact(&reg, &syn.poses);
    let c = reg.census;
    assert!(c.cycle5 > 0);
    assert_eq!(c.pairwise + 3 * c.cycle3 + 4 * c.cycle4 + 5 * c.cycle5, reg.graph.edges.len());
}

#[test]
fn pipeline_single_edge() {
    let (_, syn) = exact_graph(6, 2, 1);
    let cfg = RegisterConfig { estimation: estimation(), ..RegisterConfig::default() };
    let reg = register(&syn.matches, &cfg).unwrap();
    assert_eq!(reg.census, Census { pairwise: 1, cycle3: 0, cycle4: 0, cycle5: 0 });
    assert_eq!(reg.relative.estimates[&(0, 1)].provenance, Provenance::Pairwise);
    check_exact(&reg, &syn.poses);
}

#[test]
fn gauge_pins_node_zero() {
    let (_, syn) = exact_graph(8, 6, 2);
    let reg = register(&syn.matches, &RegisterConfig { estimation: estimation(), ..RegisterConfig::default() }).unwrap();
    assert_eq!(reg.poses.poses[&0], RigidTransform::identity());
}
