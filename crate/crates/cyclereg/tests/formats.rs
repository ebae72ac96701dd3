use std::collections::BTreeMap;
use std::path::Path;

use cyclereg::formats::{
    read_instance, read_matches, read_ply, read_trajectory, records_to_poses, poses_to_records, write_instance,
    write_matches, write_ply, write_trajectory, FormatError, InstanceError, TrajectoryRecord,
};
use cyclereg_core::geometry::so3_exp;
use cyclereg_core::rng::stream;
use cyclereg_core::synthbench::planted_instance;
use cyclereg_core::{PointMatch, RigidTransform, SolveError, SolverKind, Vec3};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE), Just(1e300)]
}

fn point() -> impl Strategy<Value = Vec3> {
    (finite(), finite(), finite()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_round_trip_bit_exact(rows in prop::collection::vec((0u32..50, 1u32..50, point(), point()), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let ms: Vec<PointMatch> = rows.iter().map(|&(a, d, p, q)| PointMatch::new(a, a + d, p, q)).collect();
        write_matches(&path, &ms).unwrap();
        let back = read_matches(&path).unwrap();
        prop_assert_eq!(back.len(), ms.len());
        for (x, y) in back.iter().zip(&ms) {
            prop_assert_eq!((x.scan_a, x.scan_b), (y.scan_a, y.scan_b));
            for k in 0..3 {
                prop_assert_eq!(x.p_a[k].to_bits(), y.p_a[k].to_bits());
                prop_assert_eq!(x.p_b[k].to_bits(), y.p_b[k].to_bits());
            }
        }
    }

    #[test]
    fn trajectory_round_trip_bit_exact(
        poses in prop::collection::btree_map(0u32..1000, (point(), -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..10)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        let poses: BTreeMap<_, _> = poses
            .into_iter()
            .map(|(id, (t, a, b, c))| (id, RigidTransform::new(so3_exp(&Vec3::new(a, b, c)), t)))
            .collect();
        let records = poses_to_records(&poses);
        write_trajectory(&path, &records).unwrap();
        let back = read_trajectory(&path).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (x, y) in back.iter().zip(&records) {
            prop_assert_eq!(x.id, y.id);
            prop_assert!(y.q[3] >= 0.0);
            for k in 0..3 {
                prop_assert_eq!(x.t[k].to_bits(), y.t[k].to_bits());
            }
            for k in 0..4 {
                prop_assert_eq!(x.q[k].to_bits(), y.q[k].to_bits());
            }
        }
        for (id, pose) in records_to_poses(&back) {
            let orig = &poses[&id];
            prop_assert!((pose.rotation.matrix() - orig.rotation.matrix()).norm() < 1e-12);
            prop_assert_eq!(pose.translation, orig.translation);
        }
    }

    #[test]
    fn ply_round_trip_bit_exact(pts in prop::collection::vec(point(), 0..30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        write_ply(&path, &pts).unwrap();
        prop_assert_eq!(read_ply(&path).unwrap(), pts);
    }
}

fn parse_line(e: FormatError) -> u64 {
    match e {
        FormatError::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other}"),
    }
}

#[test]
fn match_parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let header = "scan_a,scan_b,ax,ay,az,bx,by,bz\n";
    let bad_float = write(dir.path(), "a.csv", &format!("{header}# comment\n0,1,1,2,3,4,5,6\n0,1,1,x,3,4,5,6\n"));
    assert_eq!(parse_line(read_matches(&bad_float).unwrap_err()), 4);
    let short = write(dir.path(), "b.csv", &format!("{header}0,1,1,2,3,4,5\n"));
    assert_eq!(parse_line(read_matches(&short).unwrap_err()), 2);
    let bad_id = write(dir.path(), "c.csv", &format!("{header}0,1,1,2,3,4,5,6\n-1,1,1,2,3,4,5,6\n"));
    assert_eq!(parse_line(read_matches(&bad_id).unwrap_err()), 3);
    let nan = write(dir.path(), "d.csv", &format!("{header}0,1,NaN,2,3,4,5,6\n"));
    assert_eq!(parse_line(read_matches(&nan).unwrap_err()), 2);
    let same_scan = write(dir.path(), "g.csv", &format!("{header}\n0,1,1,2,3,4,5,6\n2,2,1,2,3,4,5,6\n"));
    assert_eq!(parse_line(read_matches(&same_scan).unwrap_err()), 4);
    let wrong_header = write(dir.path(), "e.csv", "a,b,c\n");
    assert!(read_matches(&wrong_header).is_err());
    let empty = write(dir.path(), "f.csv", "");
    assert!(read_matches(&empty).unwrap_err().to_string().contains("empty"));
    let missing = dir.path().join("missing.csv");
    assert!(matches!(read_matches(&missing), Err(FormatError::Io { .. })));
}

#[test]
fn trajectory_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unnormalized = write(dir.path(), "a.txt", "# id tx ty tz qx qy qz qw\n0 0 0 0 0 0 0 1\n1 0 0 0 0 0 0.5 1\n");
    let e = read_trajectory(&unnormalized).unwrap_err();
    assert_eq!(parse_line(e), 3);
    let dup = write(dir.path(), "b.txt", "0 0 0 0 0 0 0 1\n0 1 0 0 0 0 0 1\n");
    assert!(read_trajectory(&dup).unwrap_err().to_string().contains('0'));
    let short = write(dir.path(), "c.txt", "0 0 0 0 0 0 1\n");
    assert_eq!(parse_line(read_trajectory(&short).unwrap_err()), 1);
}

#[test]
fn trajectory_flips_negative_w() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "a.txt", "3 1 2 3 0 0 -0.6 -0.8\n");
    let rec = read_trajectory(&path).unwrap();
    let pose = records_to_poses(&rec)[&3];
    let again = TrajectoryRecord::from_pose(3, &pose);
    assert!(again.q[3] > 0.0);
    assert!((again.q[2] - 0.6).abs() < 1e-12);
}

#[test]
fn ply_skips_other_properties_and_elements() {
    let dir = tempfile::tempdir().unwrap();
    let text = "ply\nformat ascii 1.0\ncomment made elsewhere\nelement vertex 2\nproperty float x\nproperty uchar red\n\
                property float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n\
                1 255 2 3\n4 0 5 6\n3 0 1 1\n";
    let path = write(dir.path(), "a.ply", text);
    assert_eq!(read_ply(&path).unwrap(), vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    let binary = write(dir.path(), "b.ply", "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n");
    assert!(read_ply(&binary).is_err());
}

#[test]
fn instance_round_trip_and_layout_errors() {
    let dir = tempfile::tempdir().unwrap();
    for kind in SolverKind::ALL {
        let p = planted_instance(kind, &mut stream(21, kind as u64), 400.0);
        let path = dir.path().join(format!("{kind}.csv"));
        write_instance(&path, &p.instance).unwrap();
        assert_eq!(read_instance(&path, kind).unwrap(), p.instance, "{kind}");
    }
    let c4 = dir.path().join("cycle4.csv");
    match read_instance(&c4, SolverKind::Cycle5) {
        Err(InstanceError::Layout(SolveError::Layout { solver, layout, .. })) => {
            assert_eq!(solver, "cycle5");
            assert!(layout.contains("closure"), "{layout}");
        }
        other => panic!("expected a layout error, got {other:?}"),
    }
    let rows = read_matches(&c4).unwrap();
    let mut broken = rows.clone();
    broken[2].scan_a = 7;
    let path = dir.path().join("broken.csv");
    write_matches(&path, &broken).unwrap();
    assert!(matches!(read_instance(&path, SolverKind::Cycle4), Err(InstanceError::Layout(_))));
}
