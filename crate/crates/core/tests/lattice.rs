use std::path::PathBuf;

use kinoplan::geometry::{angle_diff, discrete_curvature};
use kinoplan::lattice::{
    completeness_violations, generate_minimal_control_set, generate_with_report, load_control_set, parse_control_set,
    redundant_primitives, save_control_set, write_control_set, ControlSet, GeneratorOptions, GridSymmetry,
};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/r1_res005_h16.cs")
}

fn reference() -> ControlSet {
    generate_minimal_control_set(0.05, 1.0, 16, 3).unwrap()
}

fn assert_close(a: &ControlSet, b: &ControlSet, tol: f64) {
    assert_eq!(a.headings.len(), b.headings.len());
    for (x, y) in a.headings.iter().zip(&b.headings) {
        assert!((x - y).abs() <= tol);
    }
    assert_eq!(a.primitives.len(), b.primitives.len());
    for (p, q) in a.primitives.iter().zip(&b.primitives) {
        assert_eq!(
            (
                p.start_heading_bin,
                p.end_heading_bin,
                p.turn,
                p.reversed,
                p.poses.len()
            ),
            (
                q.start_heading_bin,
                q.end_heading_bin,
                q.turn,
                q.reversed,
                q.poses.len()
            )
        );
        assert!((p.length - q.length).abs() <= tol);
        for (u, v) in p.poses.iter().zip(&q.poses) {
            assert!((u.x - v.x).abs() <= tol && (u.y - v.y).abs() <= tol);
            assert!(angle_diff(u.theta, v.theta).abs() <= tol);
        }
    }
}

#[test]
fn generator_reproduces_committed_control_set() {
    let golden = load_control_set(golden_path()).unwrap();
    assert_close(&reference(), &golden, 1e-9);
}

#[test]
fn save_load_round_trip_within_tolerance() {
    let cs = reference();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("set.cs");
    save_control_set(&cs, &file).unwrap();
    let back = load_control_set(&file).unwrap();
    assert_close(&cs, &back, 1e-9);
    assert_eq!(write_control_set(&back), write_control_set(&cs));
}

#[test]
fn primitives_land_on_lattice_states() {
    let cs = reference();
    let res = cs.resolution;
    for p in &cs.primitives {
        let s = p.poses[0];
        assert!(s.x == 0.0 && s.y == 0.0 && angle_diff(s.theta, cs.headings[p.start_heading_bin]).abs() < 1e-12);
        let e = p.end_pose();
        let (i, j) = cs.end_offset(p);
        assert!(
            (e.x - i as f64 * res).abs() < 1e-9 && (e.y - j as f64 * res).abs() < 1e-9,
            "{e:?}"
        );
        assert!(angle_diff(e.theta, cs.headings[p.end_heading_bin]).abs() < 1e-9);
        for w in p.poses.windows(2) {
            assert!(w[0].distance(&w[1]) <= res + 1e-9);
        }
        for w in p.poses.windows(3) {
            let k = discrete_curvature((w[0].x, w[0].y), (w[1].x, w[1].y), (w[2].x, w[2].y));
            assert!(k <= 1.0 / cs.turning_radius + 1e-3, "primitive {} curvature {k}", p.id);
        }
    }
}

#[test]
fn set_is_closed_under_grid_symmetries() {
    let cs = reference();
    let key = |p: &kinoplan::geometry::MotionPrimitive| {
        let (i, j) = cs.end_offset(p);
        (p.start_heading_bin, p.end_heading_bin, i, j, p.reversed)
    };
    let keys: std::collections::HashSet<_> = cs.primitives.iter().map(key).collect();
    for p in &cs.primitives {
        for g in GridSymmetry::all() {
            let q = g.apply_primitive(p, &cs.headings);
            assert!(keys.contains(&key(&q)), "{g:?} of primitive {} is missing", p.id);
        }
    }
}

#[test]
fn reference_set_is_minimal_and_complete() {
    let opts = GeneratorOptions::new(0.05, 1.0, 16);
    let (cs, report) = generate_with_report(&opts).unwrap();
    assert!(completeness_violations(&cs, report.horizon_ring, opts.length_tolerance).is_empty());
    let redundant = redundant_primitives(&cs, report.horizon_ring, opts.length_tolerance);
    assert!(redundant.iter().all(|&r| !r), "redundant: {redundant:?}");
}

#[test]
fn bad_files_are_rejected() {
    let text = std::fs::read_to_string(golden_path()).unwrap();
    assert!(parse_control_set(&text.replace("kinoplan-control-set 1", "kinoplan-control-set 9")).is_err());
    assert!(parse_control_set(&text[..text.len() / 2]).is_err());
    assert!(parse_control_set("").is_err());
}
