use std::f64::consts::TAU;
use std::time::Duration;

use kinoplan::geometry::PoseSE2;
use kinoplan::gridmap::{collision_check, generate_random_map, inflate, Costmap, LETHAL};
use kinoplan::heuristics::MotionModel;
use kinoplan::lattice::{generate_minimal_control_set, save_control_set, ControlSet};
use kinoplan::planners::{GoalMode, HeuristicMode, Path, PlanError, Planner, PlannerConfig, PlannerKind};
use proptest::prelude::*;

fn free_map(w_m: f64, h_m: f64) -> Costmap {
    Costmap::new((w_m / 0.05) as usize, (h_m / 0.05) as usize, 0.05, (0.0, 0.0)).unwrap()
}

fn control_set() -> ControlSet {
    generate_minimal_control_set(0.05, 0.4, 16, 3).unwrap()
}

fn planner(kind: PlannerKind, cfg: PlannerConfig) -> Planner {
    match kind {
        PlannerKind::Lattice => Planner::with_control_set(cfg, control_set()).unwrap(),
        k => Planner::new(PlannerConfig { kind: k, ..cfg }).unwrap(),
    }
}

fn fill(map: &mut Costmap, x0: f64, y0: f64, x1: f64, y1: f64, value: u8) {
    let r = map.resolution();
    for j in (y0 / r) as usize..(y1 / r) as usize {
        for i in (x0 / r) as usize..(x1 / r) as usize {
            map.set_cost(i, j, value);
        }
    }
}

fn check_path(path: &Path, map: &Costmap, cfg: &PlannerConfig) {
    let res = map.resolution();
    for w in path.poses.windows(2) {
        assert!(
            w[0].distance(&w[1]) <= 1.5 * res + 1e-9,
            "spacing {}",
            w[0].distance(&w[1])
        );
    }
    let summed: f64 = path.poses.windows(2).map(|w| w[0].distance(&w[1])).sum();
    assert!((summed - path.length_m).abs() < 1e-6);
    assert_eq!(path.segments.len() + 1, path.poses.len());
    assert!(path.poses.iter().all(|p| !collision_check(map, p, &cfg.footprint)));
    if cfg.kind != PlannerKind::TwoD {
        assert!(
            path.max_curvature() <= 1.0 / cfg.turning_radius + 1e-3,
            "{}",
            path.max_curvature()
        );
    }
}

#[test]
fn free_map_straight_ten_meters() {
    let map = free_map(50.0, 50.0);
    let start = PoseSE2::new(20.025, 25.025, 0.0);
    let goal = PoseSE2::new(30.025, 25.025, 0.0);
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::new(kind);
        let path = planner(kind, cfg.clone()).plan(&map, start, goal).unwrap();
        assert!((path.length_m - 10.0).abs() <= 0.1, "{kind:?}: {}", path.length_m);
        check_path(&path, &map, &cfg);
    }
}

#[test]
fn identical_poses_give_single_pose_path() {
    let map = free_map(10.0, 10.0);
    let p = PoseSE2::new(5.025, 5.025, 0.0);
    for kind in PlannerKind::ALL {
        let path = planner(kind, PlannerConfig::new(kind)).plan(&map, p, p).unwrap();
        assert_eq!(path.poses.len(), 1, "{kind:?}");
        assert_eq!(path.length_m, 0.0);
        assert_eq!(path.expansions, 0);
    }
}

#[test]
fn collision_and_no_path_errors_are_distinct() {
    let mut map = free_map(10.0, 10.0);
    fill(&mut map, 1.0, 1.0, 2.0, 2.0, LETHAL);
    // a closed box around (8, 8)
    fill(&mut map, 7.0, 7.0, 9.0, 7.2, LETHAL);
    fill(&mut map, 7.0, 8.8, 9.0, 9.0, LETHAL);
    fill(&mut map, 7.0, 7.0, 7.2, 9.0, LETHAL);
    fill(&mut map, 8.8, 7.0, 9.0, 9.0, LETHAL);
    let free = PoseSE2::new(4.0, 4.0, 0.0);
    let boxed = PoseSE2::new(8.0, 8.0, 0.0);
    let wall = PoseSE2::new(1.5, 1.5, 0.0);
    for kind in PlannerKind::ALL {
        let mut p = planner(kind, PlannerConfig::new(kind));
        let e = p.plan(&map, wall, free).unwrap_err();
        assert!(matches!(e, PlanError::StartInCollision) && e.exit_code() == 3);
        let e = p.plan(&map, free, wall).unwrap_err();
        assert!(matches!(e, PlanError::GoalInCollision) && e.exit_code() == 3);
        let e = p.plan(&map, free, PoseSE2::new(20.0, 4.0, 0.0)).unwrap_err();
        assert!(matches!(e, PlanError::GoalInCollision));
        let e = p.plan(&map, free, boxed).unwrap_err();
        assert!(
            matches!(e, PlanError::NoPathExists { .. }) && e.exit_code() == 2,
            "{kind:?}: {e}"
        );
    }
}

#[test]
fn limits_are_reported() {
    let map = free_map(20.0, 20.0);
    let (s, g) = (PoseSE2::new(2.0, 2.0, 0.0), PoseSE2::new(18.0, 18.0, 3.0));
    let mut cfg = PlannerConfig::new(PlannerKind::Hybrid);
    cfg.analytic_ratio = None;
    cfg.limits.max_iterations = 10;
    let e = Planner::new(cfg.clone()).unwrap().plan(&map, s, g).unwrap_err();
    assert!(matches!(e, PlanError::IterationLimit { expansions: 10 }), "{e}");
    cfg.limits.max_iterations = usize::MAX;
    cfg.limits.max_planning_time = Duration::ZERO;
    let e = Planner::new(cfg).unwrap().plan(&map, s, g).unwrap_err();
    assert!(matches!(e, PlanError::TimeLimit { .. }), "{e}");
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = PlannerConfig::new(PlannerKind::Hybrid);
    cfg.motion_model = MotionModel::ReedsShepp;
    assert!(matches!(Planner::new(cfg).err(), Some(PlanError::InvalidConfig(_))));
    let cfg = PlannerConfig::new(PlannerKind::Lattice);
    assert!(matches!(Planner::new(cfg).err(), Some(PlanError::InvalidConfig(_))));
    let cfg = PlannerConfig {
        alpha: -1.0,
        ..PlannerConfig::default()
    };
    assert!(Planner::new(cfg).is_err());
}

/// Cup open toward the start with the goal behind it.
fn u_shape_map() -> Costmap {
    let mut map = free_map(20.0, 12.0);
    fill(&mut map, 11.0, 3.0, 11.5, 9.0, LETHAL);
    fill(&mut map, 6.0, 3.0, 11.5, 3.5, LETHAL);
    fill(&mut map, 6.0, 8.5, 11.5, 9.0, LETHAL);
    inflate(&map, 0.2, 3.0)
}

#[test]
fn cost_aware_heuristic_expands_less_around_dead_end() {
    let map = u_shape_map();
    let (s, g) = (PoseSE2::new(3.0, 6.0, 0.0), PoseSE2::new(16.0, 6.0, 0.0));
    let mut counts = Vec::new();
    for mode in [HeuristicMode::CostAware, HeuristicMode::BinaryObstacle] {
        let cfg = PlannerConfig {
            heuristic_mode: mode,
            ..PlannerConfig::new(PlannerKind::Hybrid)
        };
        let path = Planner::new(cfg.clone()).unwrap().plan(&map, s, g).unwrap();
        check_path(&path, &map, &cfg);
        counts.push(path.expansions);
    }
    assert!(
        counts[0] < counts[1],
        "cost-aware {} vs binary {}",
        counts[0],
        counts[1]
    );
}

#[test]
fn goal_modes_only_shorten_paths() {
    let raw = generate_random_map(15.0, 15.0, 0.05, 0.1, (0.5, 2.0), 5).unwrap();
    let map = inflate(&raw, 0.2, 3.0);
    let cs = control_set();
    let queries = [
        (PoseSE2::new(2.0, 2.0, 0.3), PoseSE2::new(12.0, 11.0, 2.0)),
        (PoseSE2::new(3.0, 12.0, 4.0), PoseSE2::new(11.0, 3.0, 1.0)),
        (PoseSE2::new(7.0, 2.5, 1.5), PoseSE2::new(7.5, 12.5, 4.7)),
    ];
    for kind in [PlannerKind::Hybrid, PlannerKind::Lattice] {
        for &(s, g) in &queries {
            if collision_check(&map, &s, &PlannerConfig::default().footprint)
                || collision_check(&map, &g, &PlannerConfig::default().footprint)
            {
                continue;
            }
            let len = |mode: GoalMode| {
                let cfg = PlannerConfig {
                    goal_mode: mode,
                    ..PlannerConfig::new(kind)
                };
                let mut p = match kind {
                    PlannerKind::Lattice => Planner::with_control_set(cfg, cs.clone()).unwrap(),
                    _ => Planner::new(cfg).unwrap(),
                };
                p.plan(&map, s, g).map_or(f64::INFINITY, |p| p.length_m)
            };
            let (e, b, a) = (
                len(GoalMode::Exact),
                len(GoalMode::Bidirectional),
                len(GoalMode::AnyHeading),
            );
            assert!(e.is_finite());
            assert!(
                b <= e + 1e-9 && a <= b + 1e-9,
                "{kind:?}: exact {e} bidirectional {b} any {a}"
            );
        }
    }
}

#[test]
fn any_heading_arrives_without_turning_around() {
    // facing away from a goal 4 m behind: exact needs a loop, any heading does not
    let map = free_map(20.0, 20.0);
    let (s, g) = (PoseSE2::new(10.0, 10.0, 0.0), PoseSE2::new(6.0, 10.0, 0.0));
    let exact = Planner::new(PlannerConfig::default())
        .unwrap()
        .plan(&map, s, g)
        .unwrap();
    let cfg = PlannerConfig {
        goal_mode: GoalMode::AnyHeading,
        ..PlannerConfig::default()
    };
    let any = Planner::new(cfg).unwrap().plan(&map, s, g).unwrap();
    assert!(any.length_m < exact.length_m, "{} vs {}", any.length_m, exact.length_m);
}

#[test]
fn lattice_planner_reads_control_set_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("set.txt");
    save_control_set(&control_set(), &file).unwrap();
    let cfg = PlannerConfig {
        kind: PlannerKind::Lattice,
        control_set_path: Some(file),
        ..PlannerConfig::default()
    };
    let map = free_map(10.0, 10.0);
    let path = Planner::new(cfg.clone())
        .unwrap()
        .plan(&map, PoseSE2::new(2.0, 2.0, 0.0), PoseSE2::new(8.0, 7.0, 1.2))
        .unwrap();
    check_path(&path, &map, &cfg);
    let missing = PlannerConfig {
        control_set_path: Some(dir.path().join("none.txt")),
        ..cfg
    };
    assert!(matches!(Planner::new(missing).err(), Some(PlanError::ControlSet(_))));
}

#[test]
fn lattice_rejects_mismatched_resolution() {
    let map = Costmap::new(100, 100, 0.1, (0.0, 0.0)).unwrap();
    let mut p = Planner::with_control_set(PlannerConfig::default(), control_set()).unwrap();
    let e = p
        .plan(&map, PoseSE2::new(2.0, 2.0, 0.0), PoseSE2::new(8.0, 8.0, 0.0))
        .unwrap_err();
    assert!(matches!(e, PlanError::InvalidConfig(_)), "{e}");
}

#[test]
fn reversing_paths_mark_their_reverse_segments() {
    // a dead-end corridor facing the wall: the only way out is backwards
    let mut map = free_map(12.0, 12.0);
    fill(&mut map, 2.0, 5.0, 8.0, 5.5, LETHAL);
    fill(&mut map, 2.0, 6.5, 8.0, 7.0, LETHAL);
    fill(&mut map, 7.5, 5.0, 8.0, 7.0, LETHAL);
    let map = inflate(&map, 0.2, 3.0);
    let cfg = PlannerConfig {
        allow_reverse: true,
        motion_model: MotionModel::ReedsShepp,
        ..PlannerConfig::default()
    };
    let (s, g) = (PoseSE2::new(6.0, 6.0, 0.0), PoseSE2::new(10.0, 2.0, 4.71));
    let path = Planner::new(cfg.clone()).unwrap().plan(&map, s, g).unwrap();
    check_path(&path, &map, &cfg);
    assert!(path.segments.iter().any(|m| m.reverse));
    let back = Path::from_csv(&path.to_csv()).unwrap();
    assert_eq!(back.poses, path.poses);
    let dirs = |p: &Path| p.segments.iter().map(|m| m.reverse).collect::<Vec<_>>();
    assert_eq!(dirs(&back), dirs(&path));
}

#[test]
fn warm_replan_reuses_heuristic() {
    let raw = generate_random_map(30.0, 30.0, 0.05, 0.1, (0.5, 2.0), 9).unwrap();
    let map = inflate(&raw, 0.2, 3.0);
    let (s, g) = (PoseSE2::new(3.0, 3.0, 0.0), PoseSE2::new(26.0, 25.0, 1.0));
    let fp = PlannerConfig::default().footprint;
    assert!(!collision_check(&map, &s, &fp) && !collision_check(&map, &g, &fp));
    let mut p = Planner::new(PlannerConfig::default()).unwrap();
    let cold = p.plan(&map, s, g).unwrap();
    let generation = p.heuristic_cache().generation();
    let warm = p.plan(&map, s, g).unwrap();
    assert_eq!(p.heuristic_cache().generation(), generation);
    assert_eq!(warm.poses, cold.poses);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn planned_paths_satisfy_contract(
        seed in 0u64..1000,
        sx in 1.0f64..9.0, sy in 1.0f64..9.0, st in 0.0f64..TAU,
        gx in 1.0f64..9.0, gy in 1.0f64..9.0, gt in 0.0f64..TAU,
        reverse in any::<bool>(),
    ) {
        let raw = generate_random_map(10.0, 10.0, 0.05, 0.1, (0.3, 1.0), seed).unwrap();
        let map = inflate(&raw, 0.2, 3.0);
        let (s, g) = (PoseSE2::new(sx, sy, st), PoseSE2::new(gx, gy, gt));
        let fp = PlannerConfig::default().footprint;
        prop_assume!(!collision_check(&map, &s, &fp) && !collision_check(&map, &g, &fp));
        for kind in PlannerKind::ALL {
            let mut cfg = PlannerConfig::new(kind);
            if reverse {
                cfg.allow_reverse = true;
                cfg.motion_model = MotionModel::ReedsShepp;
            }
            match planner(kind, cfg.clone()).plan(&map, s, g) {
                Ok(path) => check_path(&path, &map, &cfg),
                Err(e) => prop_assert_eq!(e.exit_code(), 2, "{:?}: {}", kind, e),
            }
        }
    }
}
