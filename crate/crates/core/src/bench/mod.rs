//! Random-map benchmark: scenario generation, the planner matrix, CSV
//! records and the summary table.

mod render;

pub use render::{palette, render_ppm, render_svg, save_ppm, save_svg, RenderError};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::PoseSE2;
use crate::gridmap::{collision_check, generate_random_map, inflate, Costmap, RandomMapError};
use crate::heuristics::OCTILE_SCALE;
use crate::lattice::ControlSet;
use crate::planners::{Path, PlanError, Planner, PlannerConfig, PlannerKind};

/// Smallest start to goal distance of a scenario, meters.
pub const MIN_SEPARATION: f64 = 3.0;

/// How the benchmark maps are built.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub width_m: f64,
    pub height_m: f64,
    pub resolution: f64,
    /// Obstacle side length range, meters.
    pub obstacle_size: (f64, f64),
    /// Cells this close to an obstacle cannot hold the robot center.
    pub inscribed_radius: f64,
    pub decay: f64,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            width_m: 100.0,
            height_m: 100.0,
            resolution: 0.05,
            obstacle_size: (0.5, 3.0),
            inscribed_radius: 0.2,
            decay: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchMap {
    pub id: usize,
    pub density: f64,
    pub seed: u64,
    pub map: Costmap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: usize,
    pub map_id: usize,
    pub start: PoseSE2,
    pub goal: PoseSE2,
    pub density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub maps: Vec<BenchMap>,
    pub scenarios: Vec<Scenario>,
    /// Maps skipped because too few pairs could be found.
    pub warnings: Vec<String>,
}

impl Suite {
    pub fn map(&self, id: usize) -> &BenchMap {
        &self.maps[id]
    }
}

/// Sampling attempts allowed per requested pair.
const ATTEMPTS_PER_PAIR: usize = 200;

fn map_seed(seed: u64, density_idx: usize, map_idx: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((density_idx as u64) << 32 | map_idx as u64)
}

/// Builds `maps_per_density` random maps per density and samples
/// `pairs_per_map` verified start/goal pairs on each. Pairs are at least
/// [`MIN_SEPARATION`] apart, collision-free for `config`'s footprint and
/// connected according to a grid plan. Deterministic in `seed`.
pub fn generate_scenarios(
    densities: &[f64],
    maps_per_density: usize,
    pairs_per_map: usize,
    seed: u64,
    spec: &MapSpec,
    config: &PlannerConfig,
) -> Result<Suite, RandomMapError> {
    let mut grid_cfg = config.clone();
    grid_cfg.kind = PlannerKind::TwoD;
    grid_cfg.smoother.enabled = false;
    let mut suite = Suite {
        maps: Vec::new(),
        scenarios: Vec::new(),
        warnings: Vec::new(),
    };
    for (di, &density) in densities.iter().enumerate() {
        for mi in 0..maps_per_density {
            let mseed = map_seed(seed, di, mi);
            let raw = generate_random_map(
                spec.width_m,
                spec.height_m,
                spec.resolution,
                density,
                spec.obstacle_size,
                mseed,
            )?;
            let map = inflate(&raw, spec.inscribed_radius, spec.decay);
            let pairs = sample_pairs(&map, pairs_per_map, mseed, &grid_cfg);
            if pairs.len() < pairs_per_map {
                suite.warnings.push(format!(
                    "map {mi} at density {density}: found {} of {pairs_per_map} pairs, skipped",
                    pairs.len()
                ));
                continue;
            }
            let map_id = suite.maps.len();
            for (start, goal) in pairs {
                suite.scenarios.push(Scenario {
                    id: suite.scenarios.len(),
                    map_id,
                    start,
                    goal,
                    density,
                    seed: mseed,
                });
            }
            suite.maps.push(BenchMap {
                id: map_id,
                density,
                seed: mseed,
                map,
            });
        }
    }
    Ok(suite)
}

fn sample_pairs(map: &Costmap, n: usize, seed: u64, grid_cfg: &PlannerConfig) -> Vec<(PoseSE2, PoseSE2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5CE4_A210);
    let (x0, y0, x1, y1) = map.bounds();
    let mut planner = Planner::new(grid_cfg.clone()).expect("grid planner config is valid");
    let mut out = Vec::with_capacity(n);
    let sample = |rng: &mut ChaCha8Rng| {
        let p = PoseSE2::new(
            rng.random_range(x0..x1),
            rng.random_range(y0..y1),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        (!collision_check(map, &p, &grid_cfg.footprint)).then_some(p)
    };
    for _ in 0..n * ATTEMPTS_PER_PAIR {
        if out.len() == n {
            break;
        }
        let (Some(s), Some(g)) = (sample(&mut rng), sample(&mut rng)) else {
            continue;
        };
        if s.distance(&g) < MIN_SEPARATION {
            continue;
        }
        if planner.plan(map, s, g).is_ok() {
            out.push((s, g));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    Failure(String),
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }

    fn label(&self) -> String {
        match self {
            Outcome::Success => "success".into(),
            Outcome::Failure(r) => format!("failure:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scenario: usize,
    pub map_id: usize,
    pub density: f64,
    pub planner: PlannerKind,
    /// Cold planning time (empty heuristic cache), milliseconds.
    pub t_ms: f64,
    /// Replanning time with the heuristic cached, milliseconds.
    pub t_warm_ms: Option<f64>,
    pub l_path: f64,
    pub cost_total: f64,
    pub expansions: usize,
    /// Largest discrete curvature of the unsmoothed path, 1/m.
    pub max_curvature: f64,
    pub outcome: Outcome,
}

pub const CSV_HEADER: &str =
    "scenario,map,density,planner,outcome,t_ms,t_warm_ms,l_path,cost_total,expansions,max_curvature";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let warm = self.t_warm_ms.map(|t| format!("{t:.3}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.3},{},{:.6},{:.6},{},{:.6}",
            self.scenario,
            self.map_id,
            self.density,
            self.planner.name(),
            self.outcome.label(),
            self.t_ms,
            warm,
            self.l_path,
            self.cost_total,
            self.expansions,
            self.max_curvature,
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub planners: Vec<PlannerKind>,
    /// Shared configuration; `kind` is overridden per planner.
    pub config: PlannerConfig,
    /// Required when the lattice planner runs.
    pub control_set: Option<ControlSet>,
    /// Also time a replan with the heuristic cached.
    pub warm: bool,
    /// Keep planned paths (unsmoothed) in the result.
    pub keep_paths: bool,
}

impl BenchOptions {
    /// The benchmark configuration: reversing with Reeds-Shepp expansion
    /// and a search weight of `1/cos(π/8)`, which undoes the admissibility
    /// scale of the obstacle term so nodes are ordered by the grid cost.
    /// The first collision-free analytic expansion ends the search.
    pub fn desk_scale(control_set: Option<ControlSet>) -> Self {
        let config = PlannerConfig {
            allow_reverse: true,
            motion_model: crate::heuristics::MotionModel::ReedsShepp,
            heuristic_weight: 1.0 / OCTILE_SCALE,
            analytic_acceptance: f64::INFINITY,
            ..PlannerConfig::default()
        };
        Self {
            planners: PlannerKind::ALL.to_vec(),
            config,
            control_set,
            warm: false,
            keep_paths: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    /// Scenario-major, then planner in `options.planners` order.
    pub records: Vec<BenchRecord>,
    /// Parallel to `records` when paths were kept.
    pub paths: Vec<Option<Path>>,
    pub elapsed_s: f64,
}

fn planner_for(kind: PlannerKind, options: &BenchOptions) -> Result<Planner, PlanError> {
    let mut cfg = options.config.clone();
    cfg.kind = kind;
    // timing and curvature are taken on the raw search output
    cfg.smoother.enabled = false;
    match (kind, &options.control_set) {
        (PlannerKind::Lattice, Some(cs)) => Planner::with_control_set(cfg, cs.clone()),
        _ => Planner::new(cfg),
    }
}

/// Runs every planner on every scenario. Failures are recorded, never
/// fatal; a planner that cannot be built fails all of its scenarios.
pub fn run_benchmark(suite: &Suite, options: &BenchOptions) -> BenchRun {
    let clock = Instant::now();
    let mut planners: Vec<Result<Planner, String>> = options
        .planners
        .iter()
        .map(|&k| planner_for(k, options).map_err(|e| e.to_string()))
        .collect();
    let mut records = Vec::new();
    let mut paths = Vec::new();
    let mut warmed = None;
    for sc in &suite.scenarios {
        let map = &suite.maps[sc.map_id].map;
        // table and primitive builds stay out of the timings
        if warmed != Some(sc.map_id) {
            for p in planners.iter_mut() {
                if let Ok(planner) = p {
                    if let Err(e) = planner.warm_up(map) {
                        *p = Err(e.to_string());
                    }
                }
            }
            warmed = Some(sc.map_id);
        }
        for (k, planner) in options.planners.iter().zip(planners.iter_mut()) {
            let mut rec = BenchRecord {
                scenario: sc.id,
                map_id: sc.map_id,
                density: sc.density,
                planner: *k,
                t_ms: 0.0,
                t_warm_ms: None,
                l_path: 0.0,
                cost_total: 0.0,
                expansions: 0,
                max_curvature: 0.0,
                outcome: Outcome::Success,
            };
            let mut kept = None;
            match planner {
                Err(e) => rec.outcome = Outcome::Failure(format!("setup: {e}")),
                Ok(p) => {
                    p.clear_cache();
                    match p.plan(map, sc.start, sc.goal) {
                        Ok(path) => {
                            rec.t_ms = (path.planning_time_s * 1e3).max(f64::MIN_POSITIVE);
                            rec.l_path = path.length_m;
                            rec.cost_total = path.cost_total;
                            rec.expansions = path.expansions;
                            rec.max_curvature = path.max_curvature();
                            if options.warm {
                                rec.t_warm_ms = p.plan(map, sc.start, sc.goal).ok().map(|w| w.planning_time_s * 1e3);
                            }
                            if options.keep_paths {
                                kept = Some(path);
                            }
                        }
                        Err(e) => rec.outcome = Outcome::Failure(failure_reason(&e)),
                    }
                }
            }
            records.push(rec);
            paths.push(kept);
        }
    }
    BenchRun {
        records,
        paths,
        elapsed_s: clock.elapsed().as_secs_f64(),
    }
}

fn failure_reason(e: &PlanError) -> String {
    match e {
        PlanError::StartInCollision => "start_in_collision".into(),
        PlanError::GoalInCollision => "goal_in_collision".into(),
        PlanError::NoPathExists { .. } => "no_path".into(),
        PlanError::TimeLimit { .. } => "time_limit".into(),
        PlanError::IterationLimit { .. } => "iteration_limit".into(),
        other => other.to_string().replace(',', ";"),
    }
}

/// Means of one planner at one density, over scenarios every planner solved.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub density: f64,
    pub planner: PlannerKind,
    pub solved: usize,
    pub attempted: usize,
    pub mean_t_ms: f64,
    pub mean_l_path: f64,
    /// Best or within 1% of the best time at this density.
    pub t_marked: bool,
    pub l_marked: bool,
}

/// Relative margin for marking results next to the best one.
pub const MARK_MARGIN: f64 = 0.01;

pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    // density is keyed by its bit pattern so it can order a map
    let mut by_density: BTreeMap<u64, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_density.entry(r.density.to_bits()).or_default().push(r);
    }
    let mut rows = Vec::new();
    for recs in by_density.values() {
        let mut kinds: Vec<PlannerKind> = Vec::new();
        for r in recs {
            if !kinds.contains(&r.planner) {
                kinds.push(r.planner);
            }
        }
        let mut solved_by_all: BTreeMap<usize, usize> = BTreeMap::new();
        for r in recs.iter().filter(|r| r.outcome.is_success()) {
            *solved_by_all.entry(r.scenario).or_default() += 1;
        }
        let common: Vec<usize> = solved_by_all
            .into_iter()
            .filter(|&(_, n)| n == kinds.len())
            .map(|(s, _)| s)
            .collect();
        let mut block: Vec<SummaryRow> = kinds
            .iter()
            .map(|&k| {
                let mine: Vec<&&BenchRecord> = recs.iter().filter(|r| r.planner == k).collect();
                let used: Vec<&&&BenchRecord> = mine
                    .iter()
                    .filter(|r| common.binary_search(&r.scenario).is_ok())
                    .collect();
                let n = used.len().max(1) as f64;
                SummaryRow {
                    density: recs[0].density,
                    planner: k,
                    solved: mine.iter().filter(|r| r.outcome.is_success()).count(),
                    attempted: mine.len(),
                    mean_t_ms: used.iter().map(|r| r.t_ms).sum::<f64>() / n,
                    mean_l_path: used.iter().map(|r| r.l_path).sum::<f64>() / n,
                    t_marked: false,
                    l_marked: false,
                }
            })
            .collect();
        let best_t = block.iter().map(|r| r.mean_t_ms).fold(f64::INFINITY, f64::min);
        let best_l = block.iter().map(|r| r.mean_l_path).fold(f64::INFINITY, f64::min);
        for r in &mut block {
            r.t_marked = r.mean_t_ms <= best_t * (1.0 + MARK_MARGIN);
            r.l_marked = r.mean_l_path <= best_l * (1.0 + MARK_MARGIN);
        }
        rows.extend(block);
    }
    rows
}

/// Markdown table in the layout of the paper's results: one block per
/// density, marked entries in bold.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut kinds: Vec<PlannerKind> = Vec::new();
    for r in rows {
        if !kinds.contains(&r.planner) {
            kinds.push(r.planner);
        }
    }
    let mut s = String::from("| obstacles | metric |");
    for k in &kinds {
        let _ = write!(s, " {} |", k.name());
    }
    s.push_str("\n|---|---|");
    s.push_str(&"---|".repeat(kinds.len()));
    s.push('\n');
    let mut densities: Vec<f64> = rows.iter().map(|r| r.density).collect();
    densities.dedup();
    let cell = |v: f64, marked: bool| {
        if marked {
            format!(" **{v:.2}** |")
        } else {
            format!(" {v:.2} |")
        }
    };
    for d in densities {
        let block: Vec<&SummaryRow> = rows.iter().filter(|r| r.density == d).collect();
        let find = |k: PlannerKind| block.iter().find(|r| r.planner == k);
        let _ = write!(s, "| {:.0}% | t (ms) |", d * 100.0);
        for &k in &kinds {
            s.push_str(&find(k).map_or(" - |".into(), |r| cell(r.mean_t_ms, r.t_marked)));
        }
        let _ = write!(s, "\n| | l_path (m) |");
        for &k in &kinds {
            s.push_str(&find(k).map_or(" - |".into(), |r| cell(r.mean_l_path, r.l_marked)));
        }
        let _ = write!(s, "\n| | solved |");
        for &k in &kinds {
            s.push_str(&find(k).map_or(" - |".into(), |r| format!(" {}/{} |", r.solved, r.attempted)));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> MapSpec {
        MapSpec {
            width_m: 12.0,
            height_m: 12.0,
            ..MapSpec::default()
        }
    }

    #[test]
    fn empty_map_pairs_are_all_reachable() {
        let cfg = PlannerConfig::new(PlannerKind::TwoD);
        let suite = generate_scenarios(&[0.0], 1, 10, 3, &tiny_spec(), &cfg).unwrap();
        assert_eq!(suite.scenarios.len(), 10);
        let run = run_benchmark(
            &suite,
            &BenchOptions {
                planners: vec![PlannerKind::TwoD],
                config: cfg,
                control_set: None,
                warm: false,
                keep_paths: false,
            },
        );
        assert!(run
            .records
            .iter()
            .all(|r| r.outcome.is_success() && r.t_ms > 0.0 && r.l_path > 0.0));
    }

    #[test]
    fn same_seed_same_scenarios() {
        let cfg = PlannerConfig::new(PlannerKind::TwoD);
        let a = generate_scenarios(&[0.1], 1, 5, 11, &tiny_spec(), &cfg).unwrap();
        let b = generate_scenarios(&[0.1], 1, 5, 11, &tiny_spec(), &cfg).unwrap();
        assert_eq!(a.scenarios, b.scenarios);
        assert!(a.scenarios.iter().all(|s| s.start.distance(&s.goal) >= MIN_SEPARATION));
    }

    fn rec(scenario: usize, planner: PlannerKind, t: f64, l: f64) -> BenchRecord {
        BenchRecord {
            scenario,
            map_id: 0,
            density: 0.1,
            planner,
            t_ms: t,
            t_warm_ms: None,
            l_path: l,
            cost_total: l,
            expansions: 1,
            max_curvature: 0.0,
            outcome: Outcome::Success,
        }
    }

    #[test]
    fn summary_marks_best_and_within_one_percent() {
        let recs = vec![
            rec(0, PlannerKind::TwoD, 10.0, 50.0),
            rec(0, PlannerKind::Hybrid, 5.0, 50.4),
            rec(0, PlannerKind::Lattice, 5.04, 51.0),
        ];
        let rows = summarize(&recs);
        let marks: Vec<(bool, bool)> = rows.iter().map(|r| (r.t_marked, r.l_marked)).collect();
        assert_eq!(marks, vec![(false, true), (true, true), (true, false)]);
        let table = summary_table(&rows);
        assert!(table.contains("**50.00**") && table.contains(" 51.00 |"));
    }

    #[test]
    fn summary_compares_common_scenarios_only() {
        let mut failed = rec(1, PlannerKind::Hybrid, 0.0, 0.0);
        failed.outcome = Outcome::Failure("no_path".into());
        let recs = vec![
            rec(0, PlannerKind::TwoD, 1.0, 10.0),
            rec(0, PlannerKind::Hybrid, 1.0, 11.0),
            rec(1, PlannerKind::TwoD, 1.0, 100.0),
            failed,
        ];
        let rows = summarize(&recs);
        assert_eq!(rows[0].mean_l_path, 10.0);
        assert_eq!((rows[1].solved, rows[1].attempted), (1, 2));
    }

    #[test]
    fn csv_header_is_stable() {
        assert_eq!(
            CSV_HEADER,
            "scenario,map,density,planner,outcome,t_ms,t_warm_ms,l_path,cost_total,expansions,max_curvature"
        );
        let row = rec(3, PlannerKind::Lattice, 1.5, 2.0).csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("3,0,0.1,lattice,success,1.500,,"));
    }
}
