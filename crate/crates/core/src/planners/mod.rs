//! The grid, hybrid and lattice planners behind one [`plan`] entry point.
//!
//! [`Planner`] keeps the obstacle heuristic, the turning lookup table and
//! the prepared motions between calls, so replanning toward the same goal
//! on the same map reuses the heuristic already computed.

mod cost;
mod se2;
mod smoother;
mod twod;

pub use cost::{apply_penalties, sample_cost};
pub use smoother::{objective, smooth, smooth_with_trace, smoothness, SmootherConfig};

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::geometry::{discrete_curvature, hybrid_primitives, normalize_angle, PoseSE2, PrimitiveError, Steer};
use crate::gridmap::{collision_check, Costmap, Footprint};
use crate::heuristics::{LutError, MotionModel, NonholonomicLut, ObstacleHeuristicCache};
use crate::lattice::{load_control_set, ControlSet, ControlSetError};
use crate::search::{a_star, SearchError, SearchLimits, SearchOptions, SearchResult};
use se2::{heading_index, lattice_heading, GoalSpec, MotionSet, Se2Search, Se2State, Suffix};
use twod::GridSearch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    TwoD,
    Hybrid,
    Lattice,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [Self::TwoD, Self::Hybrid, Self::Lattice];

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoD => "2d",
            Self::Hybrid => "hybrid",
            Self::Lattice => "lattice",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "2d" | "twod" | "grid" => Ok(Self::TwoD),
            "hybrid" => Ok(Self::Hybrid),
            "lattice" => Ok(Self::Lattice),
            _ => Err(format!("unknown planner `{s}` (2d, hybrid, lattice)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalMode {
    /// Goal heading must match.
    Exact,
    /// The goal heading or its opposite.
    Bidirectional,
    /// Any heading; the analytic expansion picks the shortest.
    AnyHeading,
}

/// Source of the obstacle term of the heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Cost-aware traversal with the planner's α.
    CostAware,
    /// Distance around lethal cells only (α = 0 in the heuristic).
    BinaryObstacle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    /// Weight of cell cost in the traversal cost.
    pub alpha: f64,
    /// Penalty on turning motions.
    pub beta: f64,
    /// Penalty on changing turn direction.
    pub gamma: f64,
    /// Multiplier on reversing motions.
    pub reverse_penalty: f64,
    pub turning_radius: f64,
    pub heading_bins: usize,
    /// Curve family of the analytic expansion and the turning heuristic.
    pub motion_model: MotionModel,
    pub goal_mode: GoalMode,
    /// Adds reversing primitives to the search.
    pub allow_reverse: bool,
    pub heuristic_mode: HeuristicMode,
    /// Scales the heuristic in the search order; 1 keeps it admissible.
    pub heuristic_weight: f64,
    /// Half-width in meters of the turning lookup table.
    pub lut_window: f64,
    pub footprint: Footprint,
    pub smoother: SmootherConfig,
    pub limits: SearchLimits,
    /// See [`SearchOptions::analytic_ratio`].
    pub analytic_ratio: Option<f64>,
    /// See [`SearchOptions::analytic_acceptance`].
    pub analytic_acceptance: f64,
    pub control_set_path: Option<PathBuf>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            kind: PlannerKind::Hybrid,
            alpha: 2.0,
            beta: 0.05,
            gamma: 0.05,
            reverse_penalty: 2.0,
            turning_radius: 0.4,
            heading_bins: 16,
            motion_model: MotionModel::Dubins,
            goal_mode: GoalMode::Exact,
            allow_reverse: false,
            heuristic_mode: HeuristicMode::CostAware,
            heuristic_weight: 1.0,
            // ten turning radii
            lut_window: 4.0,
            footprint: Footprint::Circle { radius: 0.2 },
            smoother: SmootherConfig::default(),
            limits: SearchLimits::default(),
            analytic_ratio: Some(3.5),
            analytic_acceptance: 1.0,
            control_set_path: None,
        }
    }
}

impl PlannerConfig {
    pub fn new(kind: PlannerKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidConfig(m.to_string()));
        if !(self.alpha >= 0.0) {
            return bad("alpha must be ≥ 0");
        }
        if !(self.beta >= 0.0 && self.gamma >= 0.0) {
            return bad("beta and gamma must be ≥ 0");
        }
        if !(self.reverse_penalty >= 1.0) {
            return bad("reverse penalty must be ≥ 1");
        }
        if !(self.turning_radius > 0.0) {
            return bad("turning radius must be positive");
        }
        if self.heading_bins < 8 {
            return bad("at least 8 heading bins are needed");
        }
        if !(self.heuristic_weight >= 1.0) {
            return bad("heuristic weight must be ≥ 1");
        }
        if !(self.analytic_acceptance >= 1.0) {
            return bad("analytic acceptance factor must be ≥ 1");
        }
        if !(self.lut_window > 0.0) {
            return bad("lookup table window must be positive");
        }
        if self.motion_model == MotionModel::ReedsShepp && !self.allow_reverse {
            return bad("Reeds-Shepp expansion needs reversing enabled");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start pose is in collision or outside the map")]
    StartInCollision,
    #[error("goal pose is in collision or outside the map")]
    GoalInCollision,
    #[error("no path exists ({expansions} expansions)")]
    NoPathExists { expansions: usize },
    #[error("planning time limit reached ({expansions} expansions)")]
    TimeLimit { expansions: usize },
    #[error("iteration limit reached ({expansions} expansions)")]
    IterationLimit { expansions: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("control set: {0}")]
    ControlSet(#[from] ControlSetError),
    #[error("lookup table: {0}")]
    Lut(#[from] LutError),
    #[error("primitives: {0}")]
    Primitives(#[from] PrimitiveError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl PlanError {
    /// Process exit code: 2 no path, 3 bad input, 4 internal failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NoPathExists { .. } | Self::TimeLimit { .. } | Self::IterationLimit { .. } => 2,
            Self::Internal(_) => 4,
            _ => 3,
        }
    }
}

impl From<SearchError> for PlanError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NoPathExists { expansions } => Self::NoPathExists { expansions },
            SearchError::TimeLimit { expansions } => Self::TimeLimit { expansions },
            SearchError::IterationLimit { expansions } => Self::IterationLimit { expansions },
            SearchError::BrokenParentChain => Self::Internal("broken parent chain".into()),
        }
    }
}

/// What produced one path edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SegmentMeta {
    pub reverse: bool,
    /// Primitive or grid move id; `None` on the analytic suffix.
    pub primitive: Option<u32>,
    /// Turn sign δ of the motion.
    pub turn: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub poses: Vec<PoseSE2>,
    /// One entry per edge, `poses.len() - 1` long.
    pub segments: Vec<SegmentMeta>,
    pub length_m: f64,
    /// Accumulated penalized traversal cost.
    pub cost_total: f64,
    pub planning_time_s: f64,
    pub expansions: usize,
}

pub const PATH_CSV_HEADER: &str = "x,y,theta,direction";

impl Path {
    pub fn from_poses(poses: Vec<PoseSE2>, segments: Vec<SegmentMeta>) -> Self {
        debug_assert_eq!(segments.len() + 1, poses.len().max(1));
        let length_m = Self::polyline_length(&poses);
        Self {
            poses,
            segments,
            length_m,
            cost_total: 0.0,
            planning_time_s: 0.0,
            expansions: 0,
        }
    }

    pub fn polyline_length(poses: &[PoseSE2]) -> f64 {
        poses.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Largest Menger curvature over consecutive triples, evaluated within
    /// runs of one driving direction (a cusp is not a curve).
    pub fn max_curvature(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.poses.len().saturating_sub(1) {
            if self.segments[k - 1].reverse != self.segments[k].reverse {
                continue;
            }
            let (a, b, c) = (&self.poses[k - 1], &self.poses[k], &self.poses[k + 1]);
            worst = worst.max(discrete_curvature((a.x, a.y), (b.x, b.y), (c.x, c.y)));
        }
        worst
    }

    /// First colliding pose, if any.
    pub fn first_collision(&self, map: &Costmap, footprint: &Footprint) -> Option<usize> {
        self.poses.iter().position(|p| collision_check(map, p, footprint))
    }

    /// CSV with columns `x,y,theta,direction`; `direction` is that of the
    /// edge arriving at the pose (the first pose takes the first edge's).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(PATH_CSV_HEADER);
        s.push('\n');
        for (k, p) in self.poses.iter().enumerate() {
            let seg = if k == 0 {
                self.segments.first()
            } else {
                self.segments.get(k - 1)
            };
            let dir = if seg.is_some_and(|m| m.reverse) {
                "reverse"
            } else {
                "forward"
            };
            let _ = writeln!(s, "{},{},{},{}", p.x, p.y, p.theta, dir);
        }
        s
    }

    /// Reads the format written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == PATH_CSV_HEADER => {}
            _ => return Err(format!("expected header `{PATH_CSV_HEADER}`")),
        }
        let mut poses = Vec::new();
        let mut dirs = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(format!("row {}: expected 4 fields", n + 1));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("row {}: bad number `{s}`", n + 1));
            poses.push(PoseSE2::new(num(f[0])?, num(f[1])?, num(f[2])?));
            dirs.push(match f[3] {
                "forward" => false,
                "reverse" => true,
                d => return Err(format!("row {}: bad direction `{d}`", n + 1)),
            });
        }
        if poses.is_empty() {
            return Err("no poses".into());
        }
        let segments = dirs[1..]
            .iter()
            .map(|&reverse| SegmentMeta {
                reverse,
                ..SegmentMeta::default()
            })
            .collect();
        Ok(Self::from_poses(poses, segments))
    }
}

/// Planner with state reused across calls.
pub struct Planner {
    config: PlannerConfig,
    cache: ObstacleHeuristicCache,
    lut: Option<NonholonomicLut>,
    control_set: Option<ControlSet>,
    /// Prepared motions and the map resolution they were built for.
    motions: Option<(f64, MotionSet)>,
}

impl Planner {
    /// Validates `config` and loads its control set for lattice planning.
    pub fn new(config: PlannerConfig) -> Result<Self, PlanError> {
        config.validate()?;
        let control_set = match (&config.kind, &config.control_set_path) {
            (PlannerKind::Lattice, Some(p)) => Some(load_control_set(p)?),
            (PlannerKind::Lattice, None) => {
                return Err(PlanError::InvalidConfig("lattice planning needs a control set".into()))
            }
            _ => None,
        };
        Ok(Self {
            config,
            cache: ObstacleHeuristicCache::new(),
            lut: None,
            control_set,
            motions: None,
        })
    }

    /// A lattice planner over an in-memory control set.
    pub fn with_control_set(mut config: PlannerConfig, cs: ControlSet) -> Result<Self, PlanError> {
        config.kind = PlannerKind::Lattice;
        config.control_set_path = None;
        config.validate()?;
        Ok(Self {
            config,
            cache: ObstacleHeuristicCache::new(),
            lut: None,
            control_set: Some(cs),
            motions: None,
        })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn heuristic_cache(&self) -> &ObstacleHeuristicCache {
        &self.cache
    }

    /// Builds the motions and the turning lookup table for `map`'s
    /// resolution ahead of the first plan, so that plan times only the
    /// search. Nothing to do for the grid planner.
    pub fn warm_up(&mut self, map: &Costmap) -> Result<(), PlanError> {
        match self.config.kind {
            PlannerKind::TwoD => Ok(()),
            _ => self.prepare(map),
        }
    }

    /// Forgets the obstacle heuristic; the next plan starts cold.
    pub fn clear_cache(&mut self) {
        self.cache = ObstacleHeuristicCache::new();
    }

    pub fn plan(&mut self, map: &Costmap, start: PoseSE2, goal: PoseSE2) -> Result<Path, PlanError> {
        let clock = Instant::now();
        let fp = self.config.footprint.clone();
        let fp = &fp;
        if collision_check(map, &start, fp) {
            return Err(PlanError::StartInCollision);
        }
        if collision_check(map, &goal, fp) {
            return Err(PlanError::GoalInCollision);
        }
        let mut path = match self.config.kind {
            PlannerKind::TwoD => self.plan_2d(map, start, goal)?,
            PlannerKind::Hybrid | PlannerKind::Lattice => self.plan_se2_mode(map, start, goal)?,
        };
        if let Some(k) = path.first_collision(map, fp) {
            return Err(PlanError::Internal(format!("planned pose {k} collides")));
        }
        if self.config.smoother.enabled {
            path = smooth(&path, map, fp, &self.config.smoother);
        }
        path.planning_time_s = clock.elapsed().as_secs_f64();
        Ok(path)
    }

    fn options(&self) -> SearchOptions {
        SearchOptions {
            limits: self.config.limits,
            analytic_ratio: self.config.analytic_ratio,
            analytic_acceptance: self.config.analytic_acceptance,
        }
    }

    fn plan_2d(&mut self, map: &Costmap, start: PoseSE2, goal: PoseSE2) -> Result<Path, PlanError> {
        let s = map
            .index_of_world(start.x, start.y)
            .ok_or(PlanError::StartInCollision)?;
        let g = map.index_of_world(goal.x, goal.y).ok_or(PlanError::GoalInCollision)?;
        let mut iface = GridSearch::new(map, &self.config.footprint, self.config.alpha, g);
        if !iface.passable(s) {
            return Err(PlanError::StartInCollision);
        }
        if !iface.passable(g) {
            return Err(PlanError::GoalInCollision);
        }
        let mut options = self.options();
        options.analytic_ratio = None;
        let res = a_star(&mut iface, s, &options)?;
        let centers: Vec<(f64, f64)> = res
            .states
            .iter()
            .map(|&idx| {
                let c = map.cell_of_index(idx);
                map.grid_to_world(c.i, c.j)
            })
            .collect();
        let n = centers.len();
        let poses: Vec<PoseSE2> = (0..n)
            .map(|k| {
                let theta = if n == 1 {
                    goal.theta
                } else {
                    let (a, b) = if k + 1 < n {
                        (centers[k], centers[k + 1])
                    } else {
                        (centers[k - 1], centers[k])
                    };
                    (b.1 - a.1).atan2(b.0 - a.0)
                };
                PoseSE2::new(centers[k].0, centers[k].1, theta)
            })
            .collect();
        let segments = res.motions[1..]
            .iter()
            .map(|m| SegmentMeta {
                reverse: false,
                primitive: *m,
                turn: 0,
            })
            .collect();
        let mut path = Path::from_poses(poses, segments);
        path.cost_total = res.total_cost;
        path.expansions = res.expansions;
        Ok(path)
    }

    /// Resolves the goal mode: bidirectional goals are planned both ways
    /// and the shorter result kept, any-heading goals additionally run a
    /// search that accepts every heading.
    fn plan_se2_mode(&mut self, map: &Costmap, start: PoseSE2, goal: PoseSE2) -> Result<Path, PlanError> {
        let flipped = PoseSE2::new(goal.x, goal.y, normalize_angle(goal.theta + std::f64::consts::PI));
        let runs: Vec<(PoseSE2, bool)> = match self.config.goal_mode {
            GoalMode::Exact => vec![(goal, true)],
            GoalMode::Bidirectional => vec![(goal, true), (flipped, true)],
            GoalMode::AnyHeading => vec![(goal, true), (flipped, true), (goal, false)],
        };
        let mut best: Option<Path> = None;
        let mut first_err = None;
        let mut expansions = 0;
        for (g, fixed) in runs {
            match self.plan_se2(map, start, g, fixed) {
                Ok(p) => {
                    expansions += p.expansions;
                    if best.as_ref().is_none_or(|b| p.length_m < b.length_m) {
                        best = Some(p);
                    }
                }
                Err(e) => {
                    // a bad input fails every run the same way
                    if e.exit_code() != 2 {
                        return Err(e);
                    }
                    first_err.get_or_insert(e);
                }
            }
        }
        match best {
            Some(mut p) => {
                p.expansions = expansions;
                Ok(p)
            }
            None => Err(first_err.expect("at least one run")),
        }
    }

    fn prepare(&mut self, map: &Costmap) -> Result<(), PlanError> {
        let res = map.resolution();
        if self.motions.as_ref().is_none_or(|(r, _)| *r != res) {
            let set = match self.config.kind {
                PlannerKind::Lattice => {
                    let cs = self.control_set.as_ref().expect("lattice planner has a control set");
                    if (cs.resolution - res).abs() > 1e-9 * res {
                        return Err(PlanError::InvalidConfig(format!(
                            "control set resolution {} differs from map resolution {res}",
                            cs.resolution
                        )));
                    }
                    if cs.turning_radius + 1e-9 < self.config.turning_radius {
                        return Err(PlanError::InvalidConfig(format!(
                            "control set turning radius {} is below the configured {}",
                            cs.turning_radius, self.config.turning_radius
                        )));
                    }
                    MotionSet::lattice(cs, self.config.allow_reverse)
                }
                _ => {
                    let prims = hybrid_primitives(
                        self.config.turning_radius,
                        res,
                        self.config.heading_bins,
                        self.config.allow_reverse,
                    )?;
                    MotionSet::hybrid(&prims, self.config.heading_bins, res)
                }
            };
            self.motions = Some((res, set));
        }
        let c = &self.config;
        let stale = self.lut.as_ref().is_none_or(|l| {
            l.model() != c.motion_model
                || l.turning_radius() != c.turning_radius
                || l.window_radius() != c.lut_window
                || l.heading_bins() != c.heading_bins
                || l.resolution() != res
        });
        if stale {
            self.lut = Some(NonholonomicLut::build(
                c.motion_model,
                c.turning_radius,
                c.lut_window,
                c.heading_bins,
                res,
            )?);
        }
        Ok(())
    }

    fn plan_se2(
        &mut self,
        map: &Costmap,
        start: PoseSE2,
        goal: PoseSE2,
        fixed_heading: bool,
    ) -> Result<Path, PlanError> {
        self.prepare(map)?;
        let (_, motions) = self.motions.as_ref().expect("prepared");
        let goal_cell = map.index_of_world(goal.x, goal.y).ok_or(PlanError::GoalInCollision)?;
        let start_heading = heading_index(motions, start.theta);
        // lattice states sit on cell centers with lattice headings
        let start_pose = match lattice_heading(motions, start_heading) {
            Some(theta) => {
                let c = map
                    .world_to_grid_checked(start.x, start.y)
                    .ok_or(PlanError::StartInCollision)?;
                let (x, y) = map.grid_to_world(c.i, c.j);
                PoseSE2::new(x, y, theta)
            }
            None => start,
        };
        if start_pose.distance(&goal) < 1e-9 && start_pose.approx_eq(&goal, 1e-9) {
            return Ok(Path::from_poses(vec![start_pose], Vec::new()));
        }
        let spec = GoalSpec {
            pose: goal,
            cell: goal_cell,
            heading: fixed_heading.then(|| heading_index(motions, goal.theta) as u16),
        };
        let options = self.options();
        let config = self.config.clone();
        let mut iface = Se2Search::new(map, &config, motions, &mut self.cache, self.lut.as_ref(), spec);
        let root = iface
            .state_at(start_pose, start_heading)
            .ok_or(PlanError::StartInCollision)?;
        let res = a_star(&mut iface, root, &options)?;
        let mut path = assemble(&iface, &res)?;
        path.cost_total = res.total_cost;
        path.expansions = res.expansions;
        Ok(path)
    }
}

fn assemble(iface: &Se2Search<'_>, res: &SearchResult<Se2State, Suffix>) -> Result<Path, PlanError> {
    let mut poses = vec![res.states[0].pose];
    let mut segments = Vec::new();
    let mut buf = Vec::new();
    for k in 1..res.states.len() {
        let id = res.motions[k].ok_or_else(|| PlanError::Internal("missing motion on path".into()))?;
        let m = &iface.motions.motions[id as usize];
        iface
            .place(&res.states[k - 1], m, &mut buf)
            .ok_or_else(|| PlanError::Internal("path motion leaves the map".into()))?;
        // a node's pose may have been replaced by a cheaper arrival whose
        // predecessor differs; re-placing from the parent keeps them in sync
        let end = buf.last().expect("samples");
        if !end.approx_eq(&res.states[k].pose, 1e-6) {
            return Err(PlanError::Internal("path motion does not reach its node".into()));
        }
        for p in &buf {
            poses.push(*p);
            segments.push(SegmentMeta {
                reverse: m.reversed,
                primitive: Some(id),
                turn: m.turn,
            });
        }
    }
    if let Some(suffix) = &res.analytic_suffix {
        for &(p, steer, reverse) in &suffix.points {
            poses.push(p);
            segments.push(SegmentMeta {
                reverse,
                primitive: None,
                turn: match steer {
                    Steer::Left => 1,
                    Steer::Straight => 0,
                    Steer::Right => -1,
                },
            });
        }
    }
    Ok(Path::from_poses(poses, segments))
}

/// Plans once with a fresh [`Planner`].
pub fn plan(map: &Costmap, start: PoseSE2, goal: PoseSE2, config: &PlannerConfig) -> Result<Path, PlanError> {
    Planner::new(config.clone())?.plan(map, start, goal)
}
