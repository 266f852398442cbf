//! Search over SE2 poses, shared by the hybrid and lattice planners.
//!
//! Both expand precomputed motions and differ only in how a motion is
//! placed: hybrid motions are rotated onto the continuous parent pose,
//! lattice motions are translated between cell centers.

use std::f64::consts::{PI, SQRT_2, TAU};

use super::cost::{apply_penalties, sample_cost};
use super::{HeuristicMode, PlannerConfig};
use crate::geometry::{
    advance, dubins_path, heading_bin, reeds_shepp_path, CurvePath, MotionPrimitive, PoseSE2, Steer,
};
use crate::gridmap::{collision_check, Costmap};
use crate::heuristics::{
    continuous_obstacle_term, nonholonomic_term, MotionModel, NonholonomicLut, ObstacleHeuristicCache,
};
use crate::lattice::ControlSet;
use crate::search::{AnalyticExpansion, NodeInterface, Successor};

/// A motion ready for expansion.
#[derive(Debug, Clone)]
pub(crate) struct PreparedMotion {
    /// Sample poses, first one at the motion's origin. Hybrid motions are in
    /// the frame of a heading-zero start; lattice motions are world offsets.
    pub poses: Vec<PoseSE2>,
    /// Arc length between consecutive samples.
    pub steps: Vec<f64>,
    pub turn: i8,
    pub reversed: bool,
    pub end_heading: usize,
    /// End cell offset (lattice only).
    pub end_offset: (i64, i64),
}

impl PreparedMotion {
    fn from_primitive(p: &MotionPrimitive, end_offset: (i64, i64)) -> Self {
        let chords: Vec<f64> = p.poses.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let total: f64 = chords.iter().sum();
        let steps = chords
            .iter()
            .map(|c| if total > 0.0 { p.length * c / total } else { 0.0 })
            .collect();
        Self {
            poses: p.poses.clone(),
            steps,
            turn: p.turn,
            reversed: p.reversed,
            end_heading: p.end_heading_bin,
            end_offset,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum MotionKind {
    Hybrid,
    Lattice { headings: Vec<f64> },
}

#[derive(Debug, Clone)]
pub(crate) struct MotionSet {
    pub kind: MotionKind,
    pub motions: Vec<PreparedMotion>,
    /// Motion ids usable from each heading (lattice); hybrid uses all.
    pub by_heading: Vec<Vec<u32>>,
    pub bins: usize,
    pub mean_length: f64,
}

impl MotionSet {
    pub fn hybrid(prims: &[MotionPrimitive], bins: usize, resolution: f64) -> Self {
        let motions: Vec<PreparedMotion> = prims
            .iter()
            .map(|p| PreparedMotion::from_primitive(p, (0, 0)))
            .collect();
        Self {
            kind: MotionKind::Hybrid,
            by_heading: Vec::new(),
            motions,
            bins,
            mean_length: SQRT_2 * resolution,
        }
    }

    /// Lattice motions, with reversed copies of every primitive when
    /// `allow_reverse` is set: driving primitive `p` backwards from heading
    /// `h` traces the path `p` takes from `h + π`.
    pub fn lattice(cs: &ControlSet, allow_reverse: bool) -> Self {
        let bins = cs.heading_bins();
        let mut motions: Vec<PreparedMotion> = cs
            .primitives
            .iter()
            .map(|p| PreparedMotion::from_primitive(p, cs.end_offset(p)))
            .collect();
        if allow_reverse {
            for p in &cs.primitives {
                let mut m = PreparedMotion::from_primitive(p, cs.end_offset(p));
                for q in &mut m.poses {
                    q.theta += PI;
                }
                m.end_heading = (p.end_heading_bin + bins / 2) % bins;
                m.reversed = !p.reversed;
                m.turn = -p.turn;
                motions.push(m);
            }
        }
        let n = cs.primitives.len();
        let mut by_heading = vec![Vec::new(); bins];
        for (id, p) in cs.primitives.iter().enumerate() {
            by_heading[p.start_heading_bin].push(id as u32);
            if allow_reverse {
                by_heading[(p.start_heading_bin + bins / 2) % bins].push((n + id) as u32);
            }
        }
        Self {
            kind: MotionKind::Lattice {
                headings: cs.headings.clone(),
            },
            motions,
            by_heading,
            bins,
            mean_length: cs.mean_length(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Se2State {
    pub pose: PoseSE2,
    pub heading: u16,
    pub cell: u32,
}

/// A sampled analytic suffix.
#[derive(Debug, Clone)]
pub(crate) struct Suffix {
    /// Samples after the joining pose, with the steering and direction of
    /// the step that reaches each.
    pub points: Vec<(PoseSE2, Steer, bool)>,
    pub length: f64,
}

pub(crate) struct GoalSpec {
    pub pose: PoseSE2,
    pub cell: usize,
    /// Required heading (bin or lattice index); `None` accepts any.
    pub heading: Option<u16>,
}

pub(crate) struct Se2Search<'a> {
    pub map: &'a Costmap,
    pub cfg: &'a PlannerConfig,
    pub motions: &'a MotionSet,
    pub cache: &'a mut ObstacleHeuristicCache,
    pub lut: Option<&'a NonholonomicLut>,
    pub goal: GoalSpec,
    pub heuristic_alpha: f64,
    scratch: Vec<PoseSE2>,
}

impl<'a> Se2Search<'a> {
    pub fn new(
        map: &'a Costmap,
        cfg: &'a PlannerConfig,
        motions: &'a MotionSet,
        cache: &'a mut ObstacleHeuristicCache,
        lut: Option<&'a NonholonomicLut>,
        goal: GoalSpec,
    ) -> Self {
        let heuristic_alpha = match cfg.heuristic_mode {
            HeuristicMode::CostAware => cfg.alpha,
            HeuristicMode::BinaryObstacle => 0.0,
        };
        cache.set_goal(map, goal.cell, heuristic_alpha);
        Self {
            map,
            cfg,
            motions,
            cache,
            lut,
            goal,
            heuristic_alpha,
            scratch: Vec::new(),
        }
    }

    pub fn state_at(&self, pose: PoseSE2, heading: usize) -> Option<Se2State> {
        let cell = self.map.index_of_world(pose.x, pose.y)?;
        Some(Se2State {
            pose,
            heading: heading as u16,
            cell: cell as u32,
        })
    }

    /// World poses of motion `m` applied at `s`, excluding `s` itself.
    /// `None` when the motion leaves the map.
    pub fn place(&self, s: &Se2State, m: &PreparedMotion, out: &mut Vec<PoseSE2>) -> Option<()> {
        out.clear();
        match self.motions.kind {
            MotionKind::Hybrid => {
                let (sn, cs) = s.pose.theta.sin_cos();
                out.extend(m.poses[1..].iter().map(|q| {
                    PoseSE2::new(
                        s.pose.x + cs * q.x - sn * q.y,
                        s.pose.y + sn * q.x + cs * q.y,
                        s.pose.theta + q.theta,
                    )
                }));
            }
            MotionKind::Lattice { .. } => {
                out.extend(
                    m.poses[1..]
                        .iter()
                        .map(|q| PoseSE2::new(s.pose.x + q.x, s.pose.y + q.y, q.theta)),
                );
                // land exactly on the end cell center
                let c = self.map.cell_of_index(s.cell as usize);
                let (i, j) = (c.i as i64 + m.end_offset.0, c.j as i64 + m.end_offset.1);
                if i < 0 || j < 0 || i >= self.map.width() as i64 || j >= self.map.height() as i64 {
                    return None;
                }
                let (x, y) = self.map.grid_to_world(i as usize, j as usize);
                let last = out.last_mut().expect("motion has samples");
                last.x = x;
                last.y = y;
            }
        }
        Some(())
    }

    fn collides(&self, p: &PoseSE2) -> bool {
        collision_check(self.map, p, &self.cfg.footprint)
    }

    /// Eq. 1 cost of a sampled stretch, `None` on collision.
    fn stretch_cost(&self, poses: &[PoseSE2], steps: &[f64]) -> Option<f64> {
        let mut c = 0.0;
        for (p, &d) in poses.iter().zip(steps) {
            if self.collides(p) {
                return None;
            }
            c += sample_cost(self.map, p.x, p.y, d, self.cfg.alpha)?;
        }
        Some(c)
    }

    fn heuristic_to(&mut self, s: &Se2State, goal: &PoseSE2, with_turning: bool) -> f64 {
        let grid = self.cache.query(self.map, s.cell as usize);
        let obstacle = continuous_obstacle_term(grid, self.map.resolution(), self.heuristic_alpha);
        if !with_turning {
            return obstacle;
        }
        obstacle.max(nonholonomic_term(&s.pose, goal, self.lut))
    }

    fn curve_to(&self, from: &PoseSE2, to: &PoseSE2) -> CurvePath {
        match self.cfg.motion_model {
            MotionModel::Dubins => dubins_path(from, to, self.cfg.turning_radius),
            MotionModel::ReedsShepp => reeds_shepp_path(from, to, self.cfg.turning_radius),
        }
    }

    /// Samples a curve at map resolution and prices it; `None` on collision.
    fn price_curve(&self, curve: &CurvePath) -> Option<(Suffix, f64)> {
        let step = self.map.resolution();
        let mut points = Vec::new();
        let mut cost = 0.0;
        let mut at = curve.start;
        for seg in &curve.segments {
            let len = seg.length.abs();
            if len <= 1e-12 {
                continue;
            }
            let n = (len / step).ceil().max(1.0) as usize;
            let reverse = seg.length < 0.0;
            for k in 1..=n {
                let p = advance(&at, seg.steer, seg.length * k as f64 / n as f64, curve.radius);
                if self.collides(&p) {
                    return None;
                }
                let c = sample_cost(self.map, p.x, p.y, len / n as f64, self.cfg.alpha)?;
                cost += if reverse { c * self.cfg.reverse_penalty } else { c };
                points.push((p, seg.steer, reverse));
            }
            at = advance(&at, seg.steer, seg.length, curve.radius);
        }
        Some((
            Suffix {
                points,
                length: curve.length(),
            },
            cost,
        ))
    }

    /// Analytic expansion toward the goal position at heading `theta`.
    fn analytic_to(&mut self, s: &Se2State, theta: f64, h: f64) -> Option<(Suffix, f64)> {
        let goal = PoseSE2::new(self.goal.pose.x, self.goal.pose.y, theta);
        let curve = self.curve_to(&s.pose, &goal);
        let (suffix, cost) = self.price_curve(&curve)?;
        // reject shortcuts that are much dearer than the estimate, e.g.
        // straight through a high-cost region; one cell of slack absorbs
        // quantization near the goal
        let slack = SQRT_2 * self.map.resolution() * (1.0 + self.cfg.alpha);
        (cost <= 2.0 * h + slack).then_some((suffix, cost))
    }
}

impl NodeInterface for Se2Search<'_> {
    type State = Se2State;
    type Suffix = Suffix;

    fn key(&self, s: &Se2State) -> u64 {
        s.cell as u64 * self.motions.bins as u64 + s.heading as u64
    }

    fn dense_key_space(&self) -> Option<usize> {
        let n = self.map.len() * self.motions.bins;
        (n <= 1 << 23).then_some(n)
    }

    fn neighbors(&mut self, s: &Se2State, motion: Option<u32>, out: &mut Vec<Successor<Se2State>>) {
        let prev_turn = motion.map_or(0, |m| self.motions.motions[m as usize].turn);
        let mut poses = std::mem::take(&mut self.scratch);
        let count = match self.motions.kind {
            MotionKind::Hybrid => self.motions.motions.len(),
            MotionKind::Lattice { .. } => self.motions.by_heading[s.heading as usize].len(),
        };
        for k in 0..count {
            let id = match self.motions.kind {
                MotionKind::Hybrid => k as u32,
                MotionKind::Lattice { .. } => self.motions.by_heading[s.heading as usize][k],
            };
            let m = &self.motions.motions[id as usize];
            if self.place(s, m, &mut poses).is_none() {
                continue;
            }
            let Some(c) = self.stretch_cost(&poses, &m.steps) else {
                continue;
            };
            let end = *poses.last().expect("motion has samples");
            let heading = match self.motions.kind {
                MotionKind::Hybrid => heading_bin(end.theta, self.motions.bins),
                MotionKind::Lattice { .. } => m.end_heading,
            };
            let Some(next) = self.state_at(end, heading) else {
                continue;
            };
            let cost = apply_penalties(
                c,
                m.turn,
                prev_turn,
                m.reversed,
                self.cfg.beta,
                self.cfg.gamma,
                self.cfg.reverse_penalty,
            );
            out.push(Successor {
                state: next,
                cost,
                motion: id,
            });
        }
        self.scratch = poses;
    }

    fn heuristic(&mut self, s: &Se2State) -> f64 {
        let goal = self.goal.pose;
        let h = self.heuristic_to(s, &goal, self.goal.heading.is_some());
        h * self.cfg.heuristic_weight
    }

    fn is_goal(&self, s: &Se2State) -> bool {
        s.cell as usize == self.goal.cell && self.goal.heading.is_none_or(|h| h == s.heading)
    }

    fn try_analytic_expansion(&mut self, s: &Se2State) -> Option<AnalyticExpansion<Suffix>> {
        let goal = self.goal.pose;
        let h = self.heuristic_to(s, &goal, self.goal.heading.is_some());
        let pick = |a: Option<(Suffix, f64)>, b: Option<(Suffix, f64)>| match (a, b) {
            (Some(a), Some(b)) => Some(if b.0.length < a.0.length { b } else { a }),
            (a, None) => a,
            (None, b) => b,
        };
        let best = if self.goal.heading.is_some() {
            self.analytic_to(s, goal.theta, h)
        } else {
            // coarse sweep over every fourth bin, then refine around the best
            let n = self.cfg.heading_bins;
            let bin = TAU / n as f64;
            let mut best: Option<(Suffix, f64)> = None;
            let mut best_k = None;
            for k in (0..n).step_by(4) {
                let cand = self.analytic_to(s, goal.theta + k as f64 * bin, h);
                let better = match (&cand, &best) {
                    (Some(c), Some(b)) => c.0.length < b.0.length,
                    (Some(_), None) => true,
                    _ => false,
                };
                if better {
                    best_k = Some(k);
                }
                best = pick(best, cand);
            }
            if let Some(k) = best_k {
                for dk in [n - 1, 1] {
                    let cand = self.analytic_to(s, goal.theta + ((k + dk) % n) as f64 * bin, h);
                    best = pick(best, cand);
                }
            }
            best
        };
        best.map(|(suffix, cost)| AnalyticExpansion { suffix, cost })
    }

    fn reopen_closed(&self) -> bool {
        false
    }

    fn primitive_length(&self) -> f64 {
        self.motions.mean_length
    }
}

/// Uniform-bin or lattice heading index of an orientation.
pub(crate) fn heading_index(motions: &MotionSet, theta: f64) -> usize {
    match &motions.kind {
        MotionKind::Hybrid => heading_bin(theta, motions.bins),
        MotionKind::Lattice { headings } => crate::lattice::nearest_heading(headings, theta),
    }
}

/// Lattice heading value for an index (lattice only).
pub(crate) fn lattice_heading(motions: &MotionSet, idx: usize) -> Option<f64> {
    match &motions.kind {
        MotionKind::Hybrid => None,
        MotionKind::Lattice { headings } => Some(headings[idx]),
    }
}
