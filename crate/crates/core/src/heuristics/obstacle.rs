//! Cost-aware obstacle heuristic: a lazily extended 2D search from the goal.
//!
//! The search runs backwards from the goal cell and stops as soon as the
//! queried cell is closed. Its open list survives between queries, so later
//! queries resume where earlier ones stopped; a new focus cell only
//! re-prioritizes the retained frontier.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::gridmap::{Costmap, C_MAX};

/// 8-connected neighbor offsets; the first four are axis moves.
pub(crate) const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Eq. 1 traversal cost of moving `d` meters into a cell of cost `cell_cost`.
#[inline]
pub fn traversal_cost(d: f64, cell_cost: u8, alpha: f64) -> f64 {
    debug_assert!(cell_cost <= C_MAX, "lethal cells are never traversed");
    d * (1.0 + alpha * f64::from(cell_cost) / f64::from(C_MAX))
}

/// Octile distance in meters between two cells.
#[inline]
pub fn octile(a: (usize, usize), b: (usize, usize), resolution: f64) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    resolution * (dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy))
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    f: f64,
    g: f64,
    idx: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Cached cost-to-goal over the grid, keyed on (map contents, goal, α).
#[derive(Debug, Clone)]
pub struct ObstacleHeuristicCache {
    fingerprint: u64,
    width: usize,
    goal: Option<usize>,
    alpha: f64,
    cost_to_goal: Vec<f64>,
    closed: Vec<bool>,
    frontier: BinaryHeap<Entry>,
    focus: Option<usize>,
    /// Resets since creation; bumps whenever the cache is invalidated.
    generation: u64,
    expansions: usize,
}

impl Default for ObstacleHeuristicCache {
    fn default() -> Self {
        Self::new()
    }
}

impl ObstacleHeuristicCache {
    pub fn new() -> Self {
        Self {
            fingerprint: 0,
            width: 0,
            goal: None,
            alpha: f64::NAN,
            cost_to_goal: Vec::new(),
            closed: Vec::new(),
            frontier: BinaryHeap::new(),
            focus: None,
            generation: 0,
            expansions: 0,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Cells closed so far (cumulative since the last reset).
    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn goal(&self) -> Option<usize> {
        self.goal
    }

    /// Points the cache at `goal` on `map` with weight `alpha`, discarding
    /// previous work unless all three are unchanged. Returns true when the
    /// cache was reset.
    pub fn set_goal(&mut self, map: &Costmap, goal: usize, alpha: f64) -> bool {
        self.set_goal_with_fingerprint(map, map.fingerprint(), goal, alpha)
    }

    /// As [`set_goal`](Self::set_goal) with a precomputed map fingerprint.
    pub fn set_goal_with_fingerprint(&mut self, map: &Costmap, fingerprint: u64, goal: usize, alpha: f64) -> bool {
        if self.goal == Some(goal)
            && self.fingerprint == fingerprint
            && self.alpha.to_bits() == alpha.to_bits()
            && self.cost_to_goal.len() == map.len()
        {
            return false;
        }
        self.fingerprint = fingerprint;
        self.width = map.width();
        self.goal = Some(goal);
        self.alpha = alpha;
        self.cost_to_goal.clear();
        self.cost_to_goal.resize(map.len(), f64::INFINITY);
        self.closed.clear();
        self.closed.resize(map.len(), false);
        self.frontier.clear();
        self.focus = None;
        self.generation += 1;
        self.expansions = 0;
        if !map.is_lethal_index(goal) {
            self.cost_to_goal[goal] = 0.0;
            self.frontier.push(Entry {
                f: 0.0,
                g: 0.0,
                idx: goal as u32,
            });
        }
        true
    }

    fn cell(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    /// Re-prioritizes the retained frontier toward `cell`.
    pub fn focus_on(&mut self, map: &Costmap, cell: usize) {
        if self.focus == Some(cell) {
            return;
        }
        self.focus = Some(cell);
        let target = self.cell(cell);
        let res = map.resolution();
        let entries: Vec<Entry> = self.frontier.drain().collect();
        self.frontier = entries
            .into_iter()
            .filter(|e| !self.closed[e.idx as usize] && e.g <= self.cost_to_goal[e.idx as usize])
            .map(|e| Entry {
                f: e.g + octile(self.cell(e.idx as usize), target, res),
                ..e
            })
            .collect();
    }

    /// Value if already finalized.
    #[inline]
    pub fn cached(&self, cell: usize) -> Option<f64> {
        self.closed[cell].then(|| self.cost_to_goal[cell])
    }

    /// Optimal 8-connected cost from `cell` to the goal, extending the
    /// search as needed; `f64::INFINITY` when unreachable or lethal.
    pub fn query(&mut self, map: &Costmap, cell: usize) -> f64 {
        assert!(self.goal.is_some(), "set_goal must be called before querying");
        debug_assert_eq!(map.len(), self.cost_to_goal.len());
        if self.closed[cell] {
            return self.cost_to_goal[cell];
        }
        if map.is_lethal_index(cell) {
            return f64::INFINITY;
        }
        if self.focus.is_none() {
            self.focus_on(map, cell);
        }
        let target = self.cell(self.focus.expect("focus set"));
        let res = map.resolution();
        let (w, h) = (map.width() as i64, map.height() as i64);
        while let Some(e) = self.frontier.pop() {
            let idx = e.idx as usize;
            if self.closed[idx] || e.g > self.cost_to_goal[idx] {
                continue;
            }
            self.closed[idx] = true;
            self.expansions += 1;
            // robot moves from the neighbor into `idx`, paying idx's cost
            let Some(c) = map.traversal_value(idx) else {
                continue;
            };
            let (ci, cj) = self.cell(idx);
            for (k, &(dx, dy)) in NEIGHBORS.iter().enumerate() {
                let (ni, nj) = (ci as i64 + dx, cj as i64 + dy);
                if ni < 0 || nj < 0 || ni >= w || nj >= h {
                    continue;
                }
                let n = nj as usize * self.width + ni as usize;
                if self.closed[n] || map.is_lethal_index(n) {
                    continue;
                }
                let d = if k < 4 { res } else { SQRT_2 * res };
                let ng = e.g + traversal_cost(d, c, self.alpha);
                if ng < self.cost_to_goal[n] {
                    self.cost_to_goal[n] = ng;
                    let f = ng + octile((ni as usize, nj as usize), target, res);
                    self.frontier.push(Entry {
                        f,
                        g: ng,
                        idx: n as u32,
                    });
                }
            }
            if idx == cell {
                break;
            }
        }
        if self.closed[cell] {
            self.cost_to_goal[cell]
        } else {
            f64::INFINITY
        }
    }
}
