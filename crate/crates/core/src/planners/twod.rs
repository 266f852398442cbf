//! Cost-aware 8-connected grid search.

use std::f64::consts::SQRT_2;

use crate::geometry::PoseSE2;
use crate::gridmap::{collision_check, Costmap, Footprint};
use crate::heuristics::{octile, traversal_cost, NEIGHBORS};
use crate::search::{NodeInterface, Successor};

pub(crate) struct GridSearch<'a> {
    pub map: &'a Costmap,
    pub alpha: f64,
    pub goal: usize,
    pub footprint: &'a Footprint,
}

impl<'a> GridSearch<'a> {
    pub fn new(map: &'a Costmap, footprint: &'a Footprint, alpha: f64, goal: usize) -> Self {
        Self {
            map,
            alpha,
            goal,
            footprint,
        }
    }

    /// The footprint fits at the cell center.
    pub fn passable(&self, idx: usize) -> bool {
        if self.map.traversal_value(idx).is_none() {
            return false;
        }
        let c = self.map.cell_of_index(idx);
        let (x, y) = self.map.grid_to_world(c.i, c.j);
        !collision_check(self.map, &PoseSE2::new(x, y, 0.0), self.footprint)
    }

    fn cell(&self, idx: usize) -> (usize, usize) {
        (idx % self.map.width(), idx / self.map.width())
    }
}

impl NodeInterface for GridSearch<'_> {
    type State = usize;
    type Suffix = ();

    fn key(&self, state: &usize) -> u64 {
        *state as u64
    }

    fn dense_key_space(&self) -> Option<usize> {
        Some(self.map.len())
    }

    fn neighbors(&mut self, state: &usize, _motion: Option<u32>, out: &mut Vec<Successor<usize>>) {
        let (w, h) = (self.map.width() as i64, self.map.height() as i64);
        let (i, j) = self.cell(*state);
        let res = self.map.resolution();
        for (k, &(dx, dy)) in NEIGHBORS.iter().enumerate() {
            let (ni, nj) = (i as i64 + dx, j as i64 + dy);
            if ni < 0 || nj < 0 || ni >= w || nj >= h {
                continue;
            }
            let n = nj as usize * self.map.width() + ni as usize;
            if !self.passable(n) {
                continue;
            }
            let c = self.map.traversal_value(n).expect("passable cells are not lethal");
            let d = if k < 4 { res } else { SQRT_2 * res };
            out.push(Successor {
                state: n,
                cost: traversal_cost(d, c, self.alpha),
                motion: k as u32,
            });
        }
    }

    fn heuristic(&mut self, state: &usize) -> f64 {
        octile(self.cell(*state), self.cell(self.goal), self.map.resolution())
    }

    fn is_goal(&self, state: &usize) -> bool {
        *state == self.goal
    }
}
