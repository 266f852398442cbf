//! Admissible cost-to-goal estimates for the SE2 planners.
//!
//! [`ObstacleHeuristicCache`] captures obstacles and soft costs but not the
//! drivetrain; [`NonholonomicLut`] captures the drivetrain but not the map.
//! The planners use the larger of the two.

mod lut;
mod obstacle;

pub use lut::{LutError, MotionModel, NonholonomicLut, DEFAULT_MAX_TABLE_BYTES};
pub(crate) use obstacle::NEIGHBORS;
pub use obstacle::{octile, traversal_cost, ObstacleHeuristicCache};

use std::f64::consts::SQRT_2;

use crate::geometry::PoseSE2;
use crate::gridmap::Costmap;

/// Ratio of Euclidean to octile distance in the worst direction; grid paths
/// can be this much longer than the continuous curves they stand in for.
pub const OCTILE_SCALE: f64 = 0.923_879_532_511_286_7;

/// Obstacle term as used against continuous paths: the grid value shrunk by
/// the octile excess and by one cell diagonal of position slack at each end.
#[inline]
pub fn continuous_obstacle_term(grid_cost: f64, resolution: f64, alpha: f64) -> f64 {
    if !grid_cost.is_finite() {
        return f64::INFINITY;
    }
    (OCTILE_SCALE * grid_cost - SQRT_2 * resolution * (1.0 + alpha)).max(0.0)
}

/// Drivetrain term: table distance from `state` to `goal`, or the straight
/// line distance when the goal lies outside the table window. Reduced by
/// one cell to cover the goal tolerance.
pub fn nonholonomic_term(state: &PoseSE2, goal: &PoseSE2, lut: Option<&NonholonomicLut>) -> f64 {
    let rel = state.relative(goal);
    let slack = lut.map_or(0.0, |l| l.resolution());
    let v = lut
        .and_then(|l| l.lookup_lower(&rel))
        .unwrap_or_else(|| rel.x.hypot(rel.y));
    (v - slack).max(0.0)
}

/// Maximum of the obstacle and drivetrain terms. The cache must already be
/// pointed at `goal`'s cell with this `alpha`.
pub fn combined_heuristic(
    state: &PoseSE2,
    goal: &PoseSE2,
    cache: &mut ObstacleHeuristicCache,
    lut: Option<&NonholonomicLut>,
    map: &Costmap,
    alpha: f64,
) -> f64 {
    debug_assert_eq!(cache.goal(), map.index_of_world(goal.x, goal.y));
    let Some(cell) = map.index_of_world(state.x, state.y) else {
        return f64::INFINITY;
    };
    let obstacle = continuous_obstacle_term(cache.query(map, cell), map.resolution(), alpha);
    obstacle.max(nonholonomic_term(state, goal, lut))
}
