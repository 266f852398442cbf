//! Traversal cost accounting shared by the planners.

use crate::gridmap::{Costmap, C_MAX};
use crate::heuristics::traversal_cost;

/// Eq. 2 turning penalties followed by the reverse multiplier.
///
/// `delta` and `delta_prev` are turn signs (+1 left, -1 right, 0 straight)
/// of this motion and the one before it. Straight motion is never penalized;
/// a turn pays `β` and, when its sign differs from the previous motion's
/// (including a turn out of straight motion), `γ` as well.
#[inline]
pub fn apply_penalties(
    c: f64,
    delta: i8,
    delta_prev: i8,
    reversed: bool,
    beta: f64,
    gamma: f64,
    reverse_penalty: f64,
) -> f64 {
    let c = if delta == 0 {
        c
    } else if delta.signum() == delta_prev.signum() {
        (1.0 + beta) * c
    } else {
        (1.0 + beta + gamma) * c
    };
    if reversed {
        c * reverse_penalty
    } else {
        c
    }
}

/// Eq. 1 cost of entering the cell under `(x, y)` after `d` meters, or
/// `None` when the cell is lethal or off the map.
#[inline]
pub fn sample_cost(map: &Costmap, x: f64, y: f64, d: f64, alpha: f64) -> Option<f64> {
    let idx = map.index_of_world(x, y)?;
    let c = map.traversal_value(idx)?;
    debug_assert!(c <= C_MAX);
    Some(traversal_cost(d, c, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_cases() {
        let p = |d, dp, r| apply_penalties(2.0, d, dp, r, 0.05, 0.05, 2.0);
        assert_eq!(p(0, 1, false), 2.0);
        assert_eq!(p(0, 0, false), 2.0);
        assert!((p(1, 1, false) - 2.1).abs() < 1e-12);
        assert!((p(-1, -1, false) - 2.1).abs() < 1e-12);
        assert!((p(1, -1, false) - 2.2).abs() < 1e-12);
        assert!((p(1, 0, false) - 2.2).abs() < 1e-12);
        assert!((p(0, 0, true) - 4.0).abs() < 1e-12);
        assert!((p(-1, 1, true) - 4.4).abs() < 1e-12);
    }

    #[test]
    fn zero_penalties_are_identity() {
        for d in [-1, 0, 1] {
            for dp in [-1, 0, 1] {
                assert_eq!(apply_penalties(1.5, d, dp, false, 0.0, 0.0, 1.0), 1.5);
            }
        }
    }
}
