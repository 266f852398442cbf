//! Motion primitives for the hybrid search: arcs sized by the √2-chord rule.

use std::f64::consts::{SQRT_2, TAU};

use thiserror::Error;

use super::curve::{advance, Steer};
use super::PoseSE2;

/// A short feasible motion expressed relative to its start pose.
///
/// `poses` starts at the origin with heading `start_heading` and is spaced
/// at most one map resolution apart. `turn` is the steering sign δ
/// (+1 left, -1 right, 0 straight).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPrimitive {
    pub id: usize,
    pub start_heading_bin: usize,
    pub end_heading_bin: usize,
    pub poses: Vec<PoseSE2>,
    pub length: f64,
    pub turn: i8,
    pub reversed: bool,
}

impl MotionPrimitive {
    pub fn end_pose(&self) -> PoseSE2 {
        *self.poses.last().expect("primitive has poses")
    }

    /// Builds a primitive by sampling one constant-curvature segment from
    /// the origin at heading zero.
    fn from_segment(id: usize, steer: Steer, length: f64, radius: f64, step: f64, bins: usize, bin_delta: i64) -> Self {
        let n = (length.abs() / step).ceil().max(1.0) as usize;
        let origin = PoseSE2::new(0.0, 0.0, 0.0);
        let poses = (0..=n)
            .map(|k| advance(&origin, steer, length * k as f64 / n as f64, radius))
            .collect();
        let turn = match steer {
            Steer::Left => 1,
            Steer::Straight => 0,
            Steer::Right => -1,
        };
        Self {
            id,
            start_heading_bin: 0,
            end_heading_bin: bin_delta.rem_euclid(bins as i64) as usize,
            poses,
            length: length.abs(),
            turn,
            reversed: length < 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PrimitiveError {
    #[error(
        "turning radius {radius} is too small for resolution {resolution}; minimum feasible radius is {min_radius}"
    )]
    RadiusTooSmall {
        radius: f64,
        resolution: f64,
        min_radius: f64,
    },
    #[error("need at least 8 heading bins, got {0}")]
    TooFewBins(usize),
}

/// Heading change of the basic turning primitive: the angle whose chord at
/// radius `r_min` spans √2 cells, rounded up to whole heading bins.
pub fn min_turn_angle(r_min: f64, resolution: f64, heading_bins: usize) -> Result<(f64, usize), PrimitiveError> {
    if heading_bins < 8 {
        return Err(PrimitiveError::TooFewBins(heading_bins));
    }
    // the turn must stay within a quarter circle, i.e. the chord angle ≤ π/2
    let min_radius = resolution;
    if !(r_min >= min_radius) {
        return Err(PrimitiveError::RadiusTooSmall {
            radius: r_min,
            resolution,
            min_radius,
        });
    }
    let bin = TAU / heading_bins as f64;
    let chord = 2.0 * (SQRT_2 * resolution / (2.0 * r_min)).asin();
    let steps = (chord.max(bin) / bin - 1e-9).ceil().max(1.0) as usize;
    Ok((steps as f64 * bin, steps))
}

/// Primitive set for the hybrid planner, relative to heading zero.
///
/// Contains a √2-cell straight move, left and right arcs at the minimum turn
/// angle, left and right arcs at twice that angle, and reversed copies of all
/// of them when `allow_reverse` is set.
pub fn hybrid_primitives(
    r_min: f64,
    resolution: f64,
    heading_bins: usize,
    allow_reverse: bool,
) -> Result<Vec<MotionPrimitive>, PrimitiveError> {
    let (dtheta, steps) = min_turn_angle(r_min, resolution, heading_bins)?;
    let steps = steps as i64;
    let mut specs: Vec<(Steer, f64, i64)> = vec![
        (Steer::Straight, SQRT_2 * resolution, 0),
        (Steer::Left, r_min * dtheta, steps),
        (Steer::Right, r_min * dtheta, -steps),
    ];
    if 4 * steps < heading_bins as i64 {
        specs.push((Steer::Left, 2.0 * r_min * dtheta, 2 * steps));
        specs.push((Steer::Right, 2.0 * r_min * dtheta, -2 * steps));
    }
    if allow_reverse {
        // driving backwards with left steering turns the heading clockwise
        let rev: Vec<_> = specs.iter().map(|&(s, l, d)| (s, -l, -d)).collect();
        specs.extend(rev);
    }
    Ok(specs
        .into_iter()
        .enumerate()
        .map(|(id, (steer, len, d))| MotionPrimitive::from_segment(id, steer, len, r_min, resolution, heading_bins, d))
        .collect())
}
