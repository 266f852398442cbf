use std::f64::consts::{PI, TAU};

use crate::gridmap::{Cell, Costmap};

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(theta: f64) -> f64 {
    // one period off is the common case; these subtractions are exact
    if (0.0..TAU).contains(&theta) {
        return theta;
    }
    if (TAU..2.0 * TAU).contains(&theta) {
        return theta - TAU;
    }
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Planar pose; `theta` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSE2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl PoseSE2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn distance(&self, other: &PoseSE2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `other` expressed in this pose's frame.
    pub fn relative(&self, other: &PoseSE2) -> PoseSE2 {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        PoseSE2::new(c * dx + s * dy, -s * dx + c * dy, other.theta - self.theta)
    }

    /// Composes a pose given in this pose's frame back into the world frame.
    pub fn compose(&self, local: &PoseSE2) -> PoseSE2 {
        let (s, c) = self.theta.sin_cos();
        PoseSE2::new(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
            self.theta + local.theta,
        )
    }

    /// Grid cell and uniform heading bin of this pose.
    pub fn quantize(&self, map: &Costmap, heading_bins: usize) -> Option<(Cell, usize)> {
        let cell = map.world_to_grid_checked(self.x, self.y)?;
        Some((cell, heading_bin(self.theta, heading_bins)))
    }

    pub fn approx_eq(&self, other: &PoseSE2, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && angle_diff(self.theta, other.theta).abs() <= tol
    }
}

/// Nearest uniform heading bin.
#[inline]
pub fn heading_bin(theta: f64, bins: usize) -> usize {
    let width = TAU / bins as f64;
    ((normalize_angle(theta) / width).round() as usize) % bins
}

/// Menger curvature of three points (inverse circumradius).
pub fn discrete_curvature(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0).hypot(b.1 - a.1);
    let bc = (c.0 - b.0).hypot(c.1 - b.1);
    let ca = (a.0 - c.0).hypot(a.1 - c.1);
    let denom = ab * bc * ca;
    if denom < 1e-15 {
        return 0.0;
    }
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    2.0 * cross.abs() / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert!((normalize_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-12);
        assert!((normalize_angle(5.0 * PI) - PI).abs() < 1e-12);
        assert!(normalize_angle(-1e-18) < TAU);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((angle_diff(TAU - 0.1, 0.1) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn relative_compose_inverse() {
        let a = PoseSE2::new(1.0, -2.0, 0.7);
        let b = PoseSE2::new(-3.0, 0.5, 4.0);
        let back = a.compose(&a.relative(&b));
        assert!(back.approx_eq(&b, 1e-12));
    }

    #[test]
    fn circle_curvature() {
        let r = 2.5;
        let p = |t: f64| (r * t.cos(), r * t.sin());
        assert!((discrete_curvature(p(0.0), p(0.1), p(0.25)) - 1.0 / r).abs() < 1e-12);
        assert_eq!(discrete_curvature((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)), 0.0);
    }

    #[test]
    fn bins() {
        assert_eq!(heading_bin(0.0, 16), 0);
        assert_eq!(heading_bin(TAU - 0.01, 16), 0);
        assert_eq!(heading_bin(PI, 16), 8);
        assert_eq!(heading_bin(PI / 8.0 * 0.49, 16), 0);
        assert_eq!(heading_bin(PI / 8.0 * 0.51, 16), 1);
    }
}
