//! Piecewise arc/line curves shared by the Dubins and Reeds-Shepp solvers.

use super::PoseSE2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steer {
    Left,
    Straight,
    Right,
}

/// One constant-curvature piece; negative `length` drives in reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSegment {
    pub steer: Steer,
    pub length: f64,
}

/// A sampled point along a curve; `reverse` marks backwards driving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub pose: PoseSE2,
    pub reverse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    pub start: PoseSE2,
    pub radius: f64,
    pub segments: Vec<CurveSegment>,
}

/// Pose after driving `length` (signed) with the given steering.
pub fn advance(pose: &PoseSE2, steer: Steer, length: f64, radius: f64) -> PoseSE2 {
    let (x, y, th) = (pose.x, pose.y, pose.theta);
    match steer {
        Steer::Straight => PoseSE2::new(x + length * th.cos(), y + length * th.sin(), th),
        Steer::Left => {
            let phi = length / radius;
            PoseSE2::new(
                x + radius * ((th + phi).sin() - th.sin()),
                y + radius * (th.cos() - (th + phi).cos()),
                th + phi,
            )
        }
        Steer::Right => {
            let phi = length / radius;
            PoseSE2::new(
                x + radius * (th.sin() - (th - phi).sin()),
                y + radius * ((th - phi).cos() - th.cos()),
                th - phi,
            )
        }
    }
}

impl CurvePath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length.abs()).sum()
    }

    pub fn end_pose(&self) -> PoseSE2 {
        self.segments
            .iter()
            .fold(self.start, |p, s| advance(&p, s.steer, s.length, self.radius))
    }

    pub fn has_reverse(&self) -> bool {
        self.segments.iter().any(|s| s.length < 0.0)
    }

    /// Points spaced at most `step` apart in arc length, both endpoints
    /// included.
    pub fn sample(&self, step: f64) -> Vec<PathPoint> {
        assert!(step > 0.0);
        let first_reverse = self
            .segments
            .iter()
            .find(|s| s.length.abs() > 1e-12)
            .is_some_and(|s| s.length < 0.0);
        let mut out = vec![PathPoint {
            pose: self.start,
            reverse: first_reverse,
        }];
        let mut seg_start = self.start;
        for seg in &self.segments {
            let len = seg.length.abs();
            if len <= 1e-12 {
                continue;
            }
            let n = (len / step).ceil().max(1.0) as usize;
            for k in 1..=n {
                let s = seg.length * k as f64 / n as f64;
                out.push(PathPoint {
                    pose: advance(&seg_start, seg.steer, s, self.radius),
                    reverse: seg.length < 0.0,
                });
            }
            seg_start = advance(&seg_start, seg.steer, seg.length, self.radius);
        }
        out
    }
}
