//! Single-arc trajectories between two poses: one circular arc tangent to
//! both heading lines, joined to the farther pose by a straight segment.
//!
//! The arc is as large as the geometry allows (its tangent length equals the
//! shorter of the two distances to the heading-line intersection), which
//! makes it the minimum-curvature member of the arc+line family.

use thiserror::Error;

use super::{angle_diff, PoseSE2};

type Point = (f64, f64);

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("start and end positions coincide")]
    SamePoint,
    #[error("parallel headings with a lateral offset admit no single arc")]
    ParallelOffset,
    #[error("heading lines intersect behind the start or ahead of the end")]
    NoTangentArc,
    #[error("arc radius {radius} is below the minimum turning radius {min}")]
    RadiusTooSmall { radius: f64, min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySolution {
    pub start: PoseSE2,
    pub end: PoseSE2,
    /// Heading-line intersection; `None` for the pure straight case.
    pub intersection: Option<Point>,
    pub center: Point,
    /// `f64::INFINITY` for the pure straight case.
    pub radius: f64,
    pub p_arc: Point,
    pub q_arc: Point,
    /// `(from, to)` of the straight piece, either before or after the arc.
    pub line_segment: Option<(Point, Point)>,
    pub turn_sign: i8,
    pub total_length: f64,
}

fn cross(a: Point, b: Point) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn sub(a: Point, b: Point) -> Point {
    (a.0 - b.0, a.1 - b.1)
}

fn add_scaled(a: Point, d: Point, t: f64) -> Point {
    (a.0 + t * d.0, a.1 + t * d.1)
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Arc + line from `start` to `end`, or the reason none with radius at least
/// `r_min` exists.
pub fn generate_trajectory(start: &PoseSE2, end: &PoseSE2, r_min: f64) -> Result<TrajectorySolution, TrajectoryError> {
    let p = (start.x, start.y);
    let q = (end.x, end.y);
    let chord = dist(p, q);
    if chord < 1e-12 {
        return Err(TrajectoryError::SamePoint);
    }
    let u1 = (start.theta.cos(), start.theta.sin());
    let u2 = (end.theta.cos(), end.theta.sin());
    let delta = angle_diff(end.theta, start.theta);
    let pq = sub(q, p);
    let denom = cross(u1, u2);
    if denom.abs() < 1e-12 {
        let collinear = cross(u1, pq).abs() <= 1e-9 * chord.max(1.0);
        let ahead = u1.0 * pq.0 + u1.1 * pq.1 > 0.0;
        if collinear && ahead && delta.abs() < 1e-6 {
            return Ok(TrajectorySolution {
                start: *start,
                end: *end,
                intersection: None,
                center: (f64::INFINITY, f64::INFINITY),
                radius: f64::INFINITY,
                p_arc: q,
                q_arc: q,
                line_segment: Some((p, q)),
                turn_sign: 0,
                total_length: chord,
            });
        }
        return Err(TrajectoryError::ParallelOffset);
    }
    // p + t·u1 = q + s·u2
    let t = cross(pq, u2) / denom;
    let s = cross(pq, u1) / denom;
    if t < 0.0 || s > 0.0 {
        return Err(TrajectoryError::NoTangentArc);
    }
    let i = add_scaled(p, u1, t);
    let d = t.min(-s);
    let p_arc = add_scaled(i, u1, -d);
    let q_arc = add_scaled(i, u2, d);
    let turn_sign: i8 = if delta > 0.0 { 1 } else { -1 };
    let sg = f64::from(turn_sign);
    // normals pointing toward the arc center
    let n1 = (-sg * u1.1, sg * u1.0);
    let n2 = (-sg * u2.1, sg * u2.0);
    // p_arc + λ·n1 = q_arc + μ·n2
    let lambda = cross(sub(q_arc, p_arc), n2) / cross(n1, n2);
    let center = add_scaled(p_arc, n1, lambda);
    let radius = dist(center, p_arc);
    if radius < r_min {
        return Err(TrajectoryError::RadiusTooSmall { radius, min: r_min });
    }
    let line_segment = if t - d > 1e-12 {
        Some((p, p_arc))
    } else if -s - d > 1e-12 {
        Some((q_arc, q))
    } else {
        None
    };
    let line_len = line_segment.map_or(0.0, |(a, b)| dist(a, b));
    Ok(TrajectorySolution {
        start: *start,
        end: *end,
        intersection: Some(i),
        center,
        radius,
        p_arc,
        q_arc,
        line_segment,
        turn_sign,
        total_length: line_len + radius * delta.abs(),
    })
}

/// Tangent length the paper-style bound predicts for a turn of `delta`:
/// `R / tan(ψ/2)` with `ψ = π/2 − |Δθ|`. Kept for comparison only.
pub fn published_d_min(r_min: f64, delta: f64) -> f64 {
    let psi = std::f64::consts::FRAC_PI_2 - delta.abs();
    r_min / (psi / 2.0).tan()
}

/// Tangent length of a circle of radius `r_min` tangent to two lines meeting
/// with heading change `delta`.
pub fn tangent_d_min(r_min: f64, delta: f64) -> f64 {
    r_min * (delta.abs() / 2.0).tan()
}

impl TrajectorySolution {
    fn line_before_arc(&self) -> bool {
        matches!(self.line_segment, Some((a, _)) if a == (self.start.x, self.start.y)) && self.radius.is_finite()
    }

    /// Poses spaced at most `step` apart, from start to end inclusive.
    pub fn sample(&self, step: f64) -> Vec<PoseSE2> {
        assert!(step > 0.0);
        let mut out = vec![self.start];
        let push_line = |out: &mut Vec<PoseSE2>, a: Point, b: Point, theta: f64| {
            let len = dist(a, b);
            let n = (len / step).ceil().max(1.0) as usize;
            for k in 1..=n {
                let f = k as f64 / n as f64;
                out.push(PoseSE2::new(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1), theta));
            }
        };
        if !self.radius.is_finite() {
            let (a, b) = self.line_segment.expect("straight solution");
            push_line(&mut out, a, b, self.start.theta);
            *out.last_mut().unwrap() = self.end;
            return out;
        }
        if self.line_before_arc() {
            push_line(&mut out, (self.start.x, self.start.y), self.p_arc, self.start.theta);
        }
        let delta = angle_diff(self.end.theta, self.start.theta);
        let arc_len = self.radius * delta.abs();
        let n = (arc_len / step).ceil().max(1.0) as usize;
        // the arc point rotates about the center by the same signed angle as the heading
        let phi0 = (self.p_arc.1 - self.center.1).atan2(self.p_arc.0 - self.center.0);
        for k in 1..=n {
            let a = delta * k as f64 / n as f64;
            let phi = phi0 + a;
            out.push(PoseSE2::new(
                self.center.0 + self.radius * phi.cos(),
                self.center.1 + self.radius * phi.sin(),
                self.start.theta + a,
            ));
        }
        if let Some((a, b)) = self.line_segment.filter(|_| !self.line_before_arc()) {
            push_line(&mut out, a, b, self.end.theta);
        }
        *out.last_mut().unwrap() = self.end;
        out
    }
}
