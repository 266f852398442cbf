//! Forward-only shortest paths with bounded curvature (the six Dubins words).

use std::f64::consts::TAU;

use super::curve::{CurvePath, CurveSegment, Steer};
use super::PoseSE2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [Self::Lsl, Self::Rsr, Self::Lsr, Self::Rsl, Self::Rlr, Self::Lrl];

    fn steers(self) -> [Steer; 3] {
        use Steer::*;
        match self {
            Self::Lsl => [Left, Straight, Left],
            Self::Rsr => [Right, Straight, Right],
            Self::Lsr => [Left, Straight, Right],
            Self::Rsl => [Right, Straight, Left],
            Self::Rlr => [Right, Left, Right],
            Self::Lrl => [Left, Right, Left],
        }
    }
}

/// Angle in `[0, 2π)`, with values a hair below 2π snapped to 0 so
/// round-off never turns a zero-length arc into a full loop.
fn mod2pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if TAU - t < 1e-10 {
        0.0
    } else {
        t
    }
}

struct Normalized {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    c_ab: f64,
}

/// Normalized segment parameters `(t, p, q)` for one word, if it exists.
fn word_params(word: DubinsWord, n: &Normalized) -> Option<[f64; 3]> {
    let Normalized {
        alpha,
        beta,
        d,
        sa,
        sb,
        ca,
        cb,
        c_ab,
    } = *n;
    match word {
        DubinsWord::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            (p_sq >= 0.0).then(|| {
                let tmp = (cb - ca).atan2(d + sa - sb);
                [mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)]
            })
        }
        DubinsWord::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            (p_sq >= 0.0).then(|| {
                let tmp = (ca - cb).atan2(d - sa + sb);
                [mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)]
            })
        }
        DubinsWord::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            (p_sq >= 0.0).then(|| {
                let p = p_sq.sqrt();
                let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
                [mod2pi(tmp - alpha), p, mod2pi(tmp - beta)]
            })
        }
        DubinsWord::Rsl => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
            (p_sq >= 0.0).then(|| {
                let p = p_sq.sqrt();
                let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
                [mod2pi(alpha - tmp), p, mod2pi(beta - tmp)]
            })
        }
        DubinsWord::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            (tmp.abs() <= 1.0).then(|| {
                let phi = (ca - cb).atan2(d - sa + sb);
                let p = mod2pi(TAU - tmp.acos());
                let t = mod2pi(alpha - phi + p / 2.0);
                [t, p, mod2pi(alpha - beta - t + p)]
            })
        }
        DubinsWord::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            (tmp.abs() <= 1.0).then(|| {
                let phi = (ca - cb).atan2(d + sa - sb);
                let p = mod2pi(TAU - tmp.acos());
                let t = mod2pi(-alpha - phi + p / 2.0);
                [t, p, mod2pi(beta - alpha - t + p)]
            })
        }
    }
}

fn normalize(a: &PoseSE2, b: &PoseSE2, radius: f64) -> Normalized {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let d = dx.hypot(dy) / radius;
    let theta = if d > 0.0 { mod2pi(dy.atan2(dx)) } else { 0.0 };
    let alpha = mod2pi(a.theta - theta);
    let beta = mod2pi(b.theta - theta);
    Normalized {
        alpha,
        beta,
        d,
        sa: alpha.sin(),
        sb: beta.sin(),
        ca: alpha.cos(),
        cb: beta.cos(),
        c_ab: (alpha - beta).cos(),
    }
}

/// Every existing Dubins word between two poses with its path.
pub fn dubins_candidates(a: &PoseSE2, b: &PoseSE2, radius: f64) -> Vec<(DubinsWord, CurvePath)> {
    assert!(radius > 0.0, "turning radius must be positive");
    let n = normalize(a, b, radius);
    DubinsWord::ALL
        .iter()
        .filter_map(|&w| {
            word_params(w, &n).map(|params| {
                let segments = w
                    .steers()
                    .iter()
                    .zip(params)
                    .map(|(&steer, v)| CurveSegment {
                        steer,
                        length: v * radius,
                    })
                    .collect();
                (
                    w,
                    CurvePath {
                        start: *a,
                        radius,
                        segments,
                    },
                )
            })
        })
        .collect()
}

/// Shortest forward-only path from `a` to `b`.
pub fn dubins_path(a: &PoseSE2, b: &PoseSE2, radius: f64) -> CurvePath {
    if a.distance(b) < 1e-12 && super::angle_diff(a.theta, b.theta).abs() < 1e-12 {
        return CurvePath {
            start: *a,
            radius,
            segments: Vec::new(),
        };
    }
    dubins_candidates(a, b, radius)
        .into_iter()
        .map(|(_, p)| p)
        .min_by(|x, y| x.length().total_cmp(&y.length()))
        .expect("LSL or RSR always exists")
}

pub fn dubins_distance(a: &PoseSE2, b: &PoseSE2, radius: f64) -> f64 {
    dubins_path(a, b, radius).length()
}
