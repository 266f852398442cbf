//! Shortest bounded-curvature paths allowing reverse motion.
//!
//! Solved in the start frame scaled to unit radius using the classic
//! 48-path formulation (time-flip and reflection of 12 base families).

use std::f64::consts::{FRAC_PI_2, PI};

use super::curve::{CurvePath, CurveSegment, Steer};
use super::PoseSE2;

const ZERO: f64 = 10.0 * f64::EPSILON;

/// Angle wrapped to `(-π, π]`.
fn wrap(x: f64) -> f64 {
    let v = x % (2.0 * PI);
    if v < -PI {
        v + 2.0 * PI
    } else if v > PI {
        v - 2.0 * PI
    } else {
        v
    }
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = wrap(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { wrap(t1 + PI) } else { wrap(t1) };
    (tau, wrap(tau - u + v - phi))
}

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = wrap(phi - t);
        if v >= -ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let t = wrap(t1 + 2.0f64.atan2(u));
        let v = wrap(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u1, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = wrap(theta + 0.5 * u + PI);
        let v = wrap(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (xi, eta) = (x + phi.sin(), y - 1.0 - phi.cos());
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (xi, eta) = (x + phi.sin(), y - 1.0 - phi.cos());
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -0.5 * PI {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some([t, u, v]);
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (rho, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = wrap(theta + r.atan2(-2.0));
        let v = wrap(phi - 0.5 * PI - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (xi, eta) = (x + phi.sin(), y - 1.0 - phi.cos());
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = wrap(t + 0.5 * PI - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (xi, eta) = (x + phi.sin(), y - 1.0 - phi.cos());
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = wrap(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = wrap(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some([t, u, v]);
            }
        }
    }
    None
}

use Steer::{Left as L, Right as R, Straight as S};

/// A candidate word: steering letters and signed unit-radius lengths.
#[derive(Debug, Clone)]
pub struct RsWord {
    pub steers: Vec<Steer>,
    pub lengths: Vec<f64>,
}

impl RsWord {
    pub fn length(&self) -> f64 {
        self.lengths.iter().map(|v| v.abs()).sum()
    }
}

/// Applies a base family under the four time-flip/reflection transforms.
/// `emit` maps the base solution to signed segment lengths; time-flipped
/// variants negate every length.
fn four_ways<F, G>(out: &mut Vec<RsWord>, x: f64, y: f64, phi: f64, solve: F, steers: [&[Steer]; 2], emit: G)
where
    F: Fn(f64, f64, f64) -> Option<[f64; 3]>,
    G: Fn([f64; 3]) -> Vec<f64>,
{
    let neg = |v: Vec<f64>| v.into_iter().map(|a| -a).collect::<Vec<_>>();
    if let Some(p) = solve(x, y, phi) {
        out.push(RsWord {
            steers: steers[0].to_vec(),
            lengths: emit(p),
        });
    }
    if let Some(p) = solve(-x, y, -phi) {
        out.push(RsWord {
            steers: steers[0].to_vec(),
            lengths: neg(emit(p)),
        });
    }
    if let Some(p) = solve(x, -y, -phi) {
        out.push(RsWord {
            steers: steers[1].to_vec(),
            lengths: emit(p),
        });
    }
    if let Some(p) = solve(-x, -y, phi) {
        out.push(RsWord {
            steers: steers[1].to_vec(),
            lengths: neg(emit(p)),
        });
    }
}

/// All candidate words for a unit-radius goal `(x, y, phi)` relative to the
/// origin.
pub fn unit_candidates(x: f64, y: f64, phi: f64) -> Vec<RsWord> {
    let mut out = Vec::with_capacity(48);
    let h = FRAC_PI_2;
    // CSC
    four_ways(&mut out, x, y, phi, lp_sp_lp, [&[L, S, L], &[R, S, R]], |p| p.to_vec());
    four_ways(&mut out, x, y, phi, lp_sp_rp, [&[L, S, R], &[R, S, L]], |p| p.to_vec());
    // CCC, forwards and backwards
    let xb = x * phi.cos() + y * phi.sin();
    let yb = x * phi.sin() - y * phi.cos();
    four_ways(&mut out, x, y, phi, lp_rm_l, [&[L, R, L], &[R, L, R]], |p| p.to_vec());
    four_ways(&mut out, xb, yb, phi, lp_rm_l, [&[L, R, L], &[R, L, R]], |[t, u, v]| {
        vec![v, u, t]
    });
    // CCCC
    four_ways(
        &mut out,
        x,
        y,
        phi,
        lp_rup_lum_rm,
        [&[L, R, L, R], &[R, L, R, L]],
        |[t, u, v]| vec![t, u, -u, v],
    );
    four_ways(
        &mut out,
        x,
        y,
        phi,
        lp_rum_lum_rp,
        [&[L, R, L, R], &[R, L, R, L]],
        |[t, u, v]| vec![t, u, u, v],
    );
    // CCSC and its mirror CSCC
    four_ways(
        &mut out,
        x,
        y,
        phi,
        lp_rm_sm_lm,
        [&[L, R, S, L], &[R, L, S, R]],
        |[t, u, v]| vec![t, -h, u, v],
    );
    four_ways(
        &mut out,
        x,
        y,
        phi,
        lp_rm_sm_rm,
        [&[L, R, S, R], &[R, L, S, L]],
        |[t, u, v]| vec![t, -h, u, v],
    );
    four_ways(
        &mut out,
        xb,
        yb,
        phi,
        lp_rm_sm_lm,
        [&[L, S, R, L], &[R, S, L, R]],
        |[t, u, v]| vec![v, u, -h, t],
    );
    four_ways(
        &mut out,
        xb,
        yb,
        phi,
        lp_rm_sm_rm,
        [&[R, S, R, L], &[L, S, L, R]],
        |[t, u, v]| vec![v, u, -h, t],
    );
    // CCSCC
    four_ways(
        &mut out,
        x,
        y,
        phi,
        lp_rm_s_lm_rp,
        [&[L, R, S, L, R], &[R, L, S, R, L]],
        |[t, u, v]| vec![t, -h, u, -h, v],
    );
    out
}

/// Every candidate word between two poses, as curves at `radius`.
pub fn reeds_shepp_candidates(a: &PoseSE2, b: &PoseSE2, radius: f64) -> Vec<CurvePath> {
    assert!(radius > 0.0, "turning radius must be positive");
    let rel = a.relative(b);
    let phi = super::angle_diff(b.theta, a.theta);
    unit_candidates(rel.x / radius, rel.y / radius, phi)
        .into_iter()
        .map(|w| to_curve(a, radius, &w))
        .collect()
}

fn to_curve(a: &PoseSE2, radius: f64, w: &RsWord) -> CurvePath {
    let segments = w
        .steers
        .iter()
        .zip(&w.lengths)
        .filter(|(_, &v)| v.abs() > 1e-12)
        .map(|(&steer, &v)| CurveSegment {
            steer,
            length: v * radius,
        })
        .collect();
    CurvePath {
        start: *a,
        radius,
        segments,
    }
}

/// Shortest path from `a` to `b` when reversing is allowed.
pub fn reeds_shepp_path(a: &PoseSE2, b: &PoseSE2, radius: f64) -> CurvePath {
    assert!(radius > 0.0, "turning radius must be positive");
    let rel = a.relative(b);
    let phi = super::angle_diff(b.theta, a.theta);
    let best = unit_candidates(rel.x / radius, rel.y / radius, phi)
        .into_iter()
        .min_by(|p, q| p.length().total_cmp(&q.length()));
    match best {
        Some(w) => to_curve(a, radius, &w),
        // The families are complete; only reached at exactly coincident poses.
        None => CurvePath {
            start: *a,
            radius,
            segments: Vec::new(),
        },
    }
}

pub fn reeds_shepp_distance(a: &PoseSE2, b: &PoseSE2, radius: f64) -> f64 {
    reeds_shepp_path(a, b, radius).length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dubins_distance;

    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
        fn pose(&mut self, span: f64) -> PoseSE2 {
            PoseSE2::new(
                self.next() * span - span / 2.0,
                self.next() * span - span / 2.0,
                self.next() * 7.0,
            )
        }
    }

    #[test]
    fn coincident_is_zero() {
        let a = PoseSE2::new(0.3, -1.0, 2.0);
        assert_eq!(reeds_shepp_distance(&a, &a, 0.4), 0.0);
        assert!(reeds_shepp_path(&a, &a, 0.4).segments.is_empty());
    }

    #[test]
    fn straight_back() {
        let a = PoseSE2::new(0.0, 0.0, 0.0);
        let b = PoseSE2::new(-2.0, 0.0, 0.0);
        assert!((reeds_shepp_distance(&a, &b, 1.0) - 2.0).abs() < 1e-9);
        assert!(reeds_shepp_path(&a, &b, 1.0).has_reverse());
    }

    #[test]
    fn all_candidates_reach_goal() {
        let mut rng = Lcg(3);
        for _ in 0..400 {
            let (a, b) = (rng.pose(8.0), rng.pose(8.0));
            let r = 0.3 + rng.next() * 1.5;
            let cands = reeds_shepp_candidates(&a, &b, r);
            assert!(!cands.is_empty());
            for c in cands {
                assert!(c.end_pose().approx_eq(&b, 1e-6), "{:?}", c.segments);
            }
        }
    }

    #[test]
    fn never_longer_than_dubins() {
        let mut rng = Lcg(11);
        for _ in 0..1000 {
            let (a, b) = (rng.pose(6.0), rng.pose(6.0));
            let r = 0.2 + rng.next();
            assert!(reeds_shepp_distance(&a, &b, r) <= dubins_distance(&a, &b, r) + 1e-9);
        }
    }

    #[test]
    fn mirror_symmetric() {
        let mut rng = Lcg(5);
        let o = PoseSE2::new(0.0, 0.0, 0.0);
        for _ in 0..300 {
            let b = rng.pose(6.0);
            let m = PoseSE2::new(b.x, -b.y, -b.theta);
            let (d1, d2) = (reeds_shepp_distance(&o, &b, 1.0), reeds_shepp_distance(&o, &m, 1.0));
            assert!((d1 - d2).abs() < 1e-9, "{d1} vs {d2}");
        }
    }
}
