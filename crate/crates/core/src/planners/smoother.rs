//! Gradient-descent path smoothing with point-wise collision rollback.
//!
//! Minimizes `Σ w_s‖p[i-1] - 2p[i] + p[i+1]‖² + w_d‖p[i] - p0[i]‖²` over
//! the interior points. Endpoints and cusps stay fixed. A step that would
//! raise the objective is retried at half the step size, so the objective
//! never increases from one iteration to the next.

use super::{Path, SegmentMeta};
use crate::geometry::{normalize_angle, PoseSE2};
use crate::gridmap::{collision_check, Costmap, Footprint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    /// Smooth planned paths before returning them.
    pub enabled: bool,
    pub weight_smooth: f64,
    pub weight_data: f64,
    pub max_iterations: usize,
    pub step_size: f64,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            weight_smooth: 0.3,
            weight_data: 0.7,
            max_iterations: 1000,
            step_size: 0.1,
        }
    }
}

/// Converged when no point moves farther than this in an iteration.
const TOLERANCE: f64 = 1e-4;
const MAX_HALVINGS: usize = 20;

type Pt = (f64, f64);

/// `Σ‖p[i-1] - 2p[i] + p[i+1]‖²`.
pub fn smoothness(points: &[Pt]) -> f64 {
    points
        .windows(3)
        .map(|w| {
            let dx = w[0].0 - 2.0 * w[1].0 + w[2].0;
            let dy = w[0].1 - 2.0 * w[1].1 + w[2].1;
            dx * dx + dy * dy
        })
        .sum()
}

/// Full smoothing objective against the original points.
pub fn objective(points: &[Pt], original: &[Pt], weight_smooth: f64, weight_data: f64) -> f64 {
    let data: f64 = points
        .iter()
        .zip(original)
        .map(|(p, q)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2))
        .sum();
    weight_smooth * smoothness(points) + weight_data * data
}

fn gradient(points: &[Pt], original: &[Pt], ws: f64, wd: f64) -> Vec<Pt> {
    let n = points.len();
    let second = |k: usize| -> Pt {
        if k == 0 || k + 1 >= n {
            (0.0, 0.0)
        } else {
            (
                points[k - 1].0 - 2.0 * points[k].0 + points[k + 1].0,
                points[k - 1].1 - 2.0 * points[k].1 + points[k + 1].1,
            )
        }
    };
    (0..n)
        .map(|i| {
            let s0 = second(i);
            let sp = if i > 0 { second(i - 1) } else { (0.0, 0.0) };
            let sn = second(i + 1);
            (
                2.0 * ws * (sp.0 - 2.0 * s0.0 + sn.0) + 2.0 * wd * (points[i].0 - original[i].0),
                2.0 * ws * (sp.1 - 2.0 * s0.1 + sn.1) + 2.0 * wd * (points[i].1 - original[i].1),
            )
        })
        .collect()
}

/// Indices that never move: endpoints and direction changes.
fn fixed_points(path: &Path) -> Vec<bool> {
    let n = path.poses.len();
    let mut fixed = vec![false; n];
    if n > 0 {
        fixed[0] = true;
        fixed[n - 1] = true;
    }
    for k in 1..path.segments.len() {
        if path.segments[k].reverse != path.segments[k - 1].reverse {
            fixed[k] = true;
        }
    }
    fixed
}

/// Headings from neighboring points, flipped on reverse segments.
fn headings(points: &[Pt], segments: &[SegmentMeta], ends: (f64, f64)) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                return ends.0;
            }
            if i + 1 == n {
                return ends.1;
            }
            let (a, b) = if segments[i - 1].reverse != segments[i].reverse {
                // at a cusp the incoming direction defines the heading
                (points[i - 1], points[i])
            } else {
                (points[i - 1], points[i + 1])
            };
            let th = (b.1 - a.1).atan2(b.0 - a.0);
            normalize_angle(if segments[i - 1].reverse {
                th + std::f64::consts::PI
            } else {
                th
            })
        })
        .collect()
}

/// Smooths `path`, returning the result and the objective after every
/// iteration (entry 0 is the unsmoothed objective).
pub fn smooth_with_trace(path: &Path, map: &Costmap, footprint: &Footprint, cfg: &SmootherConfig) -> (Path, Vec<f64>) {
    let n = path.poses.len();
    let original: Vec<Pt> = path.poses.iter().map(|p| (p.x, p.y)).collect();
    let (ws, wd) = (cfg.weight_smooth, cfg.weight_data);
    let mut trace = vec![objective(&original, &original, ws, wd)];
    if n < 3 || !(ws > 0.0 && wd > 0.0 && cfg.step_size > 0.0) {
        return (path.clone(), trace);
    }
    let fixed = fixed_points(path);
    let ends = (path.poses[0].theta, path.poses[n - 1].theta);
    let mut pts = original.clone();
    let mut current = trace[0];
    let mut step = cfg.step_size;
    for _ in 0..cfg.max_iterations {
        let g = gradient(&pts, &original, ws, wd);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = pts.clone();
            for i in 0..n {
                if !fixed[i] {
                    trial[i] = (pts[i].0 - step * g[i].0, pts[i].1 - step * g[i].1);
                }
            }
            let th = headings(&trial, &path.segments, ends);
            for i in 0..n {
                if !fixed[i] && collision_check(map, &PoseSE2::new(trial[i].0, trial[i].1, th[i]), footprint) {
                    trial[i] = pts[i];
                }
            }
            let j = objective(&trial, &original, ws, wd);
            if j <= current {
                accepted = Some((trial, j));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, j)) = accepted else { break };
        let moved = trial
            .iter()
            .zip(&pts)
            .map(|(a, b)| (a.0 - b.0).hypot(a.1 - b.1))
            .fold(0.0, f64::max);
        pts = trial;
        current = j;
        trace.push(j);
        if moved < TOLERANCE {
            break;
        }
    }
    let th = headings(&pts, &path.segments, ends);
    let poses: Vec<PoseSE2> = pts.iter().zip(&th).map(|(p, &t)| PoseSE2::new(p.0, p.1, t)).collect();
    // the final headings can differ from the ones checked mid-iteration
    let poses = poses
        .iter()
        .zip(&path.poses)
        .map(|(p, orig)| if collision_check(map, p, footprint) { *orig } else { *p })
        .collect();
    let mut out = path.clone();
    out.poses = poses;
    out.length_m = Path::polyline_length(&out.poses);
    (out, trace)
}

pub fn smooth(path: &Path, map: &Costmap, footprint: &Footprint, cfg: &SmootherConfig) -> Path {
    smooth_with_trace(path, map, footprint, cfg).0
}
