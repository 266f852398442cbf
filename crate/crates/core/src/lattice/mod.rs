//! State lattice control sets: non-uniform headings from cell-center
//! offsets, minimal primitive generation and the control-set file format.

mod generator;
mod io;

pub use generator::{
    completeness_violations, generate_minimal_control_set, generate_with_report, redundant_primitives, wavefront,
    GenerationReport, GeneratorOptions, LatticeError, Wavefront,
};
pub use io::{
    load_control_set, parse_control_set, save_control_set, write_control_set, ControlSetError, CONTROL_SET_VERSION,
};

use std::f64::consts::TAU;

use crate::geometry::{angle_diff, normalize_angle, MotionPrimitive, PoseSE2};

/// Largest offset component searched when realizing a heading.
const MAX_OFFSET: i64 = 8;

/// Heading angles realized by small integer cell offsets, one per uniform
/// bin (the shortest offset closer to that bin than to its neighbors),
/// sorted from 0. Returns the offsets alongside the angles.
pub fn derive_headings_with_offsets(heading_bins: usize) -> Result<Vec<(f64, (i64, i64))>, LatticeError> {
    if heading_bins < 4 || !heading_bins.is_multiple_of(4) {
        return Err(LatticeError::UnsupportedHeadings(heading_bins));
    }
    let half_bin = TAU / heading_bins as f64 / 2.0;
    let mut out: Vec<(f64, (i64, i64))> = Vec::with_capacity(heading_bins);
    for k in 0..heading_bins {
        let target = k as f64 * TAU / heading_bins as f64;
        // smallest offset whose angle is nearer this bin than its neighbors
        let mut best: Option<(i64, f64, (i64, i64))> = None;
        for a in -MAX_OFFSET..=MAX_OFFSET {
            for b in -MAX_OFFSET..=MAX_OFFSET {
                if (a, b) == (0, 0) || gcd(a.abs(), b.abs()) != 1 {
                    continue;
                }
                let err = angle_diff((b as f64).atan2(a as f64), target).abs();
                if err >= half_bin - 1e-12 {
                    continue;
                }
                let norm = a * a + b * b;
                let better = match best {
                    None => true,
                    Some((n, e, _)) => norm < n || (norm == n && err < e),
                };
                if better {
                    best = Some((norm, err, (a, b)));
                }
            }
        }
        let Some((_, _, off)) = best else {
            return Err(LatticeError::UnsupportedHeadings(heading_bins));
        };
        out.push((normalize_angle((off.1 as f64).atan2(off.0 as f64)), off));
    }
    for w in out.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(LatticeError::UnsupportedHeadings(heading_bins));
        }
    }
    Ok(out)
}

/// Non-uniform lattice headings for `heading_bins` bins.
pub fn derive_headings(heading_bins: usize) -> Result<Vec<f64>, LatticeError> {
    Ok(derive_headings_with_offsets(heading_bins)?
        .into_iter()
        .map(|(a, _)| a)
        .collect())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Index of the lattice heading nearest to `theta`.
pub fn nearest_heading(headings: &[f64], theta: f64) -> usize {
    let mut best = 0;
    let mut err = f64::INFINITY;
    for (k, &h) in headings.iter().enumerate() {
        let e = angle_diff(theta, h).abs();
        if e < err {
            err = e;
            best = k;
        }
    }
    best
}

/// Primitive set for the lattice planner.
///
/// Primitives are stored grouped by start heading; `poses` are in the world
/// frame relative to the start cell center, so they are applied by
/// translation only.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    pub resolution: f64,
    pub turning_radius: f64,
    pub headings: Vec<f64>,
    pub primitives: Vec<MotionPrimitive>,
    ranges: Vec<std::ops::Range<usize>>,
}

impl ControlSet {
    /// Groups primitives by start heading and renumbers ids in that order.
    pub fn new(resolution: f64, turning_radius: f64, headings: Vec<f64>, mut primitives: Vec<MotionPrimitive>) -> Self {
        primitives.sort_by(|a, b| {
            a.start_heading_bin
                .cmp(&b.start_heading_bin)
                .then(a.length.total_cmp(&b.length))
                .then(a.end_heading_bin.cmp(&b.end_heading_bin))
                .then_with(|| {
                    let (ea, eb) = (a.end_pose(), b.end_pose());
                    ea.x.total_cmp(&eb.x).then(ea.y.total_cmp(&eb.y))
                })
        });
        let mut ranges = vec![0..0; headings.len()];
        for (id, p) in primitives.iter_mut().enumerate() {
            p.id = id;
            let r = &mut ranges[p.start_heading_bin];
            if r.start == r.end {
                *r = id..id + 1;
            } else {
                r.end = id + 1;
            }
        }
        Self {
            resolution,
            turning_radius,
            headings,
            primitives,
            ranges,
        }
    }

    pub fn heading_bins(&self) -> usize {
        self.headings.len()
    }

    pub fn primitives_for(&self, heading: usize) -> &[MotionPrimitive] {
        &self.primitives[self.ranges[heading].clone()]
    }

    /// End cell offset of a primitive.
    pub fn end_offset(&self, p: &MotionPrimitive) -> (i64, i64) {
        let e = p.end_pose();
        (
            (e.x / self.resolution).round() as i64,
            (e.y / self.resolution).round() as i64,
        )
    }

    /// Longest primitive, used to size search bounds.
    pub fn max_length(&self) -> f64 {
        self.primitives.iter().map(|p| p.length).fold(0.0, f64::max)
    }

    pub fn mean_length(&self) -> f64 {
        self.primitives.iter().map(|p| p.length).sum::<f64>() / self.primitives.len().max(1) as f64
    }
}

/// One of the eight symmetries of the square grid: rotate by `quarter`
/// quarter turns after optionally mirroring across the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSymmetry {
    pub mirror: bool,
    pub quarter: u8,
}

impl GridSymmetry {
    pub fn all() -> impl Iterator<Item = GridSymmetry> {
        (0..8).map(|k| GridSymmetry {
            mirror: k >= 4,
            quarter: (k % 4) as u8,
        })
    }

    pub fn apply_offset(self, (i, j): (i64, i64)) -> (i64, i64) {
        let (i, j) = if self.mirror { (i, -j) } else { (i, j) };
        match self.quarter {
            0 => (i, j),
            1 => (-j, i),
            2 => (-i, -j),
            _ => (j, -i),
        }
    }

    pub fn apply_pose(self, p: &PoseSE2) -> PoseSE2 {
        let (x, y, th) = if self.mirror {
            (p.x, -p.y, -p.theta)
        } else {
            (p.x, p.y, p.theta)
        };
        let (x, y) = match self.quarter {
            0 => (x, y),
            1 => (-y, x),
            2 => (-x, -y),
            _ => (y, -x),
        };
        PoseSE2::new(x, y, th + f64::from(self.quarter) * std::f64::consts::FRAC_PI_2)
    }

    /// Maps a primitive, re-binning its headings against `headings`.
    pub fn apply_primitive(self, p: &MotionPrimitive, headings: &[f64]) -> MotionPrimitive {
        let poses: Vec<PoseSE2> = p.poses.iter().map(|q| self.apply_pose(q)).collect();
        let start = nearest_heading(headings, poses[0].theta);
        let end = nearest_heading(headings, poses.last().expect("poses").theta);
        let mut poses = poses;
        // snap the lattice endpoints exactly onto their heading values
        poses[0].theta = headings[start];
        poses.last_mut().expect("poses").theta = headings[end];
        MotionPrimitive {
            id: p.id,
            start_heading_bin: start,
            end_heading_bin: end,
            poses,
            length: p.length,
            turn: if self.mirror { -p.turn } else { p.turn },
            reversed: p.reversed,
        }
    }
}
