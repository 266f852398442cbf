//! Minimal control set generation.
//!
//! Candidate endpoints are visited ring by ring outward from the origin and
//! shortest first within a ring. A candidate is kept only when no
//! concatenation of already kept primitives reaches the same lattice state
//! at comparable length. One octant of start headings is generated and the
//! rest follow from the grid symmetries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{derive_headings, ControlSet, GridSymmetry};
use crate::geometry::{angle_diff, generate_trajectory, MotionPrimitive, PoseSE2};

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("{0} headings cannot be realized by small cell offsets")]
    UnsupportedHeadings(usize),
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
    #[error("reached the ring limit {limit} before {needed} consecutive rings added nothing")]
    RingLimit { limit: usize, needed: usize },
}

/// L∞ ring of cell offsets around the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wavefront {
    pub ring_index: usize,
    pub cells: Vec<(i64, i64)>,
}

/// Cells at Chebyshev distance `ring` from the origin, counter-clockwise
/// from `(ring, 0)`.
pub fn wavefront(ring: usize) -> Wavefront {
    let r = ring as i64;
    if r == 0 {
        return Wavefront {
            ring_index: 0,
            cells: vec![(0, 0)],
        };
    }
    let mut cells = Vec::with_capacity(8 * ring);
    for j in 0..r {
        cells.push((r, j));
    }
    for i in (-r + 1..=r).rev() {
        cells.push((i, r));
    }
    for j in (-r + 1..=r).rev() {
        cells.push((-r, j));
    }
    for i in -r..=r {
        cells.push((i, -r));
    }
    for j in -r + 1..0 {
        cells.push((r, j));
    }
    Wavefront {
        ring_index: ring,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorOptions {
    pub resolution: f64,
    pub turning_radius: f64,
    pub heading_bins: usize,
    /// Stop after this many consecutive rings add no primitive.
    pub stop_after_decomposable_rings: usize,
    /// A concatenation within this fraction of a candidate's length counts
    /// as a decomposition.
    pub length_tolerance: f64,
    /// Defaults to `2·ceil(R / resolution) + 8`.
    pub ring_limit: Option<usize>,
    /// Skip end headings facing away (≥ π/2) from the bearing to the cell.
    pub prune_by_bearing: bool,
}

impl GeneratorOptions {
    pub fn new(resolution: f64, turning_radius: f64, heading_bins: usize) -> Self {
        Self {
            resolution,
            turning_radius,
            heading_bins,
            stop_after_decomposable_rings: 3,
            length_tolerance: 0.02,
            ring_limit: None,
            prune_by_bearing: true,
        }
    }

    fn ring_limit(&self) -> usize {
        self.ring_limit
            .unwrap_or(2 * (self.turning_radius / self.resolution).ceil() as usize + 8)
    }
}

/// Lightweight view of a primitive for concatenation searches.
#[derive(Debug, Clone, Copy)]
struct Edge {
    di: i32,
    dj: i32,
    end: u16,
    length: f64,
}

#[derive(Clone, Copy)]
struct QueueItem {
    d: f64,
    state: (i32, i32, u16),
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then_with(|| other.state.cmp(&self.state))
    }
}

/// Shortest concatenation length from `(0, 0, start)` to every lattice state
/// reachable within `bound`, using at least one primitive.
fn concat_distances(edges: &[Vec<Edge>], start: u16, bound: f64) -> FxHashMap<(i32, i32, u16), f64> {
    let mut dist: FxHashMap<(i32, i32, u16), f64> = FxHashMap::default();
    let mut heap = BinaryHeap::new();
    for e in &edges[start as usize] {
        relax(&mut dist, &mut heap, (e.di, e.dj, e.end), e.length, bound);
    }
    while let Some(QueueItem { d, state }) = heap.pop() {
        if d > dist[&state] {
            continue;
        }
        for e in &edges[state.2 as usize] {
            let next = (state.0 + e.di, state.1 + e.dj, e.end);
            relax(&mut dist, &mut heap, next, d + e.length, bound);
        }
    }
    dist
}

fn relax(
    dist: &mut FxHashMap<(i32, i32, u16), f64>,
    heap: &mut BinaryHeap<QueueItem>,
    state: (i32, i32, u16),
    d: f64,
    bound: f64,
) {
    if d > bound {
        return;
    }
    let slot = dist.entry(state).or_insert(f64::INFINITY);
    if d < *slot {
        *slot = d;
        heap.push(QueueItem { d, state });
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    start: usize,
    cell: (i64, i64),
    end: usize,
    length: f64,
}

fn candidates_in_ring(opts: &GeneratorOptions, headings: &[f64], starts: &[usize], ring: usize) -> Vec<Candidate> {
    let res = opts.resolution;
    let mut out = Vec::new();
    for &h in starts {
        let start = PoseSE2::new(0.0, 0.0, headings[h]);
        for &(i, j) in &wavefront(ring).cells {
            let bearing = (j as f64).atan2(i as f64);
            for (t, &theta) in headings.iter().enumerate() {
                if opts.prune_by_bearing && angle_diff(theta, bearing).abs() >= FRAC_PI_2 {
                    continue;
                }
                let end = PoseSE2::new(i as f64 * res, j as f64 * res, theta);
                if let Ok(sol) = generate_trajectory(&start, &end, opts.turning_radius) {
                    out.push(Candidate {
                        start: h,
                        cell: (i, j),
                        end: t,
                        length: sol.total_length,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.start.cmp(&b.start))
            .then(a.cell.cmp(&b.cell))
            .then(a.end.cmp(&b.end))
    });
    out
}

fn build_primitive(opts: &GeneratorOptions, headings: &[f64], c: &Candidate) -> MotionPrimitive {
    let res = opts.resolution;
    let start = PoseSE2::new(0.0, 0.0, headings[c.start]);
    let end = PoseSE2::new(c.cell.0 as f64 * res, c.cell.1 as f64 * res, headings[c.end]);
    let sol = generate_trajectory(&start, &end, opts.turning_radius).expect("candidate was feasible");
    MotionPrimitive {
        id: 0,
        start_heading_bin: c.start,
        end_heading_bin: c.end,
        poses: sol.sample(res),
        length: sol.total_length,
        turn: sol.turn_sign,
        reversed: false,
    }
}

/// Symmetric images of `p`, deduplicated on (start, end, offset).
fn images(p: &MotionPrimitive, headings: &[f64], res: f64) -> Vec<MotionPrimitive> {
    let mut out: Vec<MotionPrimitive> = Vec::new();
    for s in GridSymmetry::all() {
        let q = s.apply_primitive(p, headings);
        let key = |m: &MotionPrimitive| {
            let e = m.end_pose();
            (
                m.start_heading_bin,
                m.end_heading_bin,
                (e.x / res).round() as i64,
                (e.y / res).round() as i64,
            )
        };
        if !out.iter().any(|o| key(o) == key(&q)) {
            out.push(q);
        }
    }
    out
}

fn edges_of(prims: &[MotionPrimitive], bins: usize, res: f64) -> Vec<Vec<Edge>> {
    let mut edges = vec![Vec::new(); bins];
    for p in prims {
        let e = p.end_pose();
        edges[p.start_heading_bin].push(Edge {
            di: (e.x / res).round() as i32,
            dj: (e.y / res).round() as i32,
            end: p.end_heading_bin as u16,
            length: p.length,
        });
    }
    edges
}

/// Outcome of a generator run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    /// Last ring examined; the set is complete up to this ring.
    pub horizon_ring: usize,
    pub candidates_tried: usize,
}

pub fn generate_minimal_control_set(
    resolution: f64,
    turning_radius: f64,
    heading_bins: usize,
    stop_after_decomposable_rings: usize,
) -> Result<ControlSet, LatticeError> {
    let mut opts = GeneratorOptions::new(resolution, turning_radius, heading_bins);
    opts.stop_after_decomposable_rings = stop_after_decomposable_rings;
    generate_with_report(&opts).map(|(cs, _)| cs)
}

pub fn generate_with_report(opts: &GeneratorOptions) -> Result<(ControlSet, GenerationReport), LatticeError> {
    if !(opts.resolution > 0.0 && opts.turning_radius > 0.0) {
        return Err(LatticeError::BadParameter(
            "resolution and turning radius must be positive".into(),
        ));
    }
    if opts.stop_after_decomposable_rings == 0 || !(opts.length_tolerance >= 0.0) {
        return Err(LatticeError::BadParameter("termination rings and tolerance".into()));
    }
    let headings = derive_headings(opts.heading_bins)?;
    let bins = headings.len();
    let res = opts.resolution;
    // one octant of start headings; the symmetries produce the others
    let canonical: Vec<usize> = (0..bins).filter(|&k| headings[k] <= FRAC_PI_4 + 1e-12).collect();

    let mut accepted: Vec<MotionPrimitive> = Vec::new();
    // symmetry group of each accepted primitive
    let mut groups: Vec<usize> = Vec::new();
    let mut n_groups = 0;
    let mut quiet = 0;
    let mut tried = 0;
    let limit = opts.ring_limit();
    for ring in 1..=limit {
        let cands = candidates_in_ring(opts, &headings, &canonical, ring);
        tried += cands.len();
        let bound = cands.iter().map(|c| c.length).fold(0.0, f64::max) * (1.0 + opts.length_tolerance) + 1e-9;
        let mut dist: Vec<Option<FxHashMap<(i32, i32, u16), f64>>> = vec![None; bins];
        let mut added = false;
        for c in &cands {
            let d = dist[c.start]
                .get_or_insert_with(|| concat_distances(&edges_of(&accepted, bins, res), c.start as u16, bound));
            let reach = d
                .get(&(c.cell.0 as i32, c.cell.1 as i32, c.end as u16))
                .copied()
                .unwrap_or(f64::INFINITY);
            if reach <= c.length * (1.0 + opts.length_tolerance) + 1e-9 {
                continue;
            }
            let prim = build_primitive(opts, &headings, c);
            let imgs = images(&prim, &headings, res);
            groups.extend(std::iter::repeat_n(n_groups, imgs.len()));
            n_groups += 1;
            accepted.extend(imgs);
            dist.iter_mut().for_each(|d| *d = None);
            added = true;
        }
        // rings before every start heading can turn say nothing about termination
        let turning = canonical
            .iter()
            .all(|&h| cands.iter().any(|c| c.start == h && c.end != h));
        if added {
            quiet = 0;
        } else if turning {
            quiet += 1;
        }
        if quiet >= opts.stop_after_decomposable_rings {
            let check = CompletenessCheck::new(&headings, res, opts.turning_radius, ring, opts.length_tolerance);
            let pruned = prune_redundant(accepted, groups, &check);
            let cs = ControlSet::new(res, opts.turning_radius, headings, pruned);
            return Ok((
                cs,
                GenerationReport {
                    horizon_ring: ring,
                    candidates_tried: tried,
                },
            ));
        }
    }
    Err(LatticeError::RingLimit {
        limit,
        needed: opts.stop_after_decomposable_rings,
    })
}

/// Completeness test against the direct feasible trajectories of every
/// start heading up to a horizon ring. Candidates are fixed, so one checker
/// evaluates many primitive subsets.
struct CompletenessCheck {
    bins: usize,
    res: f64,
    tol: f64,
    cands: Vec<Vec<Candidate>>,
    bounds: Vec<f64>,
}

impl CompletenessCheck {
    fn new(headings: &[f64], res: f64, radius: f64, horizon_ring: usize, tol: f64) -> Self {
        let opts = GeneratorOptions::new(res, radius, headings.len());
        let cands: Vec<Vec<Candidate>> = (0..headings.len())
            .map(|h| {
                (1..=horizon_ring)
                    .flat_map(|ring| candidates_in_ring(&opts, headings, &[h], ring))
                    .collect()
            })
            .collect();
        let bounds = cands
            .iter()
            .map(|c| c.iter().map(|c| c.length).fold(0.0, f64::max) * (1.0 + tol) + 1e-9)
            .collect();
        Self {
            bins: headings.len(),
            res,
            tol,
            cands,
            bounds,
        }
    }

    /// Unreached poses; stops at the first one when `first_only`.
    fn violations(&self, prims: &[MotionPrimitive], first_only: bool) -> Vec<(usize, (i64, i64), usize)> {
        let edges = edges_of(prims, self.bins, self.res);
        let n = self.bins as i64;
        let mut out = Vec::new();
        for h in 0..self.bins {
            let dist = concat_distances(&edges, h as u16, self.bounds[h]);
            for c in &self.cands[h] {
                // same cell, heading within one bin
                let reach = (-1..=1)
                    .filter_map(|dt| {
                        let t = (c.end as i64 + dt).rem_euclid(n) as u16;
                        dist.get(&(c.cell.0 as i32, c.cell.1 as i32, t)).copied()
                    })
                    .fold(f64::INFINITY, f64::min);
                if reach > c.length * (1.0 + self.tol) + 1e-9 {
                    out.push((h, c.cell, c.end));
                    if first_only {
                        return out;
                    }
                }
            }
        }
        out
    }
}

/// Drops whole symmetry groups, longest first, while completeness holds.
fn prune_redundant(prims: Vec<MotionPrimitive>, groups: Vec<usize>, check: &CompletenessCheck) -> Vec<MotionPrimitive> {
    let n_groups = groups.iter().max().map_or(0, |g| g + 1);
    let mut order: Vec<usize> = (0..n_groups).collect();
    let len_of = |g: usize| prims[groups.iter().position(|&x| x == g).expect("group")].length;
    order.sort_by(|&a, &b| len_of(b).total_cmp(&len_of(a)));
    let mut removed = vec![false; n_groups];
    for g in order {
        let trial: Vec<MotionPrimitive> = prims
            .iter()
            .zip(&groups)
            .filter(|&(_, &k)| k != g && !removed[k])
            .map(|(p, _)| p.clone())
            .collect();
        if check.violations(&trial, true).is_empty() {
            removed[g] = true;
        }
    }
    prims
        .into_iter()
        .zip(groups)
        .filter(|&(_, k)| !removed[k])
        .map(|(p, _)| p)
        .collect()
}

/// Poses within `horizon_ring` that a direct feasible trajectory reaches
/// but no concatenation of `cs` reaches, in the same cell and within one
/// heading bin, at most `length_tolerance` longer. Returned as
/// `(start heading, cell offset, end heading)`.
pub fn completeness_violations(
    cs: &ControlSet,
    horizon_ring: usize,
    length_tolerance: f64,
) -> Vec<(usize, (i64, i64), usize)> {
    CompletenessCheck::new(
        &cs.headings,
        cs.resolution,
        cs.turning_radius,
        horizon_ring,
        length_tolerance,
    )
    .violations(&cs.primitives, false)
}

/// For each primitive, whether the set stays complete without it.
pub fn redundant_primitives(cs: &ControlSet, horizon_ring: usize, length_tolerance: f64) -> Vec<bool> {
    let check = CompletenessCheck::new(
        &cs.headings,
        cs.resolution,
        cs.turning_radius,
        horizon_ring,
        length_tolerance,
    );
    (0..cs.primitives.len())
        .map(|k| {
            let others: Vec<MotionPrimitive> = cs
                .primitives
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, p)| p.clone())
                .collect();
            check.violations(&others, true).is_empty()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rings_are_disjoint_and_exhaustive() {
        let mut seen = HashSet::new();
        for r in 0..=6 {
            let w = wavefront(r);
            assert_eq!(w.cells.len(), if r == 0 { 1 } else { 8 * r });
            for c in w.cells {
                assert_eq!(c.0.abs().max(c.1.abs()) as usize, r);
                assert!(seen.insert(c));
            }
        }
        assert_eq!(seen.len(), 13 * 13);
    }

    #[test]
    fn coarse_set_is_minimal_and_symmetric() {
        let opts = GeneratorOptions::new(0.1, 0.5, 16);
        let (cs, report) = generate_with_report(&opts).unwrap();
        for h in 0..16 {
            assert!(!cs.primitives_for(h).is_empty());
        }
        let redundant = redundant_primitives(&cs, report.horizon_ring, 0.02);
        for p in &cs.primitives {
            assert!(!redundant[p.id], "primitive {} is redundant", p.id);
            // every image under the grid symmetries is in the set
            for s in GridSymmetry::all() {
                let q = s.apply_primitive(p, &cs.headings);
                assert!(cs.primitives.iter().any(|o| o.start_heading_bin == q.start_heading_bin
                    && o.end_heading_bin == q.end_heading_bin
                    && cs.end_offset(o) == cs.end_offset(&q)));
            }
        }
        assert!(completeness_violations(&cs, report.horizon_ring, 0.02).is_empty());
    }

    #[test]
    fn straight_moves_present_and_not_doubled() {
        let cs = generate_minimal_control_set(0.1, 0.5, 16, 3).unwrap();
        // one-cell diagonal for heading 45°
        assert!(cs
            .primitives_for(2)
            .iter()
            .any(|p| p.end_heading_bin == 2 && cs.end_offset(p) == (1, 1)));
        assert!(!cs
            .primitives_for(0)
            .iter()
            .any(|p| p.end_heading_bin == 0 && cs.end_offset(p) == (2, 0)));
    }
}
