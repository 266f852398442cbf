use thiserror::Error;

use super::{Costmap, C_MAX, LETHAL, UNKNOWN};
use crate::geometry::PoseSE2;

#[derive(Debug, Error, PartialEq)]
pub enum FootprintError {
    #[error("circle radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon must have positive (counter-clockwise) area, got {0}")]
    BadArea(f64),
}

/// Robot shape in the robot frame (meters, origin at the pose).
#[derive(Debug, Clone, PartialEq)]
pub enum Footprint {
    Circle { radius: f64 },
    Polygon { vertices: Vec<(f64, f64)> },
}

impl Footprint {
    pub fn circle(radius: f64) -> Result<Self, FootprintError> {
        if !(radius > 0.0) {
            return Err(FootprintError::BadRadius(radius));
        }
        Ok(Self::Circle { radius })
    }

    pub fn polygon(vertices: Vec<(f64, f64)>) -> Result<Self, FootprintError> {
        if vertices.len() < 3 {
            return Err(FootprintError::TooFewVertices(vertices.len()));
        }
        let area = signed_area(&vertices);
        if !(area > 1e-12) {
            return Err(FootprintError::BadArea(area));
        }
        Ok(Self::Polygon { vertices })
    }

    /// Axis-aligned rectangle centered on the pose.
    pub fn rectangle(length: f64, width: f64) -> Result<Self, FootprintError> {
        let (hx, hy) = (length / 2.0, width / 2.0);
        Self::polygon(vec![(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)])
    }

    /// Vertices transformed into the world frame at `pose` (polygons only).
    pub fn transformed(&self, pose: &PoseSE2) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Circle { .. } => None,
            Self::Polygon { vertices } => {
                let (s, c) = pose.theta.sin_cos();
                Some(
                    vertices
                        .iter()
                        .map(|&(x, y)| (pose.x + c * x - s * y, pose.y + s * x + c * y))
                        .collect(),
                )
            }
        }
    }
}

fn signed_area(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|k| {
            let (a, b) = (v[k], v[(k + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

/// True when the robot at `pose` is in collision.
///
/// Circles rely on the inflation contract: a cell at [`C_MAX`] lies within
/// the inscribed radius of an obstacle. Polygons are rasterized and collide
/// when any cell overlapping the polygon with positive area is lethal.
/// Poses (or polygon cells) outside the map count as collisions.
pub fn collision_check(map: &Costmap, pose: &PoseSE2, footprint: &Footprint) -> bool {
    let Some(center) = map.index_of_world(pose.x, pose.y) else {
        return true;
    };
    match footprint {
        Footprint::Circle { .. } => circle_cell_collides(map, center),
        Footprint::Polygon { .. } => {
            let poly = footprint.transformed(pose).expect("polygon");
            polygon_collides(map, &poly)
        }
    }
}

#[inline]
pub(crate) fn circle_cell_collides(map: &Costmap, idx: usize) -> bool {
    match map.cost_at_index(idx) {
        LETHAL | C_MAX => true,
        UNKNOWN => !map.allow_unknown(),
        _ => false,
    }
}

fn polygon_collides(map: &Costmap, poly: &[(f64, f64)]) -> bool {
    let res = map.resolution();
    let (ox, oy) = map.origin();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in poly {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let i0 = ((min_x - ox) / res).floor() as i64;
    let i1 = ((max_x - ox) / res).floor() as i64;
    let j0 = ((min_y - oy) / res).floor() as i64;
    let j1 = ((max_y - oy) / res).floor() as i64;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let x0 = ox + i as f64 * res;
            let y0 = oy + j as f64 * res;
            if !polygon_overlaps_square(poly, x0, y0, x0 + res, y0 + res) {
                continue;
            }
            let inside = i >= 0 && j >= 0 && (i as usize) < map.width() && (j as usize) < map.height();
            if !inside || map.is_lethal_index(map.index(i as usize, j as usize)) {
                return true;
            }
        }
    }
    false
}

/// Positive-area overlap between a simple polygon and an axis-aligned square.
pub(crate) fn polygon_overlaps_square(poly: &[(f64, f64)], x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    let n = poly.len();
    for k in 0..n {
        if segment_enters_open_box(poly[k], poly[(k + 1) % n], x0, y0, x1, y1) {
            return true;
        }
    }
    point_in_polygon(poly, (x0 + x1) / 2.0, (y0 + y1) / 2.0)
}

/// Liang-Barsky clip; the clipped chord lies in the open box iff its
/// midpoint does (the box is convex).
fn segment_enters_open_box(a: (f64, f64), b: (f64, f64), x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.0 - x0), (dx, x1 - a.0), (-dy, a.1 - y0), (dy, y1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 >= t1 {
        return false;
    }
    let tm = 0.5 * (t0 + t1);
    let (mx, my) = (a.0 + tm * dx, a.1 + tm * dy);
    let eps = 1e-12 * (x1 - x0).abs().max(1.0);
    mx > x0 + eps && mx < x1 - eps && my > y0 + eps && my < y1 - eps
}

pub(crate) fn point_in_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn validation() {
        assert_eq!(Footprint::circle(0.0), Err(FootprintError::BadRadius(0.0)));
        assert_eq!(
            Footprint::polygon(vec![(0.0, 0.0), (1.0, 0.0)]),
            Err(FootprintError::TooFewVertices(2))
        );
        assert!(matches!(
            Footprint::polygon(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
            Err(FootprintError::BadArea(_))
        ));
        // clockwise
        assert!(Footprint::polygon(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn free_map_never_collides() {
        let map = Costmap::new(40, 40, 0.1, (0.0, 0.0)).unwrap();
        let rect = Footprint::rectangle(1.0, 0.6).unwrap();
        let circle = Footprint::circle(0.3).unwrap();
        for k in 0..20 {
            let pose = PoseSE2::new(1.0 + 0.1 * k as f64, 2.0, 0.3 * k as f64);
            assert!(!collision_check(&map, &pose, &rect));
            assert!(!collision_check(&map, &pose, &circle));
        }
    }

    #[test]
    fn circle_on_lethal_cell() {
        let mut map = Costmap::new(10, 10, 0.1, (0.0, 0.0)).unwrap();
        map.set_cost(5, 5, LETHAL);
        map.set_cost(2, 2, C_MAX);
        let circle = Footprint::circle(0.1).unwrap();
        assert!(collision_check(&map, &PoseSE2::new(0.55, 0.55, 0.0), &circle));
        assert!(collision_check(&map, &PoseSE2::new(0.25, 0.25, 0.0), &circle));
        assert!(!collision_check(&map, &PoseSE2::new(0.45, 0.55, 0.0), &circle));
    }

    #[test]
    fn out_of_bounds_is_collision() {
        let map = Costmap::new(10, 10, 0.1, (0.0, 0.0)).unwrap();
        let circle = Footprint::circle(0.1).unwrap();
        assert!(collision_check(&map, &PoseSE2::new(-0.01, 0.5, 0.0), &circle));
        // polygon hanging over the edge
        let rect = Footprint::rectangle(0.4, 0.4).unwrap();
        assert!(collision_check(&map, &PoseSE2::new(0.1, 0.5, 0.0), &rect));
        assert!(!collision_check(&map, &PoseSE2::new(0.5, 0.5, 0.0), &rect));
    }

    /// Fine point sampling over each cell; a cell is covered when any sample
    /// falls inside the polygon.
    fn sampled_collision(map: &Costmap, poly: &[(f64, f64)], samples: usize) -> bool {
        let res = map.resolution();
        for j in 0..map.height() {
            for i in 0..map.width() {
                if !map.is_lethal_index(map.index(i, j)) {
                    continue;
                }
                for a in 0..samples {
                    for b in 0..samples {
                        let x = (i as f64 + (a as f64 + 0.5) / samples as f64) * res;
                        let y = (j as f64 + (b as f64 + 0.5) / samples as f64) * res;
                        if point_in_polygon(poly, x, y) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn rotated_square_reaches_diagonal_cell() {
        // 1 m square at the center of cell (10, 10); lethal cell centered 0.6 m along +x,
        // which is the rotated square's diagonal.
        let mut map = Costmap::new(21, 21, 0.1, (0.0, 0.0)).unwrap();
        map.set_cost(16, 10, LETHAL);
        let square = Footprint::rectangle(1.0, 1.0).unwrap();
        let rotated = PoseSE2::new(1.05, 1.05, FRAC_PI_4);
        let aligned = PoseSE2::new(1.05, 1.05, 0.0);
        assert!(collision_check(&map, &rotated, &square));
        assert!(!collision_check(&map, &aligned, &square));
        let poly_r = square.transformed(&rotated).unwrap();
        let poly_a = square.transformed(&aligned).unwrap();
        assert!(sampled_collision(&map, &poly_r, 32));
        assert!(!sampled_collision(&map, &poly_a, 32));
    }

    #[test]
    fn overlap_edge_cases() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        // sharing only an edge or a corner is not an overlap
        assert!(!polygon_overlaps_square(&sq, 1.0, 0.0, 2.0, 1.0));
        assert!(!polygon_overlaps_square(&sq, 1.0, 1.0, 2.0, 2.0));
        // containment either way
        assert!(polygon_overlaps_square(&sq, 0.25, 0.25, 0.5, 0.5));
        assert!(polygon_overlaps_square(&sq, -1.0, -1.0, 2.0, 2.0));
        // sliver across a corner
        let tri = [(0.8, 1.1), (1.1, 0.8), (1.3, 1.3)];
        assert!(polygon_overlaps_square(&tri, 0.0, 0.0, 1.0, 1.0));
    }
}
