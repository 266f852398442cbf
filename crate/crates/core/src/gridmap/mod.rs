//! Costmap data model shared by every planner.
//!
//! Cells hold a one byte cost: `0` is free, `1..=253` are increasingly
//! expensive soft costs, [`LETHAL`] marks a collision and [`UNKNOWN`] an
//! unobserved cell. The maximum non-lethal value [`C_MAX`] doubles as the
//! "inscribed" cost written by [`inflate`] within the robot radius.

mod collision;
mod inflation;
mod io;
mod random;

pub use collision::{collision_check, Footprint, FootprintError};
pub use inflation::inflate;
pub use io::{load_map, save_map, MapMeta, PixelMode};
pub use random::{generate_random_map, RandomMapError};

use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::geometry::PoseSE2;

pub const FREE: u8 = 0;
/// Largest non-lethal cost; also the cost inside the inscribed radius.
pub const C_MAX: u8 = 253;
pub const LETHAL: u8 = 254;
pub const UNKNOWN: u8 = 255;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt map file {path}: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("pgm header declares {expected} pixels but payload holds {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
    #[error("map dimensions must be positive, got {width}x{height}")]
    EmptyMap { width: usize, height: usize },
    #[error("cell value {0} is reserved")]
    InvalidCost(u8),
    #[error("world point ({x}, {y}) lies outside the map")]
    OutOfBounds { x: f64, y: f64 },
}

/// Grid cell index: `i` runs along +x (columns), `j` along +y (rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    cells: Vec<u8>,
    allow_unknown: bool,
}

impl Costmap {
    /// All-free map.
    pub fn new(width: usize, height: usize, resolution: f64, origin: (f64, f64)) -> Result<Self, MapError> {
        Self::from_cells(width, height, resolution, origin, vec![FREE; width * height])
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        cells: Vec<u8>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyMap { width, height });
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(MapError::NonPositiveResolution(resolution));
        }
        if cells.len() != width * height {
            return Err(MapError::DimensionMismatch {
                expected: width * height,
                actual: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
            allow_unknown: false,
        })
    }

    /// Treat [`UNKNOWN`] cells as traversable at cost [`C_MAX`] instead of lethal.
    pub fn with_allow_unknown(mut self, allow: bool) -> Self {
        self.allow_unknown = allow;
        self
    }

    pub fn allow_unknown(&self) -> bool {
        self.allow_unknown
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn c_max(&self) -> u8 {
        C_MAX
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn cell_of_index(&self, idx: usize) -> Cell {
        Cell::new(idx % self.width, idx / self.width)
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> u8 {
        self.cells[self.index(i, j)]
    }

    #[inline]
    pub fn cost_at_index(&self, idx: usize) -> u8 {
        self.cells[idx]
    }

    pub fn set_cost(&mut self, i: usize, j: usize, value: u8) {
        let idx = self.index(i, j);
        self.cells[idx] = value;
    }

    /// Lethal for planning purposes (unknown counts unless allowed).
    #[inline]
    pub fn is_lethal_index(&self, idx: usize) -> bool {
        match self.cells[idx] {
            LETHAL => true,
            UNKNOWN => !self.allow_unknown,
            _ => false,
        }
    }

    /// Cost used by the traversal function, `None` when the cell is lethal.
    #[inline]
    pub fn traversal_value(&self, idx: usize) -> Option<u8> {
        match self.cells[idx] {
            LETHAL => None,
            UNKNOWN if self.allow_unknown => Some(C_MAX),
            UNKNOWN => None,
            c => Some(c),
        }
    }

    /// Cell containing a world point, if inside the map.
    #[inline]
    pub fn world_to_grid_checked(&self, x: f64, y: f64) -> Option<Cell> {
        let fx = (x - self.origin.0) / self.resolution;
        let fy = (y - self.origin.1) / self.resolution;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        // truncation is floor for non-negative values
        let (i, j) = (fx as usize, fy as usize);
        (i < self.width && j < self.height).then_some(Cell::new(i, j))
    }

    pub fn world_to_grid(&self, x: f64, y: f64) -> Result<Cell, MapError> {
        self.world_to_grid_checked(x, y).ok_or(MapError::OutOfBounds { x, y })
    }

    /// World coordinates of a cell center.
    #[inline]
    pub fn grid_to_world(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.resolution,
            self.origin.1 + (j as f64 + 0.5) * self.resolution,
        )
    }

    #[inline]
    pub fn index_of_world(&self, x: f64, y: f64) -> Option<usize> {
        self.world_to_grid_checked(x, y).map(|c| self.index(c.i, c.j))
    }

    pub fn contains(&self, pose: &PoseSE2) -> bool {
        self.world_to_grid_checked(pose.x, pose.y).is_some()
    }

    /// Fraction of cells holding [`LETHAL`].
    pub fn lethal_fraction(&self) -> f64 {
        self.cells.iter().filter(|&&c| c == LETHAL).count() as f64 / self.cells.len() as f64
    }

    /// Content hash used to invalidate caches keyed on map contents.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = rustc_hash::FxHasher::default();
        self.width.hash(&mut hasher);
        self.height.hash(&mut hasher);
        self.resolution.to_bits().hash(&mut hasher);
        self.origin.0.to_bits().hash(&mut hasher);
        self.origin.1.to_bits().hash(&mut hasher);
        self.allow_unknown.hash(&mut hasher);
        for chunk in self.cells.chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            hasher.write_u64(u64::from_le_bytes(word));
        }
        hasher.finish()
    }

    /// Extent of the map in world units: (min_x, min_y, max_x, max_y).
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.origin.0,
            self.origin.1,
            self.origin.0 + self.width as f64 * self.resolution,
            self.origin.1 + self.height as f64 * self.resolution,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_grid_center_formula() {
        let map = Costmap::new(10, 10, 0.05, (0.0, 0.0)).unwrap();
        assert_eq!(map.world_to_grid(0.025, 0.025).unwrap(), Cell::new(0, 0));
        let (x, y) = map.grid_to_world(3, 4);
        assert!((x - 0.175).abs() < 1e-12 && (y - 0.225).abs() < 1e-12);
    }

    #[test]
    fn world_grid_out_of_bounds() {
        let map = Costmap::new(10, 10, 0.05, (1.0, -1.0)).unwrap();
        assert!(map.world_to_grid(0.99, 0.0).is_err());
        assert!(map.world_to_grid(1.2, -1.01).is_err());
        assert!(map.world_to_grid(1.5, 0.0).is_err());
        assert!(map.world_to_grid(1.0, -1.0).is_ok());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            Costmap::new(0, 3, 0.1, (0.0, 0.0)),
            Err(MapError::EmptyMap { .. })
        ));
        assert!(matches!(
            Costmap::new(3, 3, 0.0, (0.0, 0.0)),
            Err(MapError::NonPositiveResolution(_))
        ));
        assert!(matches!(
            Costmap::from_cells(2, 2, 0.1, (0.0, 0.0), vec![0; 3]),
            Err(MapError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unknown_handling() {
        let map = Costmap::from_cells(2, 1, 1.0, (0.0, 0.0), vec![UNKNOWN, 10]).unwrap();
        assert!(map.is_lethal_index(0));
        assert_eq!(map.traversal_value(0), None);
        let map = map.with_allow_unknown(true);
        assert!(!map.is_lethal_index(0));
        assert_eq!(map.traversal_value(0), Some(C_MAX));
        assert_eq!(map.traversal_value(1), Some(10));
    }

    proptest::proptest! {
        #[test]
        fn world_grid_round_trip(x in 0.0f64..4.99, y in 0.0f64..2.49, ox in -5.0f64..5.0, oy in -5.0f64..5.0) {
            let res = 0.05;
            let map = Costmap::new(100, 50, res, (ox, oy)).unwrap();
            let c = map.world_to_grid(x + ox, y + oy).unwrap();
            let (wx, wy) = map.grid_to_world(c.i, c.j);
            proptest::prop_assert!((wx - (x + ox)).abs() <= res / 2.0 + 1e-9);
            proptest::prop_assert!((wy - (y + oy)).abs() <= res / 2.0 + 1e-9);
        }
    }
}
