//! Obstacle-free nonholonomic distance table around the origin.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{dubins_distance, heading_bin, reeds_shepp_distance, PoseSE2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionModel {
    Dubins,
    ReedsShepp,
}

impl MotionModel {
    pub fn distance(self, a: &PoseSE2, b: &PoseSE2, radius: f64) -> f64 {
        match self {
            MotionModel::Dubins => dubins_distance(a, b, radius),
            MotionModel::ReedsShepp => reeds_shepp_distance(a, b, radius),
        }
    }

    fn tag(self) -> u8 {
        match self {
            MotionModel::Dubins => 0,
            MotionModel::ReedsShepp => 1,
        }
    }
}

/// Default memory ceiling for a table build.
pub const DEFAULT_MAX_TABLE_BYTES: usize = 512 << 20;

const MAGIC: &[u8; 8] = b"KPLUT\0\0\0";
const LUT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LutError {
    #[error("turning radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("need at least 8 heading bins, got {0}")]
    TooFewBins(usize),
    #[error("window radius and resolution must be positive")]
    BadWindow,
    #[error("table would need {bytes} bytes ({entries} entries), above the {limit} byte budget")]
    TooLarge { entries: usize, bytes: usize, limit: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt table file: {0}")]
    Corrupt(String),
    #[error("table file is version {found}, expected {LUT_VERSION}")]
    Version { found: u32 },
    #[error("table file was built for different parameters")]
    KeyMismatch,
}

/// Shortest-curve distances from the origin (heading 0) to every cell
/// offset and heading bin inside a square window.
#[derive(Debug, Clone, PartialEq)]
pub struct NonholonomicLut {
    model: MotionModel,
    turning_radius: f64,
    window_radius: f64,
    resolution: f64,
    heading_bins: usize,
    half: i64,
    table: Vec<f64>,
}

impl NonholonomicLut {
    pub fn build(
        model: MotionModel,
        turning_radius: f64,
        window_radius: f64,
        heading_bins: usize,
        resolution: f64,
    ) -> Result<Self, LutError> {
        Self::build_with_limit(
            model,
            turning_radius,
            window_radius,
            heading_bins,
            resolution,
            DEFAULT_MAX_TABLE_BYTES,
        )
    }

    pub fn build_with_limit(
        model: MotionModel,
        turning_radius: f64,
        window_radius: f64,
        heading_bins: usize,
        resolution: f64,
        max_bytes: usize,
    ) -> Result<Self, LutError> {
        if !(turning_radius > 0.0) {
            return Err(LutError::BadRadius(turning_radius));
        }
        if heading_bins < 8 {
            return Err(LutError::TooFewBins(heading_bins));
        }
        if !(window_radius > 0.0 && resolution > 0.0) {
            return Err(LutError::BadWindow);
        }
        let half = (window_radius / resolution).ceil() as i64;
        let side = (2 * half + 1) as usize;
        let entries = side * side * heading_bins;
        let bytes = entries * std::mem::size_of::<f64>();
        if bytes > max_bytes {
            return Err(LutError::TooLarge {
                entries,
                bytes,
                limit: max_bytes,
            });
        }
        let origin = PoseSE2::new(0.0, 0.0, 0.0);
        let mut table = Vec::with_capacity(entries);
        for dy in -half..=half {
            for dx in -half..=half {
                for b in 0..heading_bins {
                    let target = PoseSE2::new(
                        dx as f64 * resolution,
                        dy as f64 * resolution,
                        b as f64 * TAU / heading_bins as f64,
                    );
                    table.push(model.distance(&origin, &target, turning_radius));
                }
            }
        }
        Ok(Self {
            model,
            turning_radius,
            window_radius,
            resolution,
            heading_bins,
            half,
            table,
        })
    }

    pub fn model(&self) -> MotionModel {
        self.model
    }

    pub fn turning_radius(&self) -> f64 {
        self.turning_radius
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn heading_bins(&self) -> usize {
        self.heading_bins
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Half-width of the window in cells.
    pub fn half_cells(&self) -> i64 {
        self.half
    }

    #[inline]
    fn index(&self, dx: i64, dy: i64, bin: usize) -> Option<usize> {
        if dx.abs() > self.half || dy.abs() > self.half {
            return None;
        }
        let side = 2 * self.half + 1;
        Some((((dy + self.half) * side + dx + self.half) as usize) * self.heading_bins + bin % self.heading_bins)
    }

    /// Entry for a cell offset and heading bin; `None` outside the window.
    #[inline]
    pub fn get(&self, dx: i64, dy: i64, bin: usize) -> Option<f64> {
        self.index(dx, dy, bin).map(|i| self.table[i])
    }

    /// Distance to `target` expressed in the origin frame, after snapping it
    /// to the nearest cell offset and heading bin.
    pub fn lookup(&self, target: &PoseSE2) -> Option<f64> {
        let dx = (target.x / self.resolution).round() as i64;
        let dy = (target.y / self.resolution).round() as i64;
        self.get(dx, dy, heading_bin(target.theta, self.heading_bins))
    }

    /// Smallest entry within one cell and one heading bin of the snapped
    /// target, a guard against quantization making the lookup overestimate.
    pub fn lookup_lower(&self, target: &PoseSE2) -> Option<f64> {
        let cx = (target.x / self.resolution).round() as i64;
        let cy = (target.y / self.resolution).round() as i64;
        let b = heading_bin(target.theta, self.heading_bins);
        self.index(cx, cy, b)?;
        let n = self.heading_bins;
        let mut best = f64::INFINITY;
        for dy in -1..=1 {
            for dx in -1..=1 {
                for db in [n - 1, 0, 1] {
                    if let Some(v) = self.get(cx + dx, cy + dy, (b + db) % n) {
                        best = best.min(v);
                    }
                }
            }
        }
        Some(best)
    }

    pub fn save(&self, path: &Path) -> Result<(), LutError> {
        let mut buf = Vec::with_capacity(64 + self.table.len() * 8);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&LUT_VERSION.to_le_bytes());
        buf.push(self.model.tag());
        buf.extend_from_slice(&self.turning_radius.to_le_bytes());
        buf.extend_from_slice(&self.window_radius.to_le_bytes());
        buf.extend_from_slice(&(self.heading_bins as u32).to_le_bytes());
        buf.extend_from_slice(&self.resolution.to_le_bytes());
        buf.extend_from_slice(&(self.table.len() as u64).to_le_bytes());
        for v in &self.table {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Loads a table saved by [`save`](Self::save), checking it was built
    /// for exactly these parameters.
    pub fn load(
        path: &Path,
        model: MotionModel,
        turning_radius: f64,
        window_radius: f64,
        heading_bins: usize,
        resolution: f64,
    ) -> Result<Self, LutError> {
        let data = fs::read(path)?;
        let mut r = Reader { data: &data, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(LutError::Corrupt("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != LUT_VERSION {
            return Err(LutError::Version { found: version });
        }
        let tag = r.take(1)?[0];
        let radius = f64::from_le_bytes(r.array()?);
        let window = f64::from_le_bytes(r.array()?);
        let bins = u32::from_le_bytes(r.array()?) as usize;
        let res = f64::from_le_bytes(r.array()?);
        if tag != model.tag()
            || radius.to_bits() != turning_radius.to_bits()
            || window.to_bits() != window_radius.to_bits()
            || bins != heading_bins
            || res.to_bits() != resolution.to_bits()
        {
            return Err(LutError::KeyMismatch);
        }
        let half = (window / res).ceil() as i64;
        let side = (2 * half + 1) as usize;
        let len = u64::from_le_bytes(r.array()?) as usize;
        if len != side * side * bins {
            return Err(LutError::Corrupt(format!(
                "expected {} entries, header says {len}",
                side * side * bins
            )));
        }
        let mut table = Vec::with_capacity(len);
        for _ in 0..len {
            table.push(f64::from_le_bytes(r.array()?));
        }
        if r.pos != data.len() {
            return Err(LutError::Corrupt("trailing bytes".into()));
        }
        Ok(Self {
            model,
            turning_radius,
            window_radius,
            resolution,
            heading_bins,
            half,
            table,
        })
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LutError> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(LutError::Corrupt("truncated".into()));
        }
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], LutError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_zero_and_half_circle() {
        let lut = NonholonomicLut::build(MotionModel::Dubins, 1.0, 3.0, 16, 0.5).unwrap();
        assert_eq!(lut.get(0, 0, 0), Some(0.0));
        // (0, 2R) facing back
        assert!((lut.get(0, 4, 8).unwrap() - PI).abs() < 1e-9);
        assert_eq!(lut.get(7, 0, 0), None);
    }

    #[test]
    fn entries_bound_euclidean() {
        for model in [MotionModel::Dubins, MotionModel::ReedsShepp] {
            let lut = NonholonomicLut::build(model, 0.4, 1.0, 16, 0.1).unwrap();
            let h = lut.half_cells();
            for dy in -h..=h {
                for dx in -h..=h {
                    for b in 0..16 {
                        let e = 0.1 * (dx as f64).hypot(dy as f64);
                        assert!(lut.get(dx, dy, b).unwrap() >= e - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn reeds_shepp_mirror_symmetry() {
        let lut = NonholonomicLut::build(MotionModel::ReedsShepp, 0.4, 1.0, 16, 0.1).unwrap();
        let h = lut.half_cells();
        for dy in -h..=h {
            for dx in -h..=h {
                for b in 0..16 {
                    let m = lut.get(dx, -dy, (16 - b) % 16).unwrap();
                    assert!((lut.get(dx, dy, b).unwrap() - m).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn memory_budget() {
        let err = NonholonomicLut::build_with_limit(MotionModel::Dubins, 1.0, 100.0, 16, 0.05, 1 << 20).unwrap_err();
        assert!(matches!(err, LutError::TooLarge { .. }));
        assert!(err.to_string().contains("bytes"));
    }

    #[test]
    fn persistence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        let lut = NonholonomicLut::build(MotionModel::ReedsShepp, 0.5, 1.0, 16, 0.25).unwrap();
        lut.save(&path).unwrap();
        let back = NonholonomicLut::load(&path, MotionModel::ReedsShepp, 0.5, 1.0, 16, 0.25).unwrap();
        assert_eq!(back, lut);
        assert!(matches!(
            NonholonomicLut::load(&path, MotionModel::Dubins, 0.5, 1.0, 16, 0.25),
            Err(LutError::KeyMismatch)
        ));
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(
            NonholonomicLut::load(&path, MotionModel::ReedsShepp, 0.5, 1.0, 16, 0.25),
            Err(LutError::Corrupt(_))
        ));
    }
}
