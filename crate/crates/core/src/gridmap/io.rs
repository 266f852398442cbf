//! Binary PGM (P5) maps with a `.meta` text sidecar.
//!
//! Sidecar grammar, one `key: value` per line, `#` starts a comment:
//!
//! ```text
//! resolution: 0.05
//! origin: -10.0 -10.0
//! negate: 0
//! mode: scale        # optional; `scale` (default) or `raw`
//! ```
//!
//! In `scale` mode pixel 0 is lethal, 255 is free and values in between map
//! linearly (darker is costlier) onto `1..=253`. `raw` mode stores cost bytes
//! verbatim and is what [`save_map`] writes, so every cost value round-trips.
//! Image row 0 is the top of the map (largest `j`).

use std::fs;
use std::path::{Path, PathBuf};

use super::{Costmap, MapError, C_MAX, FREE, LETHAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PixelMode {
    #[default]
    Scale,
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapMeta {
    pub resolution: f64,
    pub origin: (f64, f64),
    pub negate: bool,
    pub mode: PixelMode,
}

fn io_err(path: &Path, source: std::io::Error) -> MapError {
    MapError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> MapError {
    MapError::Corrupt {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Sidecar path for a map: `<name>.meta` beside `<name>.pgm`.
pub fn meta_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("meta")
}

fn pgm_path(path: &Path) -> PathBuf {
    match path.extension() {
        Some(e) if e == "pgm" => path.to_path_buf(),
        Some(e) if e == "meta" => path.with_extension("pgm"),
        _ => {
            let mut name = path.as_os_str().to_owned();
            name.push(".pgm");
            PathBuf::from(name)
        }
    }
}

pub fn parse_meta(text: &str, path: &Path) -> Result<MapMeta, MapError> {
    let mut resolution = None;
    let mut origin = None;
    let mut negate = false;
    let mut mode = PixelMode::Scale;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| corrupt(path, format!("line {}: expected `key: value`", lineno + 1)))?;
        let value = value.trim();
        let bad = |what: &str| corrupt(path, format!("line {}: invalid {what} `{value}`", lineno + 1));
        match key.trim() {
            "resolution" => resolution = Some(value.parse::<f64>().map_err(|_| bad("resolution"))?),
            "origin" => {
                let parts: Vec<f64> = value
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("origin"))?;
                if parts.len() != 2 {
                    return Err(bad("origin"));
                }
                origin = Some((parts[0], parts[1]));
            }
            "negate" => {
                negate = match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("negate")),
                }
            }
            "mode" => {
                mode = match value {
                    "scale" => PixelMode::Scale,
                    "raw" => PixelMode::Raw,
                    _ => return Err(bad("mode")),
                }
            }
            other => return Err(corrupt(path, format!("line {}: unknown key `{other}`", lineno + 1))),
        }
    }
    let resolution = resolution.ok_or_else(|| corrupt(path, "missing `resolution`"))?;
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(MapError::NonPositiveResolution(resolution));
    }
    Ok(MapMeta {
        resolution,
        origin: origin.ok_or_else(|| corrupt(path, "missing `origin`"))?,
        negate,
        mode,
    })
}

/// Parsed P5 payload: (width, height, row-major pixels top row first).
fn parse_pgm(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<u8>), MapError> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt(path, "truncated pgm header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| corrupt(path, "non-ascii pgm header"))?);
    }
    if tokens[0] != "P5" {
        return Err(corrupt(path, format!("expected P5 magic, found `{}`", tokens[0])));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| corrupt(path, format!("invalid pgm {what} `{s}`")))
    };
    let width = num(tokens[1], "width")?;
    let height = num(tokens[2], "height")?;
    let maxval = num(tokens[3], "maxval")?;
    if maxval != 255 {
        return Err(corrupt(path, format!("unsupported maxval {maxval}, expected 255")));
    }
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() {
        return Err(MapError::DimensionMismatch {
            expected: width * height,
            actual: 0,
        });
    }
    let payload = &bytes[pos + 1..];
    if payload.len() != width * height {
        return Err(MapError::DimensionMismatch {
            expected: width * height,
            actual: payload.len(),
        });
    }
    Ok((width, height, payload.to_vec()))
}

/// Scale-mode pixel to cost mapping.
pub fn pixel_to_cost(pixel: u8) -> u8 {
    match pixel {
        0 => LETHAL,
        255 => FREE,
        p => {
            let c = (f64::from(C_MAX) * f64::from(255 - p) / 255.0).round() as u8;
            c.clamp(1, C_MAX)
        }
    }
}

pub fn load_map(path: impl AsRef<Path>) -> Result<Costmap, MapError> {
    let pgm = pgm_path(path.as_ref());
    let meta_file = meta_path(&pgm);
    let bytes = fs::read(&pgm).map_err(|e| io_err(&pgm, e))?;
    let meta_text = fs::read_to_string(&meta_file).map_err(|e| io_err(&meta_file, e))?;
    let meta = parse_meta(&meta_text, &meta_file)?;
    let (width, height, pixels) = parse_pgm(&bytes, &pgm)?;
    let mut cells = vec![FREE; width * height];
    for (r, row) in pixels.chunks(width).enumerate() {
        let j = height - 1 - r;
        for (i, &p) in row.iter().enumerate() {
            cells[j * width + i] = match meta.mode {
                PixelMode::Raw => p,
                PixelMode::Scale => pixel_to_cost(if meta.negate { 255 - p } else { p }),
            };
        }
    }
    Costmap::from_cells(width, height, meta.resolution, meta.origin, cells)
}

/// Writes `<name>.pgm` and `<name>.meta` in raw mode (bit-exact round trip).
pub fn save_map(map: &Costmap, path: impl AsRef<Path>) -> Result<(), MapError> {
    let pgm = pgm_path(path.as_ref());
    let meta_file = meta_path(&pgm);
    let (w, h) = (map.width(), map.height());
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for r in 0..h {
        let j = h - 1 - r;
        out.extend_from_slice(&map.cells()[j * w..(j + 1) * w]);
    }
    fs::write(&pgm, out).map_err(|e| io_err(&pgm, e))?;
    let (ox, oy) = map.origin();
    let meta = format!(
        "resolution: {}\norigin: {} {}\nnegate: 0\nmode: raw\n",
        map.resolution(),
        ox,
        oy
    );
    fs::write(&meta_file, meta).map_err(|e| io_err(&meta_file, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::UNKNOWN;

    fn write_scale_map(dir: &Path, name: &str, w: usize, h: usize, pixels: &[u8], meta: &str) -> PathBuf {
        let pgm = dir.join(format!("{name}.pgm"));
        let mut bytes = format!("P5\n# test\n{w} {h}\n255\n").into_bytes();
        bytes.extend_from_slice(pixels);
        fs::write(&pgm, bytes).unwrap();
        fs::write(dir.join(format!("{name}.meta")), meta).unwrap();
        pgm
    }

    const META: &str = "resolution: 0.05\norigin: 0 0\nnegate: 0\n";

    #[test]
    fn endpoint_mapping() {
        let dir = tempfile::tempdir().unwrap();
        // top row first: pixel (0,top) = 0 → cell (0, 1)
        let pgm = write_scale_map(dir.path(), "m", 2, 2, &[255, 255, 0, 255], META);
        let map = load_map(&pgm).unwrap();
        assert_eq!(map.cost(0, 0), LETHAL);
        assert_eq!(map.cost(1, 0), FREE);
        assert_eq!(map.cost(0, 1), FREE);
        assert_eq!(map.cost(1, 1), FREE);
        assert_eq!(map.resolution(), 0.05);
    }

    #[test]
    fn all_white_is_free() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = write_scale_map(dir.path(), "w", 3, 2, &[255; 6], META);
        assert!(load_map(&pgm).unwrap().cells().iter().all(|&c| c == FREE));
    }

    #[test]
    fn midgray_maps_linearly() {
        // 253 * (255 - 128) / 255 = 126.0078 → 126
        assert_eq!(pixel_to_cost(128), 126);
        assert_eq!(pixel_to_cost(254), 1);
        assert_eq!(pixel_to_cost(1), 252);
    }

    #[test]
    fn negate_inverts_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let meta = "resolution: 0.1\norigin: 1 2\nnegate: 1\n";
        let pgm = write_scale_map(dir.path(), "n", 2, 1, &[0, 255], meta);
        let map = load_map(&pgm).unwrap();
        assert_eq!(map.cost(0, 0), FREE);
        assert_eq!(map.cost(1, 0), LETHAL);
        assert_eq!(map.origin(), (1.0, 2.0));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = write_scale_map(dir.path(), "t", 3, 3, &[255; 5], META);
        assert!(matches!(
            load_map(&pgm),
            Err(MapError::DimensionMismatch { expected: 9, actual: 5 })
        ));
    }

    #[test]
    fn rejects_bad_header_and_meta() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = dir.path().join("bad.pgm");
        fs::write(&pgm, b"P2\n1 1\n255\n0").unwrap();
        fs::write(dir.path().join("bad.meta"), META).unwrap();
        assert!(matches!(load_map(&pgm), Err(MapError::Corrupt { .. })));

        let pgm = write_scale_map(dir.path(), "r", 1, 1, &[255], "resolution: -1\norigin: 0 0\n");
        assert!(matches!(load_map(&pgm), Err(MapError::NonPositiveResolution(_))));

        let pgm = write_scale_map(dir.path(), "o", 1, 1, &[255], "resolution: 1\n");
        assert!(matches!(load_map(&pgm), Err(MapError::Corrupt { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_map(dir.path().join("nope.pgm")),
            Err(MapError::Io { .. })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn save_load_is_bit_exact(
            w in 1usize..20, h in 1usize..20, seed in proptest::prelude::any::<u64>(),
            res in 0.01f64..1.0, ox in -50.0f64..50.0, oy in -50.0f64..50.0,
        ) {
            let mut state = seed;
            let cells: Vec<u8> = (0..w * h).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 56) as u8
            }).collect();
            let map = Costmap::from_cells(w, h, res, (ox, oy), cells).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.pgm");
            save_map(&map, &path).unwrap();
            let back = load_map(&path).unwrap();
            proptest::prop_assert_eq!(back, map);
        }
    }

    #[test]
    fn unknown_survives_round_trip() {
        let map = Costmap::from_cells(2, 1, 0.5, (0.0, 0.0), vec![UNKNOWN, C_MAX]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_map(&map, dir.path().join("u")).unwrap();
        assert_eq!(load_map(dir.path().join("u.pgm")).unwrap(), map);
    }
}
