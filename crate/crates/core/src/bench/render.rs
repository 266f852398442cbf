//! Map and path pictures: SVG with an embedded map raster, and binary PPM.
//!
//! Both outputs are pure functions of their inputs, byte for byte.

use std::fmt::Write as _;
use std::path::Path as FsPath;

use base64::Engine as _;
use thiserror::Error;

use crate::gridmap::{Costmap, LETHAL, UNKNOWN};
use crate::planners::Path;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
}

const COLORS: [(u8, u8, u8); 6] = [
    (214, 39, 40),
    (31, 119, 180),
    (44, 160, 44),
    (255, 127, 14),
    (148, 103, 189),
    (23, 190, 207),
];

/// Stroke color of the `k`-th path.
pub fn palette(k: usize) -> (u8, u8, u8) {
    COLORS[k % COLORS.len()]
}

fn gray(cost: u8) -> u8 {
    match cost {
        LETHAL => 0,
        UNKNOWN => 128,
        c => 255 - (c as u32 * 180 / 253) as u8,
    }
}

/// Map pixels top row first (world y decreasing).
fn gray_rows(map: &Costmap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut px = Vec::with_capacity(w * h);
    for j in (0..h).rev() {
        px.extend((0..w).map(|i| gray(map.cost(i, j))));
    }
    px
}

/// World point to image coordinates, one unit per cell, y down.
fn to_image(map: &Costmap, x: f64, y: f64) -> (f64, f64) {
    let (ox, oy) = map.origin();
    let res = map.resolution();
    ((x - ox) / res, map.height() as f64 - (y - oy) / res)
}

fn encode_png(map: &Costmap) -> Result<Vec<u8>, RenderError> {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, map.width() as u32, map.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&gray_rows(map))?;
    }
    Ok(bytes)
}

/// SVG of the map with each path as a labelled polyline.
pub fn render_svg(map: &Costmap, paths: &[(&str, &Path)]) -> Result<String, RenderError> {
    let (w, h) = (map.width(), map.height());
    let png = base64::engine::general_purpose::STANDARD.encode(encode_png(map)?);
    let stroke = (w.max(h) as f64 / 400.0).max(0.5);
    let font = (w.max(h) as f64 / 40.0).max(4.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<image width="{w}" height="{h}" style="image-rendering:pixelated" href="data:image/png;base64,{png}"/>"#
    );
    for (k, (label, path)) in paths.iter().enumerate() {
        let (r, g, b) = palette(k);
        let mut pts = String::new();
        for p in &path.poses {
            let (u, v) = to_image(map, p.x, p.y);
            let _ = write!(pts, "{u:.3},{v:.3} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="rgb({r},{g},{b})" stroke-width="{stroke:.3}" points="{}"><title>{}</title></polyline>"#,
            pts.trim_end(),
            escape(label)
        );
    }
    if !paths.is_empty() {
        let line = font * 1.3;
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{:.3}" height="{:.3}" fill="white" fill-opacity="0.8"/>"#,
            font * 12.0,
            line * paths.len() as f64 + font * 0.6
        );
        for (k, (label, _)) in paths.iter().enumerate() {
            let (r, g, b) = palette(k);
            let y = font * 0.3 + line * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{font:.3}" height="{font:.3}" fill="rgb({r},{g},{b})"/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="{font:.3}">{}</text>"#,
                font * 0.3,
                y,
                font * 1.6,
                y + font * 0.85,
                escape(label)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Binary PPM (P6) of the map with the paths drawn one cell wide.
pub fn render_ppm(map: &Costmap, paths: &[&Path]) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut rgb: Vec<u8> = gray_rows(map).iter().flat_map(|&g| [g, g, g]).collect();
    let mut plot = |u: f64, v: f64, c: (u8, u8, u8)| {
        if u < 0.0 || v < 0.0 || u >= w as f64 || v >= h as f64 {
            return;
        }
        let k = 3 * (v as usize * w + u as usize);
        rgb[k..k + 3].copy_from_slice(&[c.0, c.1, c.2]);
    };
    for (k, path) in paths.iter().enumerate() {
        let c = palette(k);
        let pts: Vec<(f64, f64)> = path.poses.iter().map(|p| to_image(map, p.x, p.y)).collect();
        if let [only] = pts.as_slice() {
            plot(only.0, only.1, c);
        }
        for seg in pts.windows(2) {
            let ((u0, v0), (u1, v1)) = (seg[0], seg[1]);
            let n = ((u1 - u0).abs().max((v1 - v0).abs()) * 2.0).ceil().max(1.0) as usize;
            for s in 0..=n {
                let t = s as f64 / n as f64;
                plot(u0 + t * (u1 - u0), v0 + t * (v1 - v0), c);
            }
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend(rgb);
    out
}

pub(crate) fn write_file(path: &FsPath, bytes: &[u8]) -> Result<(), RenderError> {
    std::fs::write(path, bytes).map_err(|source| RenderError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the SVG to `path`.
pub fn save_svg(map: &Costmap, paths: &[(&str, &Path)], path: &FsPath) -> Result<(), RenderError> {
    write_file(path, render_svg(map, paths)?.as_bytes())
}

/// Writes the PPM to `path`.
pub fn save_ppm(map: &Costmap, paths: &[&Path], path: &FsPath) -> Result<(), RenderError> {
    write_file(path, &render_ppm(map, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PoseSE2;
    use crate::planners::SegmentMeta;

    fn straight() -> Path {
        let poses = vec![PoseSE2::new(0.25, 0.25, 0.0), PoseSE2::new(0.75, 0.25, 0.0)];
        Path::from_poses(poses, vec![SegmentMeta::default()])
    }

    #[test]
    fn empty_path_list_is_map_only() {
        let map = Costmap::new(4, 3, 0.25, (0.0, 0.0)).unwrap();
        let svg = render_svg(&map, &[]).unwrap();
        assert!(svg.contains("<image") && !svg.contains("<polyline") && !svg.contains("<text"));
        let ppm = render_ppm(&map, &[]);
        assert!(ppm.starts_with(b"P6\n4 3\n255\n"));
        assert!(ppm[11..].iter().all(|&b| b == 255));
    }

    #[test]
    fn polyline_follows_scaled_poses() {
        let map = Costmap::new(4, 4, 0.25, (0.0, 0.0)).unwrap();
        let svg = render_svg(&map, &[("hybrid", &straight())]).unwrap();
        // x / 0.25 and 4 - y / 0.25
        assert!(svg.contains(r#"points="1.000,3.000 3.000,3.000""#), "{svg}");
        assert!(svg.contains(">hybrid</text>"));
    }

    #[test]
    fn lethal_cells_are_black_and_paths_colored() {
        let mut map = Costmap::new(4, 4, 0.25, (0.0, 0.0)).unwrap();
        map.set_cost(0, 3, LETHAL);
        let ppm = render_ppm(&map, &[&straight()]);
        let px = |u: usize, v: usize| &ppm[11 + 3 * (v * 4 + u)..11 + 3 * (v * 4 + u) + 3];
        assert_eq!(px(0, 0), [0, 0, 0]);
        let c = palette(0);
        assert_eq!(px(2, 3), [c.0, c.1, c.2]);
    }
}
