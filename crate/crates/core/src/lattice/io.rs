//! Control-set text format.
//!
//! ```text
//! kinoplan-control-set 1
//! resolution 0.05
//! turning_radius 1
//! headings 16
//! heading 0 0 1 0                 # bin, angle (rad), defining cell offset i j
//! ...
//! primitives 64
//! primitive 0 0 0 0 0.05 0 2      # id, start bin, end bin, turn, length, reversed, pose count
//! pose 0 0 0                      # x y theta, meters relative to the start cell center
//! pose 0.05 0 0
//! ...
//! end
//! ```
//!
//! Blank lines and `#` comments are ignored. Floats are written in shortest
//! round-trip form. The heading offset columns are informational and
//! optional on input.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{gcd, ControlSet};
use crate::geometry::{angle_diff, MotionPrimitive, PoseSE2};

pub const CONTROL_SET_VERSION: u32 = 1;
const MAGIC: &str = "kinoplan-control-set";

#[derive(Debug, Error)]
pub enum ControlSetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("control set version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("invalid control set: {0}")]
    Invariant(String),
}

/// Smallest cell offset pointing exactly along `angle`, if any is short.
fn heading_offset(angle: f64) -> Option<(i64, i64)> {
    let mut best: Option<(i64, (i64, i64))> = None;
    for a in -8i64..=8 {
        for b in -8i64..=8 {
            if (a, b) == (0, 0) || gcd(a.abs(), b.abs()) != 1 {
                continue;
            }
            if angle_diff((b as f64).atan2(a as f64), angle).abs() < 1e-12 {
                let n = a * a + b * b;
                if best.is_none_or(|(m, _)| n < m) {
                    best = Some((n, (a, b)));
                }
            }
        }
    }
    best.map(|(_, o)| o)
}

pub fn write_control_set(cs: &ControlSet) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {CONTROL_SET_VERSION}");
    let _ = writeln!(s, "resolution {}", cs.resolution);
    let _ = writeln!(s, "turning_radius {}", cs.turning_radius);
    let _ = writeln!(s, "headings {}", cs.headings.len());
    for (k, h) in cs.headings.iter().enumerate() {
        match heading_offset(*h) {
            Some((i, j)) => _ = writeln!(s, "heading {k} {h} {i} {j}"),
            None => _ = writeln!(s, "heading {k} {h}"),
        }
    }
    let _ = writeln!(s, "primitives {}", cs.primitives.len());
    for p in &cs.primitives {
        let _ = writeln!(
            s,
            "primitive {} {} {} {} {} {} {}",
            p.id,
            p.start_heading_bin,
            p.end_heading_bin,
            p.turn,
            p.length,
            u8::from(p.reversed),
            p.poses.len()
        );
        for q in &p.poses {
            let _ = writeln!(s, "pose {} {} {}", q.x, q.y, q.theta);
        }
    }
    s.push_str("end\n");
    s
}

pub fn save_control_set(cs: &ControlSet, path: impl AsRef<Path>) -> Result<(), ControlSetError> {
    std::fs::write(path, write_control_set(cs))?;
    Ok(())
}

pub fn load_control_set(path: impl AsRef<Path>) -> Result<ControlSet, ControlSetError> {
    parse_control_set(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> ControlSetError {
        ControlSetError::Malformed {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next non-empty line split into fields, which must start with `key`.
    fn record(&mut self, key: &str) -> Result<Vec<&'a str>, ControlSetError> {
        loop {
            let Some((n, raw)) = self.inner.next() else {
                return Err(ControlSetError::Malformed {
                    line: self.line + 1,
                    msg: format!("unexpected end of file, expected `{key}`"),
                });
            };
            self.line = n + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields[0] != key {
                return Err(self.err(format!("expected `{key}`, found `{}`", fields[0])));
            }
            return Ok(fields[1..].to_vec());
        }
    }

    fn parse<T: std::str::FromStr>(&self, fields: &[&str], k: usize, what: &str) -> Result<T, ControlSetError> {
        fields
            .get(k)
            .ok_or_else(|| self.err(format!("missing {what}")))?
            .parse()
            .map_err(|_| self.err(format!("bad {what} `{}`", fields[k])))
    }
}

pub fn parse_control_set(text: &str) -> Result<ControlSet, ControlSetError> {
    let mut r = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let head = r.record(MAGIC)?;
    let version: u32 = r.parse(&head, 0, "version")?;
    if version != CONTROL_SET_VERSION {
        return Err(ControlSetError::Version {
            found: version,
            expected: CONTROL_SET_VERSION,
        });
    }
    let f = r.record("resolution")?;
    let resolution: f64 = r.parse(&f, 0, "resolution")?;
    let f = r.record("turning_radius")?;
    let turning_radius: f64 = r.parse(&f, 0, "turning radius")?;
    let f = r.record("headings")?;
    let n_headings: usize = r.parse(&f, 0, "heading count")?;
    let mut headings = Vec::with_capacity(n_headings);
    for k in 0..n_headings {
        let f = r.record("heading")?;
        let idx: usize = r.parse(&f, 0, "heading index")?;
        if idx != k {
            return Err(r.err(format!("heading index {idx}, expected {k}")));
        }
        headings.push(r.parse::<f64>(&f, 1, "heading angle")?);
    }
    let f = r.record("primitives")?;
    let n_prims: usize = r.parse(&f, 0, "primitive count")?;
    let mut primitives = Vec::with_capacity(n_prims);
    for _ in 0..n_prims {
        let f = r.record("primitive")?;
        let id: usize = r.parse(&f, 0, "id")?;
        let start: usize = r.parse(&f, 1, "start bin")?;
        let end: usize = r.parse(&f, 2, "end bin")?;
        let turn: i8 = r.parse(&f, 3, "turn sign")?;
        let length: f64 = r.parse(&f, 4, "length")?;
        let reversed: u8 = r.parse(&f, 5, "reversed flag")?;
        let n_poses: usize = r.parse(&f, 6, "pose count")?;
        let mut poses = Vec::with_capacity(n_poses);
        for _ in 0..n_poses {
            let f = r.record("pose")?;
            poses.push(PoseSE2 {
                x: r.parse(&f, 0, "x")?,
                y: r.parse(&f, 1, "y")?,
                theta: r.parse(&f, 2, "theta")?,
            });
        }
        primitives.push(MotionPrimitive {
            id,
            start_heading_bin: start,
            end_heading_bin: end,
            poses,
            length,
            turn,
            reversed: reversed != 0,
        });
    }
    r.record("end")?;
    let cs = ControlSet::new(resolution, turning_radius, headings, primitives);
    validate(&cs)?;
    Ok(cs)
}

/// Structural checks every control set must pass before planning with it.
pub(crate) fn validate(cs: &ControlSet) -> Result<(), ControlSetError> {
    let bad = |m: String| Err(ControlSetError::Invariant(m));
    if !(cs.resolution > 0.0 && cs.resolution.is_finite()) || !(cs.turning_radius >= 0.0) {
        return bad("resolution must be positive and turning radius non-negative".into());
    }
    if cs.headings.is_empty() || cs.headings.windows(2).any(|w| !(w[1] > w[0])) {
        return bad("headings must be non-empty, sorted and distinct".into());
    }
    let bins = cs.headings.len();
    for p in &cs.primitives {
        if p.start_heading_bin >= bins || p.end_heading_bin >= bins {
            return bad(format!("primitive {} has a heading bin out of range", p.id));
        }
        if p.poses.is_empty() || !(p.length > 0.0) || !(-1..=1).contains(&p.turn) {
            return bad(format!("primitive {} has no poses, bad length or bad turn", p.id));
        }
        let s = p.poses[0];
        if s.x.abs() > 1e-9 || s.y.abs() > 1e-9 || angle_diff(s.theta, cs.headings[p.start_heading_bin]).abs() > 1e-9 {
            return bad(format!(
                "primitive {} does not start at the origin on its heading",
                p.id
            ));
        }
        let e = p.end_pose();
        let (fi, fj) = (e.x / cs.resolution, e.y / cs.resolution);
        if (fi - fi.round()).abs() > 1e-6 || (fj - fj.round()).abs() > 1e-6 {
            return bad(format!("primitive {} ends off a cell center", p.id));
        }
        if angle_diff(e.theta, cs.headings[p.end_heading_bin]).abs() > 1e-9 {
            return bad(format!("primitive {} end heading disagrees with its bin", p.id));
        }
    }
    for h in 0..bins {
        if cs.primitives_for(h).is_empty() {
            return bad(format!("heading {h} has no primitives"));
        }
    }
    Ok(())
}
