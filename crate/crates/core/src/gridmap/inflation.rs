//! Exponential-decay obstacle inflation over an exact Euclidean distance
//! transform.

use super::{Costmap, C_MAX, LETHAL};

/// Returns a copy of `map` with costs raised around lethal cells.
///
/// Cells within `inscribed_radius` of a lethal cell get [`C_MAX`]; further out
/// the cost is `round(C_MAX * exp(-decay_factor * (d - inscribed_radius)))`.
/// The result is the pointwise maximum with the input, so lethal and unknown
/// cells are untouched.
pub fn inflate(map: &Costmap, inscribed_radius: f64, decay_factor: f64) -> Costmap {
    assert!(inscribed_radius >= 0.0, "inscribed radius must be nonnegative");
    assert!(decay_factor > 0.0, "decay factor must be positive");
    let (w, h) = (map.width(), map.height());
    let sources: Vec<bool> = map.cells().iter().map(|&c| c == LETHAL).collect();
    let mut out = map.clone();
    if !sources.iter().any(|&s| s) {
        return out;
    }
    let dist_sq = squared_distance_transform(&sources, w, h);
    let res = map.resolution();
    let c_max = f64::from(C_MAX);
    for (idx, &d2) in dist_sq.iter().enumerate() {
        let current = map.cost_at_index(idx);
        if current >= C_MAX {
            continue;
        }
        let d = d2.sqrt() * res;
        let value = if d <= inscribed_radius + 1e-12 {
            C_MAX
        } else {
            (c_max * (-decay_factor * (d - inscribed_radius)).exp()).round() as u8
        };
        if value > current {
            out.set_cost(idx % w, idx / w, value);
        }
    }
    out
}

/// Exact squared Euclidean distance (in cells) to the nearest `true` cell,
/// using the separable lower-envelope algorithm of Felzenszwalb and
/// Huttenlocher.
pub(crate) fn squared_distance_transform(sources: &[bool], w: usize, h: usize) -> Vec<f64> {
    const INF: f64 = 1e20;
    let mut grid: Vec<f64> = sources.iter().map(|&s| if s { 0.0 } else { INF }).collect();
    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    // columns
    for i in 0..w {
        for j in 0..h {
            f[j] = grid[j * w + i];
        }
        envelope_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for j in 0..h {
            grid[j * w + i] = d[j];
        }
    }
    // rows
    for j in 0..h {
        f[..w].copy_from_slice(&grid[j * w..(j + 1) * w]);
        envelope_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        grid[j * w..(j + 1) * w].copy_from_slice(&d[..w]);
    }
    grid
}

fn envelope_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let diff = q as f64 - p as f64;
        *out = diff * diff + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::{FREE, UNKNOWN};
    use proptest::prelude::*;

    fn brute_force_sq(sources: &[bool], w: usize, h: usize) -> Vec<f64> {
        let pts: Vec<(usize, usize)> = (0..w * h).filter(|&k| sources[k]).map(|k| (k % w, k / w)).collect();
        (0..w * h)
            .map(|k| {
                let (i, j) = (k % w, k / w);
                pts.iter()
                    .map(|&(a, b)| {
                        let (dx, dy) = (a as f64 - i as f64, b as f64 - j as f64);
                        dx * dx + dy * dy
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn single_source_neighbors() {
        let mut map = Costmap::new(5, 5, 1.0, (0.0, 0.0)).unwrap();
        map.set_cost(2, 2, LETHAL);
        let out = inflate(&map, 0.0, 1.0);
        // 253 * e^-1 = 93.07
        for (i, j) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            assert_eq!(out.cost(i, j), 93);
        }
        // 253 * e^-sqrt(2) = 61.54
        assert_eq!(out.cost(1, 1), 62);
        assert_eq!(out.cost(2, 2), LETHAL);
    }

    #[test]
    fn inscribed_cells_get_cmax() {
        let mut map = Costmap::new(7, 7, 0.5, (0.0, 0.0)).unwrap();
        map.set_cost(3, 3, LETHAL);
        let out = inflate(&map, 1.0, 3.0);
        assert_eq!(out.cost(1, 3), C_MAX); // d = 1.0
        assert_eq!(out.cost(2, 2), C_MAX); // d = 0.707
        assert!(out.cost(1, 2) < C_MAX); // d = 1.118
    }

    #[test]
    fn huge_decay_only_touches_inscribed() {
        let mut map = Costmap::new(9, 9, 0.1, (0.0, 0.0)).unwrap();
        map.set_cost(4, 4, LETHAL);
        let out = inflate(&map, 0.15, 1e9);
        for j in 0..9 {
            for i in 0..9 {
                let d = (((i as f64 - 4.0).powi(2) + (j as f64 - 4.0).powi(2)).sqrt()) * 0.1;
                let expect = if (i, j) == (4, 4) {
                    LETHAL
                } else if d <= 0.15 {
                    C_MAX
                } else {
                    FREE
                };
                assert_eq!(out.cost(i, j), expect, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn free_map_unchanged() {
        let map = Costmap::new(6, 4, 0.05, (0.0, 0.0)).unwrap();
        assert_eq!(inflate(&map, 0.2, 2.0), map);
    }

    #[test]
    fn unknown_and_higher_costs_preserved() {
        let mut map = Costmap::new(5, 1, 1.0, (0.0, 0.0)).unwrap();
        map.set_cost(0, 0, LETHAL);
        map.set_cost(1, 0, UNKNOWN);
        map.set_cost(3, 0, 200);
        let out = inflate(&map, 0.0, 1.0);
        assert_eq!(out.cost(1, 0), UNKNOWN);
        assert_eq!(out.cost(3, 0), 200);
        assert_eq!(out.cost(2, 0), (253.0f64 * (-2.0f64).exp()).round() as u8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn distance_transform_matches_brute_force(w in 1usize..24, h in 1usize..24, bits in proptest::collection::vec(0u8..10, 24 * 24)) {
            let sources: Vec<bool> = bits[..w * h].iter().map(|&b| b == 0).collect();
            prop_assume!(sources.iter().any(|&s| s));
            let fast = squared_distance_transform(&sources, w, h);
            let slow = brute_force_sq(&sources, w, h);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn inflate_idempotent_and_monotone(
            w in 2usize..20, h in 2usize..20,
            cells in proptest::collection::vec(prop_oneof![8 => Just(0u8), 1 => Just(LETHAL), 1 => 0u8..=253], 400),
            radius in 0.0f64..0.5, decay in 0.5f64..20.0,
        ) {
            let map = Costmap::from_cells(w, h, 0.1, (0.0, 0.0), cells[..w * h].to_vec()).unwrap();
            let once = inflate(&map, radius, decay);
            let twice = inflate(&once, radius, decay);
            prop_assert_eq!(&once, &twice);
            for (a, b) in map.cells().iter().zip(once.cells()) {
                prop_assert!(b >= a);
            }
        }
    }
}
