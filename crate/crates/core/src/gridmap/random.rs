use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Costmap, MapError, LETHAL};

/// Accepted deviation of the lethal fraction from the requested density.
pub const DENSITY_TOLERANCE: f64 = 0.005;
const MAX_ATTEMPTS: usize = 200_000;

#[derive(Debug, Error)]
pub enum RandomMapError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("obstacle density must be in [0, 1), got {0}")]
    DensityOutOfRange(f64),
    #[error("invalid obstacle size range {0:?}")]
    BadSizeRange((f64, f64)),
    #[error("could not reach density {requested} (stuck at {reached:.4}) after {attempts} placements")]
    Infeasible {
        requested: f64,
        reached: f64,
        attempts: usize,
    },
}

/// Random map of axis-aligned rectangular obstacles surrounded by a lethal
/// wall, deterministic in `seed`.
///
/// Rectangles with side lengths uniform in `obstacle_size_range` are dropped
/// until the lethal fraction (walls included) reaches `obstacle_density`;
/// placements that would overshoot it by more than [`DENSITY_TOLERANCE`] are
/// rejected.
pub fn generate_random_map(
    width_m: f64,
    height_m: f64,
    resolution: f64,
    obstacle_density: f64,
    obstacle_size_range: (f64, f64),
    seed: u64,
) -> Result<Costmap, RandomMapError> {
    if !(0.0..1.0).contains(&obstacle_density) {
        return Err(RandomMapError::DensityOutOfRange(obstacle_density));
    }
    let (lo, hi) = obstacle_size_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(RandomMapError::BadSizeRange(obstacle_size_range));
    }
    if !(resolution > 0.0) {
        return Err(MapError::NonPositiveResolution(resolution).into());
    }
    let w = (width_m / resolution).round() as usize;
    let h = (height_m / resolution).round() as usize;
    let mut map = Costmap::new(w, h, resolution, (0.0, 0.0))?;
    for i in 0..w {
        map.set_cost(i, 0, LETHAL);
        map.set_cost(i, h - 1, LETHAL);
    }
    for j in 0..h {
        map.set_cost(0, j, LETHAL);
        map.set_cost(w - 1, j, LETHAL);
    }
    let total = (w * h) as f64;
    let mut lethal = map.cells().iter().filter(|&&c| c == LETHAL).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while (lethal as f64) / total < obstacle_density {
        if attempts == MAX_ATTEMPTS {
            return Err(RandomMapError::Infeasible {
                requested: obstacle_density,
                reached: lethal as f64 / total,
                attempts,
            });
        }
        attempts += 1;
        let sw = ((rng.random_range(lo..=hi) / resolution).round() as usize).clamp(1, w);
        let sh = ((rng.random_range(lo..=hi) / resolution).round() as usize).clamp(1, h);
        let i0 = rng.random_range(0..=w - sw);
        let j0 = rng.random_range(0..=h - sh);
        let added = (j0..j0 + sh)
            .flat_map(|j| (i0..i0 + sw).map(move |i| (i, j)))
            .filter(|&(i, j)| map.cost(i, j) != LETHAL)
            .count();
        if (lethal + added) as f64 / total > obstacle_density + DENSITY_TOLERANCE {
            continue;
        }
        for j in j0..j0 + sh {
            for i in i0..i0 + sw {
                map.set_cost(i, j, LETHAL);
            }
        }
        lethal += added;
    }
    Ok(map)
}
