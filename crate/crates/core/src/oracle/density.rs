//! Flux-weighted ray density at a ζ station.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TrajectorySet;
use crate::oracle::paraxial::FieldSlice;

/// How ray positions are turned into a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Each pair of launch neighbours bounds a tube carrying
    /// `½(R_a² + R_b²) Δξ₀`, spread evenly over the tube's image at the
    /// station.
    #[default]
    RayTube,
    /// Each ray drops `R²(ξ₀) Δξ₀` into the bin it lands in.
    RayCount,
}

/// Normalised histogram over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub zeta: f64,
    pub lo: f64,
    pub hi: f64,
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
}

impl Density {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }
}

/// Density of the run at `zeta_station` in `bins` bins.
///
/// With `range = None` the bins cover the positions occupied by rays at the
/// station. Rays retired before the station are left out.
pub fn density_histogram(
    traj: &TrajectorySet,
    zeta_station: f64,
    bins: usize,
    weighting: Weighting,
    range: Option<(f64, f64)>,
) -> Result<Density> {
    if bins == 0 {
        return Err(Error::Config("density needs at least one bin".into()));
    }
    let extent = traj.zeta_extent();
    if !(zeta_station >= 0.0 && zeta_station <= extent) {
        return Err(Error::Range { station: zeta_station, extent });
    }
    // (ray_id, ξ₀, R, ξ at station)
    let at: Vec<(usize, f64, f64, f64)> = traj
        .samples
        .iter()
        .enumerate()
        .filter_map(|(id, s)| {
            let first = s.first()?;
            traj.xi_at(id, zeta_station).map(|x| (id, first.xi0, first.amp_r, x))
        })
        .collect();
    if at.len() < 2 {
        return Err(Error::Range { station: zeta_station, extent });
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = at.iter().map(|a| a.3).fold(f64::INFINITY, f64::min);
        let hi = at.iter().map(|a| a.3).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    if !(hi > lo) {
        return Err(Error::Range { station: zeta_station, extent });
    }
    let width = (hi - lo) / bins as f64;
    let bin_of = |x: f64| (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
    let mut values = vec![0.0; bins];

    match weighting {
        Weighting::RayTube => {
            for w in at.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                if b.0 != a.0 + 1 {
                    continue;
                }
                let mass = 0.5 * (a.2 * a.2 + b.2 * b.2) * (b.1 - a.1).abs();
                let (x0, x1) = if a.3 <= b.3 { (a.3, b.3) } else { (b.3, a.3) };
                if x1 - x0 <= 0.0 {
                    if x0 >= lo && x0 <= hi {
                        values[bin_of(x0)] += mass;
                    }
                    continue;
                }
                let density = mass / (x1 - x0);
                let (c0, c1) = (x0.max(lo), x1.min(hi));
                if c1 <= c0 {
                    continue;
                }
                for (k, v) in values.iter_mut().enumerate().take(bin_of(c1) + 1).skip(bin_of(c0)) {
                    let (e0, e1) = (lo + k as f64 * width, lo + (k + 1) as f64 * width);
                    let overlap = c1.min(e1) - c0.max(e0);
                    if overlap > 0.0 {
                        *v += density * overlap;
                    }
                }
            }
        }
        Weighting::RayCount => {
            let dx0 = launch_gap(&at);
            for a in &at {
                if a.3 >= lo && a.3 <= hi {
                    values[bin_of(a.3)] += a.2 * a.2 * dx0;
                }
            }
        }
    }
    normalise(&mut values);
    let centers = (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect();
    Ok(Density { zeta: zeta_station, lo, hi, centers, values })
}

fn launch_gap(at: &[(usize, f64, f64, f64)]) -> f64 {
    at.windows(2).filter(|w| w[1].0 == w[0].0 + 1).map(|w| (w[1].1 - w[0].1).abs()).next().unwrap_or(1.0)
}

fn normalise(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    }
}

/// Average the intensity of `slice` over the same bins as a density, and
/// normalise to unit sum.
pub fn bin_intensity(slice: &FieldSlice, lo: f64, hi: f64, bins: usize) -> Density {
    let width = (hi - lo) / bins as f64;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (x, i) in slice.xi_grid.iter().zip(&slice.intensity) {
        if *x >= lo && *x < hi {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            sum[k] += i;
            count[k] += 1;
        }
    }
    let centers: Vec<f64> = (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect();
    let mut values: Vec<f64> = sum.iter().zip(&count).map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 }).collect();
    // Bins narrower than the grid spacing get the intensity at their centre.
    for (k, v) in values.iter_mut().enumerate() {
        if count[k] == 0 {
            *v = sample_linear(slice, centers[k]);
        }
    }
    normalise(&mut values);
    Density { zeta: slice.zeta, lo, hi, centers, values }
}

fn sample_linear(slice: &FieldSlice, x: f64) -> f64 {
    let xs = &slice.xi_grid;
    let j = xs.partition_point(|&g| g <= x);
    if j == 0 || j >= xs.len() {
        return 0.0;
    }
    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    (1.0 - t) * slice.intensity[j - 1] + t * slice.intensity[j]
}
