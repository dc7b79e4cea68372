//! Derived quantities read off a finished run.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::TrajectorySet;
use crate::oracle::density::{bin_intensity, density_histogram, Weighting};
use crate::oracle::envelope::gaussian_envelope;
use crate::oracle::paraxial::FieldSlice;
use crate::oracle::peaks::{fringe_positions, DEFAULT_PROMINENCE};

/// Launch-density ratio at which neighbouring rays count as gathered.
pub const GATHERING_COMPRESSION: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatheringKind {
    Compression,
    Crossing,
}

/// First place where rays bunch up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gathering {
    pub step: usize,
    pub tau: f64,
    pub zeta: f64,
    pub xi: Option<f64>,
    pub kind: GatheringKind,
}

/// Earliest step at which two launch neighbours come closer than half their
/// launch gap, or a crossing is recorded, whichever happens first.
pub fn first_gathering(traj: &TrajectorySet) -> Option<Gathering> {
    let compression = traj.drift.iter().find(|r| r.max_compression >= GATHERING_COMPRESSION).map(|r| Gathering {
        step: r.step,
        tau: r.tau,
        zeta: r.compression_zeta,
        xi: Some(r.compression_xi),
        kind: GatheringKind::Compression,
    });
    let crossing = traj.crossings.first().map(|c| Gathering {
        step: c.step,
        tau: c.tau,
        zeta: c.zeta,
        xi: None,
        kind: GatheringKind::Crossing,
    });
    match (compression, crossing) {
        (Some(a), Some(b)) => Some(if b.step < a.step { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Largest values of the per-step monitors over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub max_h_drift: f64,
    pub max_norm_drift: Option<f64>,
    pub max_flux_drift: f64,
    pub max_compression: f64,
}

pub fn drift_summary(traj: &TrajectorySet) -> DriftSummary {
    let mut s = DriftSummary { max_h_drift: 0.0, max_norm_drift: None, max_flux_drift: 0.0, max_compression: 0.0 };
    for r in &traj.drift {
        s.max_h_drift = s.max_h_drift.max(r.max_h_drift);
        s.max_flux_drift = s.max_flux_drift.max(r.max_flux_drift);
        s.max_compression = s.max_compression.max(r.max_compression);
        if let Some(d) = r.max_norm_drift {
            s.max_norm_drift = Some(s.max_norm_drift.unwrap_or(0.0).max(d));
        }
    }
    s
}

/// Relative error `| |ξ| − envelope | / envelope` at `zeta` for every ray with
/// `0 < |ξ₀| ≤ max_xi0` that reaches the station. Returns `(ξ₀, error)`.
pub fn envelope_errors(traj: &TrajectorySet, zeta: f64, epsilon: f64, max_xi0: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (id, s) in traj.samples.iter().enumerate() {
        let Some(first) = s.first() else { continue };
        let xi0 = first.xi0;
        if xi0 == 0.0 || xi0.abs() > max_xi0 {
            continue;
        }
        if let Some(x) = traj.xi_at(id, zeta) {
            let want = gaussian_envelope(xi0, zeta, epsilon)?.abs();
            out.push((xi0, (x.abs() - want).abs() / want));
        }
    }
    Ok(out)
}

/// Peak lists of the trajectory density and the wave intensity at one
/// station, binned identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationComparison {
    pub zeta: f64,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub trajectory_peaks: Vec<f64>,
    pub oracle_peaks: Vec<f64>,
    /// Largest distance between matched peaks, in bin widths.
    pub max_offset_bins: Option<f64>,
    pub agree: bool,
}

/// Peak tolerance for cross-method agreement, in bin widths.
pub const PEAK_TOLERANCE_BINS: f64 = 2.0;

/// Bin the run's density over the occupied range at `slice.zeta`, bin the
/// wave intensity over the same range, and compare their peak lists.
pub fn compare_station(traj: &TrajectorySet, slice: &FieldSlice, bins: usize) -> Result<StationComparison> {
    let density = density_histogram(traj, slice.zeta, bins, Weighting::RayTube, None)?;
    let wave = bin_intensity(slice, density.lo, density.hi, bins);
    let trajectory_peaks = fringe_positions(&density.centers, &density.values, DEFAULT_PROMINENCE);
    let oracle_peaks = fringe_positions(&wave.centers, &wave.values, DEFAULT_PROMINENCE);
    let width = density.bin_width();
    let same_count = trajectory_peaks.len() == oracle_peaks.len();
    let max_offset_bins = (same_count && !trajectory_peaks.is_empty())
        .then(|| trajectory_peaks.iter().zip(&oracle_peaks).map(|(a, b)| (a - b).abs() / width).fold(0.0, f64::max));
    let agree = same_count && max_offset_bins.is_none_or(|d| d <= PEAK_TOLERANCE_BINS);
    Ok(StationComparison {
        zeta: slice.zeta,
        bins,
        lo: density.lo,
        hi: density.hi,
        bin_width: width,
        trajectory_peaks,
        oracle_peaks,
        max_offset_bins,
        agree,
    })
}
