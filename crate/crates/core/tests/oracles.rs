//! Trajectory runs against the independent references.

use wavetrace::analysis::{compare_station, envelope_errors, first_gathering};
use wavetrace::oracle::*;
use wavetrace::*;

const STATIONS: [f64; 3] = [200.0, 400.0, 700.0];

fn slices(profile: &LaunchProfile, span: f64) -> Vec<FieldSlice> {
    let grid = ParaxialGrid::covering(profile, span, 700.0);
    paraxial_propagate(profile, grid, &STATIONS, 10.0).unwrap()
}

#[test]
fn gaussian_density_and_wave_intensity_agree() {
    let cfg = SimConfig::new(LaunchProfile::Gaussian { epsilon: 0.1 });
    let t = run(&cfg).unwrap();
    for s in slices(&cfg.profile, cfg.span) {
        let c = compare_station(&t, &s, 64).unwrap();
        assert!(c.agree, "{c:?}");
        assert_eq!(c.trajectory_peaks.len(), 1);
        assert!(c.trajectory_peaks[0].abs() < 1e-9, "{c:?}");
    }
}

#[test]
fn gaussian_run_follows_the_spreading_law() {
    let cfg = SimConfig::new(LaunchProfile::Gaussian { epsilon: 0.1 });
    let t = run(&cfg).unwrap();
    assert!(t.crossings.is_empty());
    for zeta in STATIONS {
        let worst = envelope_errors(&t, zeta, 0.1, 20.0).unwrap().iter().map(|e| e.1).fold(0.0, f64::max);
        assert!(worst < 0.03, "ζ = {zeta}: {worst}");
    }
}

#[test]
fn gaussian_wave_width_follows_the_spreading_law() {
    let p = LaunchProfile::Gaussian { epsilon: 0.1 };
    for s in slices(&p, 30.0) {
        // Intensity exp(−2ε²ξ²) falls to 1/e at ξ = 1/(ε√2).
        let want = gaussian_envelope(10.0 / 2f64.sqrt(), s.zeta, 0.1).unwrap();
        let got = s.half_width_at((-1.0f64).exp()).unwrap();
        assert!((got - want).abs() < 0.01 * want, "ζ = {}: {got} vs {want}", s.zeta);
    }
}

#[test]
fn algebraic_density_has_the_wave_peak_count() {
    let cfg = SimConfig::new(LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 1 });
    let t = run(&cfg).unwrap();
    assert!(first_gathering(&t).is_some());
    for s in slices(&cfg.profile, cfg.span) {
        let c = compare_station(&t, &s, 64).unwrap();
        assert_eq!(c.trajectory_peaks.len(), c.oracle_peaks.len(), "{c:?}");
    }
}
