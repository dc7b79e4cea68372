//! Fixtures shared by the benchmarks in `benches/`.

use wavetrace::{BeamFront, LaunchProfile, SimConfig};

/// The reference algebraic beam, shortened to `zeta_max`.
pub fn algebraic_config(zeta_max: f64) -> SimConfig {
    let mut cfg = SimConfig::new(LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 1 });
    cfg.zeta_max = zeta_max;
    cfg
}

pub fn gaussian_front(n_rays: usize) -> BeamFront {
    LaunchProfile::Gaussian { epsilon: 0.1 }.make_front(n_rays, 30.0).expect("valid front")
}
