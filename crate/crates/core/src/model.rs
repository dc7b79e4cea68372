//! Shared data model: ray states, fronts, run configuration and run output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::StepReport;
use crate::medium::Medium;
use crate::profile::LaunchProfile;

/// One ray at one instant, in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    pub ray_id: usize,
    pub tau: f64,
    pub xi0: f64,
    pub xi: f64,
    pub zeta: f64,
    pub rho_x: f64,
    pub rho_z: f64,
    /// Direction of ρ measured from the ζ axis towards +ξ. Kept alongside the
    /// components so that the rotation update never goes through `atan2`.
    pub theta: f64,
    /// Transported amplitude, fixed at launch.
    pub amp_r: f64,
    pub phase: f64,
    pub g_val: f64,
    pub clamped: bool,
}

impl RayState {
    pub fn launch(ray_id: usize, xi0: f64, amp_r: f64) -> Self {
        Self {
            ray_id,
            tau: 0.0,
            xi0,
            xi: xi0,
            zeta: 0.0,
            rho_x: 0.0,
            rho_z: 1.0,
            theta: 0.0,
            amp_r,
            phase: 0.0,
            g_val: 0.0,
            clamped: false,
        }
    }

    pub fn rho_norm(&self) -> f64 {
        self.rho_x.hypot(self.rho_z)
    }
}

/// Alive rays at a common τ, in launch order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamFront {
    pub tau: f64,
    pub rays: Vec<RayState>,
    /// Arc length along the front through the ray positions.
    pub sigma: Vec<f64>,
}

impl BeamFront {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn min_zeta(&self) -> f64 {
        self.rays.iter().map(|r| r.zeta).fold(f64::INFINITY, f64::min)
    }
}

/// How the momentum update is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceMode {
    /// Rotate ρ in-plane; |ρ| comes from the energy relation.
    #[default]
    TransverseRotation,
    /// Integrate ρ_x directly and rebuild ρ_z from the energy relation.
    Cartesian,
}

/// Where the wave potential comes from during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// Reconstructed from the transported amplitudes on the current front.
    #[default]
    SelfConsistent,
    /// Launch G evaluated in closed form at the current ξ, as a static potential.
    FrozenLaunch,
    /// No wave potential: plain classical rays.
    Disabled,
}

/// Run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub profile: LaunchProfile,
    pub medium: Medium,
    pub n_rays: usize,
    /// Half-width of the launch interval.
    pub span: f64,
    pub d_tau: f64,
    pub zeta_max: f64,
    pub force_mode: ForceMode,
    pub field_mode: FieldMode,
    pub g_blend: f64,
    pub r_floor: f64,
    /// Angular smoothing across neighbouring rays, in units of launch spacing
    /// squared per unit τ. Only active with a self-consistent field.
    pub front_viscosity: f64,
    pub output_stride: usize,
    /// Hard stop on τ. `None` means ten times `zeta_max`.
    pub tau_max: Option<f64>,
}

impl SimConfig {
    pub const DEFAULT_N_RAYS: usize = 101;
    pub const DEFAULT_D_TAU: f64 = 0.1;
    pub const DEFAULT_ZETA_MAX: f64 = 700.0;
    pub const DEFAULT_R_FLOOR: f64 = 1e-6;
    pub const DEFAULT_VISCOSITY: f64 = 0.1;
    pub const DEFAULT_STRIDE: usize = 10;

    /// Defaults for a profile: 101 rays over three beam widths in vacuum.
    pub fn new(profile: LaunchProfile) -> Self {
        let span = profile.default_span();
        Self {
            profile,
            medium: Medium::Vacuum,
            n_rays: Self::DEFAULT_N_RAYS,
            span,
            d_tau: Self::DEFAULT_D_TAU,
            zeta_max: Self::DEFAULT_ZETA_MAX,
            force_mode: ForceMode::default(),
            field_mode: FieldMode::default(),
            g_blend: 0.0,
            r_floor: Self::DEFAULT_R_FLOOR,
            front_viscosity: Self::DEFAULT_VISCOSITY,
            output_stride: Self::DEFAULT_STRIDE,
            tau_max: None,
        }
    }

    /// Spacing between neighbouring rays at launch.
    pub fn launch_spacing(&self) -> f64 {
        2.0 * self.span / (self.n_rays as f64 - 1.0)
    }

    /// Coefficient of the discrete angular Laplacian.
    pub fn viscosity_rate(&self) -> f64 {
        match self.field_mode {
            FieldMode::SelfConsistent => self.front_viscosity / self.launch_spacing().powi(2),
            _ => 0.0,
        }
    }

    pub fn tau_limit(&self) -> f64 {
        self.tau_max.unwrap_or(10.0 * self.zeta_max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_rays < 5 {
            return bad(format!("n_rays must be at least 5, got {}", self.n_rays));
        }
        if !(self.span > 0.0 && self.span.is_finite()) {
            return bad(format!("span must be positive, got {}", self.span));
        }
        if !(self.d_tau > 0.0 && self.d_tau.is_finite()) {
            return bad(format!("d_tau must be positive, got {}", self.d_tau));
        }
        if !(self.zeta_max > 0.0 && self.zeta_max.is_finite()) {
            return bad(format!("zeta_max must be positive, got {}", self.zeta_max));
        }
        if !(0.0..1.0).contains(&self.g_blend) {
            return bad(format!("g_blend must lie in [0, 1), got {}", self.g_blend));
        }
        if !(self.r_floor > 0.0 && self.r_floor < 1.0) {
            return bad(format!("r_floor must lie in (0, 1), got {}", self.r_floor));
        }
        if !(self.front_viscosity >= 0.0 && self.front_viscosity.is_finite()) {
            return bad(format!("front_viscosity must be non-negative, got {}", self.front_viscosity));
        }
        if self.viscosity_rate() * self.d_tau > 0.5 {
            return bad(format!(
                "front_viscosity {} is too stiff for d_tau {} at launch spacing {}",
                self.front_viscosity,
                self.d_tau,
                self.launch_spacing()
            ));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        if let Some(t) = self.tau_max {
            if !(t > 0.0) {
                return bad(format!("tau_max must be positive, got {t}"));
            }
        }
        self.profile.validate()?;
        self.medium.validate()?;
        Ok(())
    }
}

/// Neighbouring rays whose order along the front reversed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub step: usize,
    pub tau: f64,
    pub ray_a: usize,
    pub ray_b: usize,
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetireReason {
    Crossed,
    TurnedBack,
    NonFinite,
    OutsideMedium,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Retirement {
    pub step: usize,
    pub tau: f64,
    pub ray_id: usize,
    pub reason: RetireReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Fewer than three rays left alive.
    FrontCollapse,
    /// `tau_max` reached before every ray passed `zeta_max`.
    TauLimit,
}

/// Output of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    /// Per launched ray (indexed by `ray_id`): states every `output_stride`
    /// steps, plus the final state at retirement or termination.
    pub samples: Vec<Vec<RayState>>,
    pub drift: Vec<StepReport>,
    pub crossings: Vec<Crossing>,
    pub retirements: Vec<Retirement>,
    pub status: RunStatus,
    pub steps: usize,
}

impl TrajectorySet {
    /// Transverse position of a ray where it passes `zeta`, by cubic Hermite
    /// interpolation between the bracketing samples with slopes ρ_x/ρ_z.
    pub fn xi_at(&self, ray_id: usize, zeta: f64) -> Option<f64> {
        let s = self.samples.get(ray_id)?;
        let k = s.windows(2).position(|w| w[0].zeta <= zeta && zeta <= w[1].zeta)?;
        let (a, b) = (&s[k], &s[k + 1]);
        let dz = b.zeta - a.zeta;
        if dz <= 0.0 {
            return Some(a.xi);
        }
        let t = (zeta - a.zeta) / dz;
        let (ma, mb) = (a.rho_x / a.rho_z * dz, b.rho_x / b.rho_z * dz);
        let t2 = t * t;
        let t3 = t2 * t;
        // Written relative to a.xi so that a straight ray comes back exactly.
        Some(a.xi + (-2.0 * t3 + 3.0 * t2) * (b.xi - a.xi) + (t3 - 2.0 * t2 + t) * ma + (t3 - t2) * mb)
    }

    /// Largest ζ reached by any ray.
    pub fn zeta_extent(&self) -> f64 {
        self.samples.iter().filter_map(|s| s.last()).map(|r| r.zeta).fold(0.0, f64::max)
    }

    pub fn final_states(&self) -> impl Iterator<Item = &RayState> {
        self.samples.iter().filter_map(|s| s.last())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> LaunchProfile {
        LaunchProfile::Gaussian { epsilon: 0.1 }
    }

    #[test]
    fn defaults_follow_three_beam_widths() {
        let cfg = SimConfig::new(gaussian());
        assert_eq!(cfg.n_rays, 101);
        assert!((cfg.span - 30.0).abs() < 1e-12);
        assert!((cfg.launch_spacing() - 0.6).abs() < 1e-12);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = SimConfig::new(gaussian());
        type Mutation = Box<dyn Fn(&mut SimConfig)>;
        let cases: Vec<Mutation> = vec![
            Box::new(|c| c.n_rays = 2),
            Box::new(|c| c.n_rays = 4),
            Box::new(|c| c.d_tau = 0.0),
            Box::new(|c| c.g_blend = 1.0),
            Box::new(|c| c.g_blend = -0.1),
            Box::new(|c| c.r_floor = 0.0),
            Box::new(|c| c.r_floor = 1.0),
            Box::new(|c| c.span = -1.0),
            Box::new(|c| c.output_stride = 0),
            Box::new(|c| c.front_viscosity = 10.0),
        ];
        for tweak in cases {
            let mut c = base.clone();
            tweak(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn viscosity_is_off_outside_self_consistent_mode() {
        let mut cfg = SimConfig::new(gaussian());
        assert!(cfg.viscosity_rate() > 0.0);
        cfg.field_mode = FieldMode::Disabled;
        assert_eq!(cfg.viscosity_rate(), 0.0);
    }

    #[test]
    fn hermite_interpolation_is_exact_for_cubics() {
        // ξ(ζ) = ζ³/1000 - ζ, slope 3ζ²/1000 - 1.
        let mk = |z: f64| {
            let slope = 3.0 * z * z / 1000.0 - 1.0;
            let mut r = RayState::launch(0, 0.0, 1.0);
            r.zeta = z;
            r.xi = z * z * z / 1000.0 - z;
            r.rho_z = 1.0 / (1.0 + slope * slope).sqrt();
            r.rho_x = slope * r.rho_z;
            r
        };
        let set = TrajectorySet {
            samples: vec![vec![mk(0.0), mk(2.0), mk(5.0)]],
            drift: vec![],
            crossings: vec![],
            retirements: vec![],
            status: RunStatus::Completed,
            steps: 0,
        };
        for z in [0.0, 1.3, 2.0, 4.4, 5.0] {
            let want = z * z * z / 1000.0 - z;
            assert!((set.xi_at(0, z).unwrap() - want).abs() < 1e-12);
        }
        assert_eq!(set.xi_at(0, 5.1), None);
    }
}
