//! Run configuration files.
//!
//! A config is TOML with the sections `profile`, `medium`, `numerics`,
//! `outputs`, `oracle`, `sweep` and `figure`. Only `profile` is required
//! (and not even that for a profile-only figure). Unknown keys anywhere are
//! errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavetrace::oracle::{ParaxialGrid, Weighting};
use wavetrace::{FieldMode, ForceMode, LaunchProfile, Medium, SimConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub profile: Option<LaunchProfile>,
    #[serde(default)]
    pub medium: Medium,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub oracle: Oracle,
    pub sweep: Option<Sweep>,
    pub figure: Option<Figure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub n_rays: usize,
    /// Half-width of the launch interval; three beam widths when absent.
    pub span: Option<f64>,
    pub d_tau: f64,
    pub zeta_max: f64,
    pub force_mode: ForceMode,
    pub field_mode: FieldMode,
    pub g_blend: f64,
    pub r_floor: f64,
    pub front_viscosity: f64,
    pub output_stride: usize,
    pub tau_max: Option<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_rays: SimConfig::DEFAULT_N_RAYS,
            span: None,
            d_tau: SimConfig::DEFAULT_D_TAU,
            zeta_max: SimConfig::DEFAULT_ZETA_MAX,
            force_mode: ForceMode::default(),
            field_mode: FieldMode::default(),
            g_blend: 0.0,
            r_floor: SimConfig::DEFAULT_R_FLOOR,
            front_viscosity: SimConfig::DEFAULT_VISCOSITY,
            output_stride: SimConfig::DEFAULT_STRIDE,
            tau_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Profiles,
    #[serde(rename = "launchG", alias = "launch_g")]
    LaunchG,
    Trajectories,
    Density,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Profiles => "profiles",
            PlotKind::LaunchG => "launchG",
            PlotKind::Trajectories => "trajectories",
            PlotKind::Density => "density",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// ζ stations written to density.csv.
    pub density_stations: Vec<f64>,
    pub density_bins: usize,
    pub density_weighting: Weighting,
    /// Figures `simulate` renders from the run.
    pub figures: Vec<PlotKind>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            density_stations: vec![200.0, 400.0, 700.0],
            density_bins: 64,
            density_weighting: Weighting::RayTube,
            figures: Vec::new(),
        }
    }
}

/// Settings for `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Oracle {
    pub stations: Vec<f64>,
    pub bins: usize,
    /// Paraxial grid; sized from the profile when absent.
    pub half_width: Option<f64>,
    pub n_points: Option<usize>,
    pub d_zeta: f64,
    pub envelope_max_xi0: f64,
    pub envelope_tolerance: f64,
    pub straight_tolerance: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            stations: vec![200.0, 400.0, 700.0],
            bins: 64,
            half_width: None,
            n_points: None,
            d_zeta: 10.0,
            envelope_max_xi0: 20.0,
            envelope_tolerance: 0.03,
            straight_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub epsilon: Vec<f64>,
}

/// Settings for `plot` driven by a config rather than an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure {
    pub kind: PlotKind,
    /// Output file stem; the kind name when absent.
    pub name: Option<String>,
    /// Curves for `profiles` and `launchG`.
    #[serde(default)]
    pub profiles: Vec<LaunchProfile>,
    #[serde(default = "default_xi_range")]
    pub xi_range: (f64, f64),
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Station for `density`; `zeta_max` when absent.
    pub station: Option<f64>,
}

fn default_xi_range() -> (f64, f64) {
    (-30.0, 30.0)
}

fn default_samples() -> usize {
    601
}

impl RunFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: RunFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.outputs.density_bins == 0 || self.oracle.bins == 0 {
            return bad("bin counts must be positive".into());
        }
        if !(self.oracle.d_zeta > 0.0) {
            return bad("oracle.d_zeta must be positive".into());
        }
        if let Some(f) = &self.figure {
            if f.samples < 2 || !(f.xi_range.1 > f.xi_range.0) {
                return bad("figure needs at least 2 samples over an increasing xi_range".into());
            }
            if matches!(f.kind, PlotKind::Profiles | PlotKind::LaunchG)
                && f.profiles.is_empty()
                && self.profile.is_none()
            {
                return bad(format!("figure kind {} needs figure.profiles or a [profile]", f.kind.name()));
            }
            for p in &f.profiles {
                p.validate().map_err(CliError::invalid)?;
            }
        }
        if let Some(s) = &self.sweep {
            if s.epsilon.is_empty() {
                return bad("sweep.epsilon is empty".into());
            }
        }
        if self.profile.is_some() {
            self.sim_config()?;
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<&LaunchProfile, CliError> {
        self.profile.as_ref().ok_or_else(|| CliError::Config("missing [profile] section".into()))
    }

    /// The resolved and validated run configuration.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let profile = self.profile()?.clone();
        let n = &self.numerics;
        let cfg = SimConfig {
            span: n.span.unwrap_or_else(|| profile.default_span()),
            profile,
            medium: self.medium.clone(),
            n_rays: n.n_rays,
            d_tau: n.d_tau,
            zeta_max: n.zeta_max,
            force_mode: n.force_mode,
            field_mode: n.field_mode,
            g_blend: n.g_blend,
            r_floor: n.r_floor,
            front_viscosity: n.front_viscosity,
            output_stride: n.output_stride,
            tau_max: n.tau_max,
        };
        cfg.validate().map_err(CliError::invalid)?;
        Ok(cfg)
    }

    pub fn paraxial_grid(&self, cfg: &SimConfig) -> ParaxialGrid {
        let auto = ParaxialGrid::covering(&cfg.profile, cfg.span, cfg.zeta_max);
        ParaxialGrid {
            half_width: self.oracle.half_width.unwrap_or(auto.half_width),
            n_points: self.oracle.n_points.unwrap_or(auto.n_points),
        }
    }

    /// SHA-256 of the resolved configuration, independent of the file's
    /// layout and comments.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// `profile` with its width parameter replaced.
pub fn with_epsilon(profile: &LaunchProfile, eps: f64) -> Result<LaunchProfile, CliError> {
    let p = match profile {
        LaunchProfile::Gaussian { .. } => LaunchProfile::Gaussian { epsilon: eps },
        LaunchProfile::Algebraic { n_exp, .. } => LaunchProfile::Algebraic { epsilon: eps, n_exp: *n_exp },
        LaunchProfile::DualBeam { offset, base } => {
            LaunchProfile::DualBeam { offset: *offset, base: Box::new(with_epsilon(base, eps)?) }
        }
        LaunchProfile::Tabulated(_) => {
            return Err(CliError::Config("a tabulated profile has no epsilon to sweep".into()))
        }
    };
    p.validate().map_err(CliError::invalid)?;
    Ok(p)
}
