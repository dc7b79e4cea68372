//! Hamiltonian ray tracing for collimated beams, including the wave-potential
//! term `G = ∇²R/R` that bends rays tangentially to the wave front.
//!
//! All dynamics run in dimensionless variables: lengths in units of the
//! vacuum wavelength `λ₀`, momenta in units of `p₀`, and the time-like
//! parameter `τ` in units of `λ₀ / (p₀/m)`. Physical units only appear in
//! [`units`].
//!
//! The crate is organised around the stepping loop in [`integrator::run`]:
//!
//! 1. [`profile`] builds the launch front from a [`LaunchProfile`].
//! 2. [`wavefront`] reconstructs `G` and `dG/dσ` on the current front.
//! 3. [`integrator`] advances every ray by one RK4 step.
//!
//! [`oracle`] holds the independent checks: the Gaussian spreading law, a
//! paraxial split-step solver, flux-weighted ray densities and peak
//! extraction.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod lagrange;
pub mod medium;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod units;
pub mod wavefront;

pub use error::{Error, Result};
pub use integrator::{classical_force, energy_drift, run, step, LaunchReference, StepReport};
pub use medium::{Medium, ScalarField};
pub use model::{
    BeamFront, Crossing, FieldMode, ForceMode, RayState, RetireReason, Retirement, RunStatus, SimConfig, TrajectorySet,
};
pub use profile::{LaunchG, LaunchProfile, Table};
pub use wavefront::{estimate_g, front_geometry, transverse_gradient, FrontGeometry, GField};

/// `1/(8π²)`: coupling of the wave potential in dimensionless form.
pub const WAVE_COUPLING: f64 = 1.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI);
