//! Conversion between CGS quantities and the dimensionless beam variables.
//!
//! `p₀ = √(2mE)`, `λ₀ = 2πħ/p₀`, and time is measured in `λ₀/(p₀/m)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant in erg·s.
pub const HBAR_CGS: f64 = 1.0546e-27;

/// Reference scales for one (mass, energy) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub mass: f64,
    /// `p₀ = √(2mE)` in g·cm/s.
    pub p0: f64,
    /// `λ₀ = 2πħ/p₀` in cm.
    pub lambda0: f64,
    /// `λ₀ / (p₀/m)` in s.
    pub t0: f64,
}

impl Scales {
    pub fn new(mass: f64, energy: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::Domain(format!("energy must be positive, got {energy}")));
        }
        let p0 = (2.0 * mass * energy).sqrt();
        let lambda0 = 2.0 * PI * HBAR_CGS / p0;
        let t0 = lambda0 / (p0 / mass);
        Ok(Self { mass, p0, lambda0, t0 })
    }
}

/// Dimensionless `(ξ, ρ, τ)` for a position, momentum and time in CGS units.
pub fn dimensionless_from_physical(mass: f64, energy: f64, x: f64, p: f64, t: f64) -> Result<(f64, f64, f64)> {
    let s = Scales::new(mass, energy)?;
    Ok((x / s.lambda0, p / s.p0, t / s.t0))
}

/// Inverse of [`dimensionless_from_physical`].
pub fn physical_from_dimensionless(mass: f64, energy: f64, xi: f64, rho: f64, tau: f64) -> Result<(f64, f64, f64)> {
    let s = Scales::new(mass, energy)?;
    Ok((xi * s.lambda0, rho * s.p0, tau * s.t0))
}
