//! Self-similar spreading of a Gaussian beam.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest ε for which the paraxial spreading law is used.
pub const MAX_PARAXIAL_EPSILON: f64 = 0.3;

/// Dimensionless Rayleigh range `π/ε²`.
pub fn rayleigh_range(epsilon: f64) -> f64 {
    PI / (epsilon * epsilon)
}

/// Transverse position at `zeta` of the Gaussian-beam ray launched at `xi0`:
/// `ξ₀ √(1 + (ζ/ζ_R)²)`.
pub fn gaussian_envelope(xi0: f64, zeta: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= MAX_PARAXIAL_EPSILON) {
        return Err(Error::Domain(format!(
            "epsilon {epsilon} is outside the paraxial range (0, {MAX_PARAXIAL_EPSILON}]"
        )));
    }
    let q = zeta / rayleigh_range(epsilon);
    Ok(xi0 * (1.0 + q * q).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn launch_identity() {
        for e in [0.01, 0.1, 0.3] {
            assert_eq!(gaussian_envelope(7.5, 0.0, e).unwrap(), 7.5);
        }
    }

    #[test]
    fn one_rayleigh_range() {
        let zr = rayleigh_range(0.1);
        assert!((zr - 314.159_265_358_979_3).abs() < 1e-9);
        let x = gaussian_envelope(10.0, zr, 0.1).unwrap();
        assert!((x - 10.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn at_seven_hundred() {
        let x = gaussian_envelope(10.0, 700.0, 0.1).unwrap();
        assert!((x - 24.4232).abs() < 1e-3, "{x}");
    }

    #[test]
    fn rejects_wide_angles() {
        assert!(gaussian_envelope(1.0, 1.0, 0.5).is_err());
        assert!(gaussian_envelope(1.0, 1.0, 0.0).is_err());
    }
}
