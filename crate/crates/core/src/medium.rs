//! Media: the classical part of the potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function of (ξ, ζ) with its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarField {
    /// `c0 + cx ξ + cz ζ + ½cxx ξ² + ½czz ζ² + cxz ξζ`.
    Quadratic {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cx: f64,
        #[serde(default)]
        cz: f64,
        #[serde(default)]
        cxx: f64,
        #[serde(default)]
        czz: f64,
        #[serde(default)]
        cxz: f64,
    },
    /// Samples on a uniform grid, `values[iz * nx + ix]`. Bilinear in value;
    /// the gradient is taken by centred differences at the nodes and then
    /// interpolated the same way.
    Grid { xi_min: f64, xi_max: f64, zeta_min: f64, zeta_max: f64, nx: usize, nz: usize, values: Vec<f64> },
}

impl ScalarField {
    pub fn constant(c0: f64) -> Self {
        ScalarField::Quadratic { c0, cx: 0.0, cz: 0.0, cxx: 0.0, czz: 0.0, cxz: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let ScalarField::Grid { xi_min, xi_max, zeta_min, zeta_max, nx, nz, values } = self {
            if *nx < 2 || *nz < 2 {
                return Err(Error::Config("grid field needs at least 2x2 nodes".into()));
            }
            if !(xi_max > xi_min && zeta_max > zeta_min) {
                return Err(Error::Config("grid field bounds must be increasing".into()));
            }
            if values.len() != nx * nz {
                return Err(Error::Config(format!("grid field has {} values, expected {}", values.len(), nx * nz)));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("grid field values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, xi: f64, zeta: f64) -> Result<f64> {
        match self {
            ScalarField::Quadratic { c0, cx, cz, cxx, czz, cxz } => {
                Ok(c0 + cx * xi + cz * zeta + 0.5 * cxx * xi * xi + 0.5 * czz * zeta * zeta + cxz * xi * zeta)
            }
            ScalarField::Grid { values, nx, .. } => {
                let c = self.cell(xi, zeta)?;
                Ok(c.blend(|ix, iz| values[iz * nx + ix]))
            }
        }
    }

    pub fn gradient(&self, xi: f64, zeta: f64) -> Result<[f64; 2]> {
        match self {
            ScalarField::Quadratic { cx, cz, cxx, czz, cxz, .. } => {
                Ok([cx + cxx * xi + cxz * zeta, cz + czz * zeta + cxz * xi])
            }
            ScalarField::Grid { values, nx, nz, xi_min, xi_max, zeta_min, zeta_max } => {
                let c = self.cell(xi, zeta)?;
                let hx = (xi_max - xi_min) / (*nx as f64 - 1.0);
                let hz = (zeta_max - zeta_min) / (*nz as f64 - 1.0);
                let at = |ix: usize, iz: usize| values[iz * nx + ix];
                let dx = |ix: usize, iz: usize| {
                    let (lo, hi) = (ix.saturating_sub(1), (ix + 1).min(nx - 1));
                    (at(hi, iz) - at(lo, iz)) / ((hi - lo) as f64 * hx)
                };
                let dz = |ix: usize, iz: usize| {
                    let (lo, hi) = (iz.saturating_sub(1), (iz + 1).min(nz - 1));
                    (at(ix, hi) - at(ix, lo)) / ((hi - lo) as f64 * hz)
                };
                Ok([c.blend(dx), c.blend(dz)])
            }
        }
    }

    fn cell(&self, xi: f64, zeta: f64) -> Result<Cell> {
        let ScalarField::Grid { xi_min, xi_max, zeta_min, zeta_max, nx, nz, .. } = self else {
            unreachable!("cell lookup on an analytic field")
        };
        if !(xi >= *xi_min && xi <= *xi_max && zeta >= *zeta_min && zeta <= *zeta_max) {
            return Err(Error::Domain(format!(
                "point ({xi}, {zeta}) lies outside the field grid [{xi_min}, {xi_max}] x [{zeta_min}, {zeta_max}]"
            )));
        }
        let locate = |v: f64, lo: f64, hi: f64, n: usize| {
            let s = (v - lo) / (hi - lo) * (n as f64 - 1.0);
            let i = (s.floor() as usize).min(n - 2);
            (i, s - i as f64)
        };
        let (ix, fx) = locate(xi, *xi_min, *xi_max, *nx);
        let (iz, fz) = locate(zeta, *zeta_min, *zeta_max, *nz);
        Ok(Cell { ix, iz, fx, fz })
    }
}

struct Cell {
    ix: usize,
    iz: usize,
    fx: f64,
    fz: f64,
}

impl Cell {
    fn blend(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let (ix, iz, fx, fz) = (self.ix, self.iz, self.fx, self.fz);
        (1.0 - fz) * ((1.0 - fx) * f(ix, iz) + fx * f(ix + 1, iz))
            + fz * ((1.0 - fx) * f(ix, iz + 1) + fx * f(ix + 1, iz + 1))
    }
}

/// The medium rays travel through.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "MediumRepr", into = "MediumRepr")]
pub enum Medium {
    #[default]
    Vacuum,
    /// External potential given as `V/E`.
    Potential { v_over_e: ScalarField },
    /// Refractive index given as `n²`.
    Refractive { n_squared: ScalarField },
}

// Serde lets unit variants of a tagged enum swallow unknown keys, so vacuum
// goes through an empty struct variant.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MediumRepr {
    Vacuum {},
    Potential { v_over_e: ScalarField },
    Refractive { n_squared: ScalarField },
}

impl From<MediumRepr> for Medium {
    fn from(m: MediumRepr) -> Self {
        match m {
            MediumRepr::Vacuum {} => Medium::Vacuum,
            MediumRepr::Potential { v_over_e } => Medium::Potential { v_over_e },
            MediumRepr::Refractive { n_squared } => Medium::Refractive { n_squared },
        }
    }
}

impl From<Medium> for MediumRepr {
    fn from(m: Medium) -> Self {
        match m {
            Medium::Vacuum => MediumRepr::Vacuum {},
            Medium::Potential { v_over_e } => MediumRepr::Potential { v_over_e },
            Medium::Refractive { n_squared } => MediumRepr::Refractive { n_squared },
        }
    }
}

impl Medium {
    pub fn validate(&self) -> Result<()> {
        match self {
            Medium::Vacuum => Ok(()),
            Medium::Potential { v_over_e: f } | Medium::Refractive { n_squared: f } => f.validate(),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Medium::Vacuum)
    }

    /// Classical potential energy per `2E`: `V/2E`, or `(1 − n²)/2`.
    pub fn potential(&self, xi: f64, zeta: f64) -> Result<f64> {
        match self {
            Medium::Vacuum => Ok(0.0),
            Medium::Potential { v_over_e } => Ok(0.5 * v_over_e.value(xi, zeta)?),
            Medium::Refractive { n_squared } => {
                let n2 = n_squared.value(xi, zeta)?;
                if n2 <= 0.0 {
                    return Err(Error::Domain(format!("n² = {n2} at ({xi}, {zeta}) is not positive")));
                }
                Ok(0.5 * (1.0 - n2))
            }
        }
    }

    /// `−∇` of [`Medium::potential`].
    pub fn force(&self, xi: f64, zeta: f64) -> Result<[f64; 2]> {
        match self {
            Medium::Vacuum => Ok([0.0, 0.0]),
            Medium::Potential { v_over_e } => {
                let [gx, gz] = v_over_e.gradient(xi, zeta)?;
                Ok([-0.5 * gx, -0.5 * gz])
            }
            Medium::Refractive { n_squared } => {
                if n_squared.value(xi, zeta)? <= 0.0 {
                    return Err(Error::Domain(format!("n² is not positive at ({xi}, {zeta})")));
                }
                let [gx, gz] = n_squared.gradient(xi, zeta)?;
                Ok([0.5 * gx, 0.5 * gz])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(c0: f64) -> Medium {
        Medium::Potential {
            v_over_e: ScalarField::Quadratic { c0: 0.0, cx: 0.0, cz: 0.0, cxx: 2.0 * c0, czz: 0.0, cxz: 0.0 },
        }
    }

    #[test]
    fn vacuum_has_no_force() {
        assert_eq!(Medium::Vacuum.force(3.0, -7.0).unwrap(), [0.0, 0.0]);
        assert_eq!(Medium::Vacuum.potential(3.0, -7.0).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_potential_pulls_to_axis() {
        // V/E = c0 ξ², so V/2E = c0 ξ²/2 and the force is -c0 ξ.
        let m = harmonic(0.3);
        let f = m.force(2.0, 5.0).unwrap();
        assert!((f[0] + 0.6).abs() < 1e-15);
        assert_eq!(f[1], 0.0);
        assert!((m.potential(2.0, 5.0).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn linear_index_gradient() {
        // n² = 1 - α ζ gives (1 - n²)/2 = α ζ / 2 and force (0, -α/2).
        let alpha = 0.01;
        let m = Medium::Refractive {
            n_squared: ScalarField::Quadratic { c0: 1.0, cx: 0.0, cz: -alpha, cxx: 0.0, czz: 0.0, cxz: 0.0 },
        };
        let f = m.force(1.0, 20.0).unwrap();
        assert_eq!(f[0], 0.0);
        assert!((f[1] + alpha / 2.0).abs() < 1e-16);
    }

    #[test]
    fn non_positive_index_is_a_domain_error() {
        let m = Medium::Refractive { n_squared: ScalarField::constant(-0.5) };
        assert!(matches!(m.potential(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(m.force(0.0, 0.0), Err(Error::Domain(_))));
    }

    fn planar_grid() -> ScalarField {
        // f = 2ξ - 3ζ + 1 on [-2, 2] x [0, 4]
        let (nx, nz) = (5, 9);
        let mut values = Vec::new();
        for iz in 0..nz {
            for ix in 0..nx {
                let (x, z) = (-2.0 + ix as f64, iz as f64 * 0.5);
                values.push(2.0 * x - 3.0 * z + 1.0);
            }
        }
        ScalarField::Grid { xi_min: -2.0, xi_max: 2.0, zeta_min: 0.0, zeta_max: 4.0, nx, nz, values }
    }

    #[test]
    fn grid_field_reproduces_planes() {
        let f = planar_grid();
        f.validate().unwrap();
        for (x, z) in [(-2.0, 0.0), (0.3, 1.7), (2.0, 4.0), (-1.25, 3.9)] {
            assert!((f.value(x, z).unwrap() - (2.0 * x - 3.0 * z + 1.0)).abs() < 1e-13);
            let g = f.gradient(x, z).unwrap();
            assert!((g[0] - 2.0).abs() < 1e-13 && (g[1] + 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_field_outside_is_an_error() {
        let f = planar_grid();
        assert!(matches!(f.value(2.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(f.gradient(0.0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_validation() {
        let ScalarField::Grid { mut values, .. } = planar_grid() else { unreachable!() };
        values.pop();
        let f = ScalarField::Grid { xi_min: -2.0, xi_max: 2.0, zeta_min: 0.0, zeta_max: 4.0, nx: 5, nz: 9, values };
        assert!(matches!(f.validate(), Err(Error::Config(_))));
    }
}
