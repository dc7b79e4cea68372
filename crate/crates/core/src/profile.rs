//! Launch amplitude profiles R(ξ, ζ = 0), their launch G and front construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrange;
use crate::model::{BeamFront, RayState};

/// Amplitude distribution on the launching plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LaunchProfile {
    /// `exp(−ε²ξ²)`.
    Gaussian { epsilon: f64 },
    /// `1 / (1 + (εξ)^{2N})`.
    Algebraic { epsilon: f64, n_exp: u32 },
    /// `base(ξ − offset) + base(ξ + offset)`: two parallel beams.
    DualBeam { offset: f64, base: Box<LaunchProfile> },
    /// Monotone cubic through sorted `(ξ, R)` knots.
    Tabulated(Table),
}

/// Launch G at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchG {
    pub value: f64,
    /// R fell below the amplitude floor and was replaced by it.
    pub clamped: bool,
}

impl LaunchProfile {
    pub fn validate(&self) -> Result<()> {
        let check_eps = |e: f64| {
            if e > 0.0 && e <= 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("epsilon must lie in (0, 1], got {e}")))
            }
        };
        match self {
            LaunchProfile::Gaussian { epsilon } => check_eps(*epsilon),
            LaunchProfile::Algebraic { epsilon, n_exp } => {
                check_eps(*epsilon)?;
                if *n_exp == 0 {
                    return Err(Error::Config("algebraic exponent N must be at least 1".into()));
                }
                Ok(())
            }
            LaunchProfile::DualBeam { offset, base } => {
                if !(*offset >= 0.0 && offset.is_finite()) {
                    return Err(Error::Config(format!("dual-beam offset must be non-negative, got {offset}")));
                }
                base.validate()
            }
            LaunchProfile::Tabulated(_) => Ok(()),
        }
    }

    /// Width parameter ε, where the profile has one.
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            LaunchProfile::Gaussian { epsilon } | LaunchProfile::Algebraic { epsilon, .. } => Some(*epsilon),
            LaunchProfile::DualBeam { base, .. } => base.epsilon(),
            LaunchProfile::Tabulated(_) => None,
        }
    }

    /// Three beam widths either side of the beam, or the knot range.
    pub fn default_span(&self) -> f64 {
        match self {
            LaunchProfile::Gaussian { epsilon } | LaunchProfile::Algebraic { epsilon, .. } => 3.0 / epsilon,
            LaunchProfile::DualBeam { offset, base } => offset + base.default_span(),
            LaunchProfile::Tabulated(t) => t.xs[0].abs().min(t.xs[t.xs.len() - 1].abs()),
        }
    }

    /// Largest amplitude of the profile.
    pub fn peak(&self) -> f64 {
        match self {
            LaunchProfile::Gaussian { .. } | LaunchProfile::Algebraic { .. } => 1.0,
            LaunchProfile::DualBeam { offset, .. } => {
                let at = |x: f64| self.eval_r(x).unwrap_or(0.0);
                at(0.0).max(at(*offset))
            }
            LaunchProfile::Tabulated(t) => t.ys.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn eval_r(&self, xi: f64) -> Result<f64> {
        match self {
            LaunchProfile::Gaussian { epsilon } => Ok((-(epsilon * xi).powi(2)).exp()),
            LaunchProfile::Algebraic { epsilon, n_exp } => Ok(1.0 / (1.0 + (epsilon * xi).powi(2 * *n_exp as i32))),
            LaunchProfile::DualBeam { offset, base } => Ok(base.eval_r(xi - offset)? + base.eval_r(xi + offset)?),
            LaunchProfile::Tabulated(t) => Ok(t.eval(xi)?[0]),
        }
    }

    /// `[R, R′, R″, R‴]` at ξ.
    pub fn derivatives(&self, xi: f64) -> Result<[f64; 4]> {
        match self {
            LaunchProfile::Gaussian { epsilon } => {
                let e2 = epsilon * epsilon;
                let r = (-e2 * xi * xi).exp();
                Ok([
                    r,
                    -2.0 * e2 * xi * r,
                    (4.0 * e2 * e2 * xi * xi - 2.0 * e2) * r,
                    (12.0 * e2 * e2 * xi - 8.0 * e2 * e2 * e2 * xi * xi * xi) * r,
                ])
            }
            LaunchProfile::Algebraic { epsilon, n_exp } => {
                let (v, v1, v2, v3) = algebraic_v(*epsilon, *n_exp, xi);
                let r = 1.0 / (1.0 + v);
                Ok([
                    r,
                    -v1 * r * r,
                    -v2 * r * r + 2.0 * v1 * v1 * r * r * r,
                    -v3 * r * r + 6.0 * v1 * v2 * r.powi(3) - 6.0 * v1.powi(3) * r.powi(4),
                ])
            }
            LaunchProfile::DualBeam { offset, base } => {
                let a = base.derivatives(xi - offset)?;
                let b = base.derivatives(xi + offset)?;
                Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
            }
            LaunchProfile::Tabulated(t) => t.eval(xi),
        }
    }

    /// `G₀ = R″/R` on the launching plane, with R replaced by
    /// `r_floor × peak` wherever it falls below that.
    pub fn eval_g0(&self, xi: f64, r_floor: f64) -> Result<LaunchG> {
        let floor = r_floor * self.peak();
        let (r, curvature_ratio, r2) = match self {
            LaunchProfile::Gaussian { epsilon } => {
                let e2 = epsilon * epsilon;
                let r = self.eval_r(xi)?;
                let g = 4.0 * e2 * e2 * xi * xi - 2.0 * e2;
                (r, g, g * r)
            }
            LaunchProfile::Algebraic { epsilon, n_exp } => {
                let (v, v1, v2, _) = algebraic_v(*epsilon, *n_exp, xi);
                let r = 1.0 / (1.0 + v);
                let g = -v2 * r + 2.0 * v1 * v1 * r * r;
                (r, g, g * r)
            }
            LaunchProfile::DualBeam { .. } => {
                let [r, _, r2, _] = self.derivatives(xi)?;
                (r, r2 / r, r2)
            }
            LaunchProfile::Tabulated(t) => {
                let (lo, mid, hi, h_lo, h_hi) = t.stencil(xi)?;
                let r2 = lagrange::second_derivative(lo, mid, hi, h_lo, h_hi);
                let r = t.eval(xi)?[0];
                (r, r2 / r, r2)
            }
        };
        if r < floor {
            Ok(LaunchG { value: r2 / floor, clamped: true })
        } else {
            Ok(LaunchG { value: curvature_ratio, clamped: false })
        }
    }

    /// `dG₀/dξ`, consistent with the clamping in [`LaunchProfile::eval_g0`].
    pub fn eval_dg0(&self, xi: f64, r_floor: f64) -> Result<f64> {
        let floor = r_floor * self.peak();
        if let LaunchProfile::Tabulated(t) = self {
            let h = t.stencil_step();
            let (lo, hi) = (xi - h, xi + h);
            if lo >= t.xs[0] && hi <= t.xs[t.xs.len() - 1] {
                return Ok((self.eval_g0(hi, r_floor)?.value - self.eval_g0(lo, r_floor)?.value) / (2.0 * h));
            }
            return Err(Error::Extrapolation { xi, lo: t.xs[0], hi: t.xs[t.xs.len() - 1] });
        }
        if let LaunchProfile::Gaussian { epsilon } = self {
            let r = self.eval_r(xi)?;
            if r >= floor {
                return Ok(8.0 * epsilon.powi(4) * xi);
            }
        }
        let [r, r1, r2, r3] = self.derivatives(xi)?;
        if r < floor {
            return Ok(r3 / floor);
        }
        let g = r2 / r;
        Ok(r3 / r - g * (r1 / r))
    }

    /// Collimated front of `n_rays` rays uniformly spaced on `[−span, span]`.
    pub fn make_front(&self, n_rays: usize, span: f64) -> Result<BeamFront> {
        if n_rays < 3 {
            return Err(Error::Config(format!("a front needs at least 3 rays, got {n_rays}")));
        }
        if !(span > 0.0) {
            return Err(Error::Config(format!("span must be positive, got {span}")));
        }
        // Built from the centre outwards so that ξ₀ is exactly antisymmetric.
        let m = (n_rays as f64 - 1.0) / 2.0;
        let rays = (0..n_rays)
            .map(|i| {
                let xi0 = span * ((i as f64 - m) / m);
                Ok(RayState::launch(i, xi0, self.eval_r(xi0)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sigma = Vec::with_capacity(n_rays);
        sigma.push(0.0);
        for w in rays.windows(2) {
            let last = sigma[sigma.len() - 1];
            sigma.push(last + (w[1].xi - w[0].xi));
        }
        Ok(BeamFront { tau: 0.0, rays, sigma })
    }
}

/// `v = u^{2N}` with `u = εξ` and its first three ξ-derivatives.
fn algebraic_v(epsilon: f64, n_exp: u32, xi: f64) -> (f64, f64, f64, f64) {
    let u = epsilon * xi;
    let p = 2 * n_exp as i32;
    // c · ε^k · u^{p−k}, with the power skipped when the falling factorial vanishes.
    let term = |k: i32| {
        let c: f64 = (0..k).map(|j| (p - j) as f64).product();
        if c == 0.0 {
            0.0
        } else {
            c * epsilon.powi(k) * u.powi(p - k)
        }
    };
    (u.powi(p), term(1), term(2), term(3))
}

/// Monotone cubic interpolant through sorted knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Knots", into = "Knots")]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Knots {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Knots> for Table {
    type Error = Error;
    fn try_from(k: Knots) -> Result<Self> {
        Table::new(&k.knots)
    }
}

impl From<Table> for Knots {
    fn from(t: Table) -> Self {
        Knots { knots: t.xs.into_iter().zip(t.ys).collect() }
    }
}

impl Table {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 3 {
            return Err(Error::Config(format!("tabulated profile needs at least 3 knots, got {}", knots.len())));
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("tabulated knots must be strictly increasing in xi".into()));
        }
        if ys.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
            return Err(Error::Config("tabulated amplitudes must be positive".into()));
        }
        let n = xs.len();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            m[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { 0.5 * (delta[k - 1] + delta[k]) };
        }
        // Fritsch–Carlson limiter.
        for k in 0..n - 1 {
            if delta[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let (a, b) = (m[k] / delta[k], m[k + 1] / delta[k]);
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[k] = t * a * delta[k];
                m[k + 1] = t * b * delta[k];
            }
        }
        Ok(Self { xs, ys, slopes: m })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// `[R, R′, R″, R‴]` of the interpolant.
    pub fn eval(&self, xi: f64) -> Result<[f64; 4]> {
        let n = self.xs.len();
        let (lo, hi) = (self.xs[0], self.xs[n - 1]);
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Extrapolation { xi, lo, hi });
        }
        let k = self.xs.partition_point(|&x| x <= xi).clamp(1, n - 1) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (xi - self.xs[k]) / h;
        let (y0, y1, m0, m1) = (self.ys[k], self.ys[k + 1], self.slopes[k] * h, self.slopes[k + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let v =
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let d1 = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        let d2 = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1;
        let d3 = 12.0 * y0 + 6.0 * m0 - 12.0 * y1 + 6.0 * m1;
        Ok([v, d1 / h, d2 / (h * h), d3 / (h * h * h)])
    }

    fn stencil_step(&self) -> f64 {
        let min_gap = self.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        (0.5 * min_gap).min(0.1)
    }

    /// Three samples of the interpolant around ξ for a second-derivative
    /// stencil, shifted inwards near the ends of the table.
    fn stencil(&self, xi: f64) -> Result<(f64, f64, f64, f64, f64)> {
        let n = self.xs.len();
        let (lo, hi) = (self.xs[0], self.xs[n - 1]);
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Extrapolation { xi, lo, hi });
        }
        let h = self.stencil_step();
        let c = xi.clamp(lo + h, hi - h);
        let at = |x: f64| self.eval(x).map(|v| v[0]);
        Ok((at(c - h)?, at(c)?, at(c + h)?, h, h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FLOOR: f64 = 1e-6;

    fn gauss() -> LaunchProfile {
        LaunchProfile::Gaussian { epsilon: 0.1 }
    }

    fn lorentz() -> LaunchProfile {
        LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 1 }
    }

    fn dual() -> LaunchProfile {
        LaunchProfile::DualBeam { offset: 20.0, base: Box::new(gauss()) }
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(gauss().eval_r(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(gauss().eval_r(10.0).unwrap(), 0.367_879_441_171_442_3, epsilon = 1e-15);
        assert_abs_diff_eq!(lorentz().eval_r(10.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dual().eval_r(0.0).unwrap(), 2.0 * (-4.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(dual().eval_r(0.0).unwrap(), 0.036_631, epsilon = 1e-6);
    }

    #[test]
    fn launch_g_examples() {
        assert_abs_diff_eq!(gauss().eval_g0(0.0, FLOOR).unwrap().value, -0.02, epsilon = 1e-15);
        let root = 1.0 / (0.1 * 2f64.sqrt());
        assert_abs_diff_eq!(gauss().eval_g0(root, FLOOR).unwrap().value, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lorentz().eval_g0(0.0, FLOOR).unwrap().value, -0.02, epsilon = 1e-15);
        // u = 1: ε²(6 − 2)/4 = ε².
        assert_abs_diff_eq!(lorentz().eval_g0(10.0, FLOOR).unwrap().value, 0.01, epsilon = 1e-15);
    }

    #[test]
    fn launch_g_matches_finite_differences() {
        let h = 0.01;
        for p in [gauss(), lorentz(), LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 3 }, dual()] {
            for i in -300..=300 {
                let x = i as f64 * 0.1;
                let fd = (p.eval_r(x + h).unwrap() - 2.0 * p.eval_r(x).unwrap() + p.eval_r(x - h).unwrap())
                    / (h * h)
                    / p.eval_r(x).unwrap();
                let g = p.eval_g0(x, FLOOR).unwrap();
                assert!(!g.clamped);
                assert!((g.value - fd).abs() <= 1e-6, "{p:?} at {x}: {} vs {fd}", g.value);
            }
        }
    }

    #[test]
    fn launch_g_slope_matches_finite_differences() {
        let h = 1e-3;
        for p in [gauss(), lorentz(), LaunchProfile::Algebraic { epsilon: 0.2, n_exp: 2 }, dual()] {
            for i in -60..=60 {
                let x = i as f64 * 0.5;
                let g = |x: f64| p.eval_g0(x, FLOOR).unwrap().value;
                let fd = (g(x + h) - g(x - h)) / (2.0 * h);
                let d = p.eval_dg0(x, FLOOR).unwrap();
                assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "{p:?} at {x}: {d} vs {fd}");
            }
        }
        // 8 ε⁴ ξ at ξ = 10
        assert_abs_diff_eq!(gauss().eval_dg0(10.0, FLOOR).unwrap(), 8e-3, epsilon = 1e-15);
    }

    #[test]
    fn algebraic_at_origin_is_finite_for_every_exponent() {
        for n in 1..6 {
            let p = LaunchProfile::Algebraic { epsilon: 0.1, n_exp: n };
            for v in p.derivatives(0.0).unwrap() {
                assert!(v.is_finite());
            }
            assert!(p.eval_dg0(0.0, FLOOR).unwrap().is_finite());
        }
    }

    #[test]
    fn deep_tail_is_clamped() {
        let p = LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 4 };
        // R(200) = 1 / (1 + 20^8) ≈ 3.9e-11
        let g = p.eval_g0(200.0, FLOOR).unwrap();
        assert!(g.clamped);
        assert!(g.value.is_finite());
        let [_, _, r2, _] = p.derivatives(200.0).unwrap();
        assert_abs_diff_eq!(g.value, r2 / FLOOR, epsilon = 1e-18);
        assert!(!p.eval_g0(10.0, FLOOR).unwrap().clamped);
    }

    #[test]
    fn front_examples() {
        let f = gauss().make_front(3, 10.0).unwrap();
        let xs: Vec<f64> = f.rays.iter().map(|r| r.xi0).collect();
        assert_eq!(xs, vec![-10.0, 0.0, 10.0]);
        let amps: Vec<f64> = f.rays.iter().map(|r| r.amp_r).collect();
        assert_abs_diff_eq!(amps[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(amps[1], 1.0);
        assert_eq!(amps[0], amps[2]);

        let f = lorentz().make_front(5, 7.0).unwrap();
        for w in f.sigma.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 3.5, epsilon = 1e-14);
        }
        for r in &f.rays {
            assert_eq!((r.zeta, r.rho_x, r.rho_z, r.phase), (0.0, 0.0, 1.0, 0.0));
        }
        assert_eq!(f.tau, 0.0);
    }

    #[test]
    fn front_positions_are_antisymmetric() {
        for n in [5, 6, 101, 202] {
            let f = gauss().make_front(n, 30.0).unwrap();
            for i in 0..n {
                assert_eq!(f.rays[i].xi0, -f.rays[n - 1 - i].xi0);
            }
        }
    }

    #[test]
    fn tabulated_profile() {
        let knots: Vec<(f64, f64)> = (-20..=20).map(|i| (i as f64, gauss().eval_r(i as f64).unwrap())).collect();
        let p = LaunchProfile::Tabulated(Table::new(&knots).unwrap());
        for (x, y) in &knots {
            assert_eq!(p.eval_r(*x).unwrap(), *y);
        }
        assert!((p.eval_r(0.5).unwrap() - gauss().eval_r(0.5).unwrap()).abs() < 2e-3);
        assert!(matches!(p.eval_r(20.5), Err(Error::Extrapolation { .. })));
        let g = p.eval_g0(0.0, FLOOR).unwrap().value;
        assert!((g + 0.02).abs() < 5e-3, "{g}");
        assert!(Table::new(&[(0.0, 1.0), (0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(Table::new(&[(0.0, 1.0), (1.0, -1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn tabulated_constant_is_flat() {
        let p = LaunchProfile::Tabulated(Table::new(&[(-5.0, 2.0), (0.0, 2.0), (5.0, 2.0)]).unwrap());
        for x in [-5.0, -1.3, 0.0, 4.9, 5.0] {
            assert_eq!(p.eval_r(x).unwrap(), 2.0);
            assert_eq!(p.eval_g0(x, FLOOR).unwrap().value, 0.0);
        }
    }

    #[test]
    fn monotone_data_gives_monotone_interpolant() {
        let knots = [(0.0, 1.0), (1.0, 1.1), (2.0, 5.0), (3.0, 5.01), (4.0, 9.0)];
        let t = Table::new(&knots).unwrap();
        let mut prev = 0.0;
        for i in 0..=400 {
            let v = t.eval(i as f64 * 0.01).unwrap()[0];
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn serde_round_trip() {
        for p in [
            gauss(),
            lorentz(),
            dual(),
            LaunchProfile::Tabulated(Table::new(&[(-1.0, 1.0), (0.0, 2.0), (1.0, 1.0)]).unwrap()),
        ] {
            let s = serde_json::to_string(&p).unwrap();
            let q: LaunchProfile = serde_json::from_str(&s).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn validation() {
        assert!(LaunchProfile::Gaussian { epsilon: 0.0 }.validate().is_err());
        assert!(LaunchProfile::Gaussian { epsilon: 1.5 }.validate().is_err());
        assert!(LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 0 }.validate().is_err());
        assert!(LaunchProfile::DualBeam { offset: -1.0, base: Box::new(gauss()) }.validate().is_err());
        assert!(dual().validate().is_ok());
    }

    proptest! {
        #[test]
        fn symmetric_profiles_are_exactly_even(x in -80.0f64..80.0) {
            for p in [gauss(), lorentz(), LaunchProfile::Algebraic { epsilon: 0.3, n_exp: 3 }, dual()] {
                prop_assert_eq!(p.eval_r(x).unwrap(), p.eval_r(-x).unwrap());
                prop_assert_eq!(p.eval_g0(x, FLOOR).unwrap().value, p.eval_g0(-x, FLOOR).unwrap().value);
                prop_assert_eq!(p.eval_dg0(x, FLOOR).unwrap(), -p.eval_dg0(-x, FLOOR).unwrap());
            }
        }
    }
}
