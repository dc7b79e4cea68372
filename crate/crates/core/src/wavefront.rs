//! Reconstruction of G = R″/R and dG/dσ on the advancing front.
//!
//! R is carried unchanged by each ray, so its variation along the front is
//! the only curvature information available. G is the second derivative of
//! R with respect to the arc length σ through the ray positions, divided by
//! R; the longitudinal term is not reconstructed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrange;
use crate::model::BeamFront;

/// Relative spacing floor, in units of the launch spacing.
pub const SPACING_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontGeometry {
    pub sigma: Vec<f64>,
    /// Gap between ray `i` and ray `i + 1`, after flooring.
    pub spacing: Vec<f64>,
    pub tangent: Vec<[f64; 2]>,
    /// Unit vector perpendicular to the momentum, on the same side as the tangent.
    pub normal: Vec<[f64; 2]>,
    /// Index `i` of every neighbour pair `(i, i + 1)` whose order reversed or
    /// which collapsed onto one point.
    pub crossed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GField {
    pub ray_ids: Vec<usize>,
    pub g: Vec<f64>,
    pub dg_dsigma: Vec<f64>,
    pub clamped: Vec<bool>,
    /// Front indices whose reconstruction was not finite.
    pub invalid: Vec<usize>,
    pub blended: bool,
}

impl GField {
    /// A field that is zero everywhere on the front.
    pub fn zero(front: &BeamFront) -> Self {
        let n = front.len();
        Self {
            ray_ids: front.rays.iter().map(|r| r.ray_id).collect(),
            g: vec![0.0; n],
            dg_dsigma: vec![0.0; n],
            clamped: vec![false; n],
            invalid: Vec::new(),
            blended: false,
        }
    }
}

/// Arc length, tangents and normals of the front through the ray positions.
///
/// `launch_spacing` sets the floor `SPACING_FLOOR × launch_spacing` applied
/// to collapsed or reversed gaps.
pub fn front_geometry(front: &BeamFront, launch_spacing: f64) -> Result<FrontGeometry> {
    let n = front.len();
    if n < 3 {
        return Err(Error::FrontCollapse { step: 0, alive: n });
    }
    let h_min = SPACING_FLOOR * launch_spacing;
    let rays = &front.rays;
    let mut spacing = Vec::with_capacity(n - 1);
    let mut crossed = Vec::new();
    for (i, w) in rays.windows(2).enumerate() {
        let (dx, dz) = (w[1].xi - w[0].xi, w[1].zeta - w[0].zeta);
        let chord = dx.hypot(dz);
        // Orientation of the gap against the mean ray direction: the front
        // runs towards +ξ when the rays travel towards +ζ.
        let (mx, mz) = (w[0].theta.sin() + w[1].theta.sin(), w[0].theta.cos() + w[1].theta.cos());
        let orientation = dx * mz - dz * mx;
        if orientation <= 0.0 || chord < h_min {
            crossed.push(i);
            spacing.push(h_min);
        } else {
            spacing.push(chord);
        }
    }
    let mut sigma = Vec::with_capacity(n);
    sigma.push(0.0);
    for h in &spacing {
        let last = sigma[sigma.len() - 1];
        sigma.push(last + h);
    }

    let xs: Vec<f64> = rays.iter().map(|r| r.xi).collect();
    let zs: Vec<f64> = rays.iter().map(|r| r.zeta).collect();
    let tx = lagrange::gradient(&xs, &spacing);
    let tz = lagrange::gradient(&zs, &spacing);
    let tangent: Vec<[f64; 2]> = tx
        .iter()
        .zip(&tz)
        .map(|(&a, &b)| {
            let m = a.hypot(b);
            if m > 0.0 {
                [a / m, b / m]
            } else {
                [1.0, 0.0]
            }
        })
        .collect();
    let normal = rays
        .iter()
        .zip(&tangent)
        .map(|(r, t)| {
            let nv = [r.theta.cos(), -r.theta.sin()];
            if nv[0] * t[0] + nv[1] * t[1] < 0.0 {
                [-nv[0], -nv[1]]
            } else {
                nv
            }
        })
        .collect();
    Ok(FrontGeometry { sigma, spacing, tangent, normal, crossed })
}

/// G on every ray of the front.
///
/// Interior rays use the three-point second derivative of R against σ,
/// divided by `max(R, r_floor × R_max)`. The two end values are extrapolated
/// quadratically from the nearest three interior values. With `prev` and a
/// positive `g_blend`, each value is relaxed towards the previous one of the
/// same ray.
pub fn estimate_g(
    front: &BeamFront,
    geom: &FrontGeometry,
    prev: Option<&GField>,
    r_floor: f64,
    g_blend: f64,
) -> GField {
    let n = front.len();
    let amp: Vec<f64> = front.rays.iter().map(|r| r.amp_r).collect();
    let h = &geom.spacing;
    let r_max = amp.iter().copied().fold(0.0, f64::max);
    let floor = r_floor * r_max;

    let mut g = vec![0.0; n];
    let mut clamped = vec![false; n];
    for i in 1..n - 1 {
        let r2 = lagrange::second_derivative(amp[i - 1], amp[i], amp[i + 1], h[i - 1], h[i]);
        clamped[i] = amp[i] < floor;
        g[i] = r2 / amp[i].max(floor);
    }
    if n >= 4 {
        g[0] = lagrange::extrapolate(g[1], g[2], g[3], h[0], h[1], h[2]);
        g[n - 1] = lagrange::extrapolate(g[n - 2], g[n - 3], g[n - 4], h[n - 2], h[n - 3], h[n - 4]);
    } else {
        g[0] = lagrange::second_derivative(amp[0], amp[1], amp[2], h[0], h[1]) / amp[0].max(floor);
        g[n - 1] = lagrange::second_derivative(amp[0], amp[1], amp[2], h[0], h[1]) / amp[n - 1].max(floor);
    }
    clamped[0] = amp[0] < floor;
    clamped[n - 1] = amp[n - 1] < floor;

    let ray_ids: Vec<usize> = front.rays.iter().map(|r| r.ray_id).collect();
    let mut blended = false;
    if let Some(prev) = prev.filter(|_| g_blend > 0.0) {
        for (i, id) in ray_ids.iter().enumerate() {
            if let Ok(k) = prev.ray_ids.binary_search(id) {
                g[i] = (1.0 - g_blend) * g[i] + g_blend * prev.g[k];
                blended = true;
            }
        }
    }

    let mut field = GField { ray_ids, g, dg_dsigma: Vec::new(), clamped, invalid: Vec::new(), blended };
    field.dg_dsigma = transverse_gradient(&field, geom);
    field.invalid = (0..n).filter(|&i| !(field.g[i].is_finite() && field.dg_dsigma[i].is_finite())).collect();
    field
}

/// dG/dσ by three-point Lagrange differentiation, one-sided at the ends.
pub fn transverse_gradient(field: &GField, geom: &FrontGeometry) -> Vec<f64> {
    lagrange::gradient(&field.g, &geom.spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RayState;
    use crate::profile::LaunchProfile;
    use proptest::prelude::*;

    fn front_from(points: &[(f64, f64)], amps: &[f64]) -> BeamFront {
        let rays = points
            .iter()
            .zip(amps)
            .enumerate()
            .map(|(i, (&(x, z), &a))| {
                let mut r = RayState::launch(i, x, a);
                r.zeta = z;
                r
            })
            .collect();
        BeamFront { tau: 0.0, rays, sigma: vec![] }
    }

    fn straight(xs: &[f64], amps: &[f64]) -> BeamFront {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 0.0)).collect();
        front_from(&pts, amps)
    }

    #[test]
    fn straight_front_geometry() {
        let f = straight(&[0.0, 0.5, 1.0, 1.5, 2.0], &[1.0; 5]);
        let geo = front_geometry(&f, 0.5).unwrap();
        assert_eq!(geo.sigma, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        for (t, nv) in geo.tangent.iter().zip(&geo.normal) {
            assert_eq!(*t, [1.0, 0.0]);
            assert_eq!(*nv, [1.0, -0.0]);
        }
        assert!(geo.crossed.is_empty());
    }

    #[test]
    fn coincident_rays_are_floored_and_flagged() {
        let f = straight(&[0.0, 1.0, 1.0, 2.0], &[1.0; 4]);
        let geo = front_geometry(&f, 1.0).unwrap();
        assert_eq!(geo.crossed, vec![1]);
        assert_eq!(geo.spacing[1], 1e-6);
        assert!(geo.sigma.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn reversed_rays_are_flagged() {
        let f = straight(&[0.0, 1.0, 0.9, 2.0], &[1.0; 4]);
        let geo = front_geometry(&f, 1.0).unwrap();
        assert_eq!(geo.crossed, vec![1]);
    }

    #[test]
    fn too_few_rays() {
        let f = straight(&[0.0, 1.0], &[1.0; 2]);
        assert!(matches!(front_geometry(&f, 1.0), Err(Error::FrontCollapse { alive: 2, .. })));
    }

    #[test]
    fn circular_arc_chords() {
        // Arc of radius 50 centred on (0, -50), sampled every 0.02 rad, rays pointing radially.
        let (rc, d) = (50.0, 0.02);
        let pts: Vec<(f64, f64)> = (-4..=4)
            .map(|k| {
                let a = k as f64 * d;
                (rc * a.sin(), rc * a.cos() - rc)
            })
            .collect();
        let mut f = front_from(&pts, &[1.0; 9]);
        for (k, r) in f.rays.iter_mut().enumerate() {
            r.theta = (k as f64 - 4.0) * d;
        }
        let geo = front_geometry(&f, 1.0).unwrap();
        let want = 2.0 * rc * (d / 2.0).sin();
        for w in geo.sigma.windows(2) {
            assert!((w[1] - w[0] - want).abs() < 1e-12);
        }
        // Tangent is perpendicular to the radial ray direction.
        for (r, t) in f.rays.iter().zip(&geo.tangent).skip(1).take(7) {
            let dot = t[0] * r.theta.sin() + t[1] * r.theta.cos();
            assert!(dot.abs() < 1e-4, "{dot}");
        }
    }

    #[test]
    fn flat_amplitude_gives_zero_field() {
        let f = straight(&[0.0, 1.0, 2.0], &[1.0; 3]);
        let geo = front_geometry(&f, 1.0).unwrap();
        let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
        assert_eq!(gf.g, vec![0.0; 3]);
        assert_eq!(gf.dg_dsigma, vec![0.0; 3]);
    }

    #[test]
    fn quadratic_amplitude() {
        let f = straight(&[-1.0, 0.0, 1.0], &[1.0, 2.0, 5.0]);
        let geo = front_geometry(&f, 1.0).unwrap();
        let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
        assert_eq!(gf.g[1], 1.0);
    }

    #[test]
    fn linear_field_has_unit_gradient() {
        let f = straight(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0; 5]);
        let geo = front_geometry(&f, 1.0).unwrap();
        let mut gf = GField::zero(&f);
        gf.g = geo.sigma.clone();
        for d in transverse_gradient(&gf, &geo) {
            assert_eq!(d, 1.0);
        }
    }

    fn gaussian_front(n: usize, span: f64) -> BeamFront {
        LaunchProfile::Gaussian { epsilon: 0.1 }.make_front(n, span).unwrap()
    }

    #[test]
    fn gaussian_axis_value_at_half_spacing() {
        let f = gaussian_front(121, 30.0);
        let geo = front_geometry(&f, 0.5).unwrap();
        assert!((geo.spacing[0] - 0.5).abs() < 1e-12);
        let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
        assert!((gf.g[60] + 0.02).abs() < 1e-4, "{}", gf.g[60]);
    }

    #[test]
    fn gaussian_gradient_at_ten() {
        let f = gaussian_front(121, 30.0);
        let geo = front_geometry(&f, 0.5).unwrap();
        let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
        let i = 80; // ξ₀ = 10
        assert_eq!(f.rays[i].xi0, 10.0);
        assert!((gf.dg_dsigma[i] - 8e-3).abs() < 8e-5, "{}", gf.dg_dsigma[i]);
    }

    #[test]
    fn launch_error_converges_at_second_order() {
        let p = LaunchProfile::Gaussian { epsilon: 0.1 };
        let err = |n: usize| {
            let f = p.make_front(n, 30.0).unwrap();
            let geo = front_geometry(&f, 60.0 / (n as f64 - 1.0)).unwrap();
            let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
            f.rays
                .iter()
                .zip(&gf.g)
                .skip(1)
                .take(n - 2)
                .map(|(r, g)| (g - p.eval_g0(r.xi, 1e-6).unwrap().value).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(61), err(121));
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn blending_mixes_matching_rays() {
        let f = straight(&[-1.0, 0.0, 1.0], &[1.0, 2.0, 5.0]);
        let geo = front_geometry(&f, 1.0).unwrap();
        let mut prev = GField::zero(&f);
        prev.g = vec![3.0, 3.0, 3.0];
        let gf = estimate_g(&f, &geo, Some(&prev), 1e-6, 0.25);
        assert!(gf.blended);
        assert!((gf.g[1] - (0.75 * 1.0 + 0.25 * 3.0)).abs() < 1e-15);
        let plain = estimate_g(&f, &geo, Some(&prev), 1e-6, 0.0);
        assert!(!plain.blended);
    }

    #[test]
    fn deep_tail_is_clamped() {
        let f = straight(&[0.0, 1.0, 2.0, 3.0], &[1.0, 1e-3, 1e-9, 1e-12]);
        let geo = front_geometry(&f, 1.0).unwrap();
        let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
        assert_eq!(gf.clamped, vec![false, false, true, true]);
        assert!(gf.g.iter().all(|g| g.is_finite()));
        assert!(gf.invalid.is_empty());
    }

    #[test]
    fn symmetric_launch_gives_symmetric_field() {
        for p in [
            LaunchProfile::Gaussian { epsilon: 0.1 },
            LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 1 },
            LaunchProfile::DualBeam { offset: 15.0, base: Box::new(LaunchProfile::Gaussian { epsilon: 0.2 }) },
        ] {
            let f = p.make_front(101, 30.0).unwrap();
            let geo = front_geometry(&f, 0.6).unwrap();
            let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
            for i in 0..101 {
                assert_eq!(gf.g[i], gf.g[100 - i]);
                assert_eq!(gf.dg_dsigma[i], -gf.dg_dsigma[100 - i]);
            }
        }
    }

    proptest! {
        #[test]
        fn exact_on_quadratic_amplitude(
            a in 0.01f64..1.0, b in -1.0f64..1.0, gaps in proptest::collection::vec(0.1f64..2.0, 4..12),
        ) {
            let mut xs = vec![0.0];
            for g in &gaps { xs.push(xs[xs.len() - 1] + g); }
            let c = 0.5 * xs[xs.len() - 1];
            let amps: Vec<f64> = xs.iter().map(|x| a * (x - c) * (x - c) + b * (x - c) + 1.0 + c).collect();
            let f = straight(&xs, &amps);
            let geo = front_geometry(&f, 1.0).unwrap();
            let gf = estimate_g(&f, &geo, None, 1e-6, 0.0);
            for i in 1..xs.len() - 1 {
                let r2 = gf.g[i] * amps[i];
                let scale = amps.iter().copied().fold(1.0, f64::max);
                let h_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert!((r2 - 2.0 * a).abs() <= 1e-13 * scale / (h_min * h_min), "{} vs {}", r2, 2.0 * a);
            }
        }

        #[test]
        fn scaling_amplitudes_leaves_field_unchanged(scale in 1e-3f64..1e3) {
            let p = LaunchProfile::Algebraic { epsilon: 0.1, n_exp: 1 };
            let f = p.make_front(41, 30.0).unwrap();
            let mut s = f.clone();
            for r in &mut s.rays { r.amp_r *= scale; }
            let geo = front_geometry(&f, 1.5).unwrap();
            let a = estimate_g(&f, &geo, None, 1e-6, 0.0);
            let b = estimate_g(&s, &geo, None, 1e-6, 0.0);
            // Relative to the size of the field on this front.
            let size = a.g.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            for (x, y) in a.g.iter().zip(&b.g) {
                prop_assert!((x - y).abs() <= 1e-13 * size, "{} vs {}", x, y);
            }
        }
    }
}
