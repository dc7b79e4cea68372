//! Three-point Lagrange stencils on non-uniform grids.
//!
//! Every stencil takes the two spacings around the centre point rather than
//! absolute abscissae, and is written in divided-difference form. That form
//! returns exactly zero for constant data, and mirrored inputs produce
//! bit-identical (or bit-negated) outputs, which keeps symmetric beams
//! symmetric to round-off.

/// Second derivative of the parabola through `(−h_lo, f_lo)`, `(0, f_mid)`,
/// `(h_hi, f_hi)`. The parabola has constant curvature, so this is also the
/// one-sided value at either outer node.
#[inline]
pub fn second_derivative(f_lo: f64, f_mid: f64, f_hi: f64, h_lo: f64, h_hi: f64) -> f64 {
    let slope_hi = (f_hi - f_mid) / h_hi;
    let slope_lo = (f_mid - f_lo) / h_lo;
    2.0 * (slope_hi - slope_lo) / (h_lo + h_hi)
}

/// First derivative at the centre node of the same parabola.
#[inline]
pub fn first_derivative(f_lo: f64, f_mid: f64, f_hi: f64, h_lo: f64, h_hi: f64) -> f64 {
    let slope_hi = (f_hi - f_mid) / h_hi;
    let slope_lo = (f_mid - f_lo) / h_lo;
    (h_lo * slope_hi + h_hi * slope_lo) / (h_lo + h_hi)
}

/// First derivative at the outer node `f_end` of the parabola through
/// `f_end`, `f_next` (spacing `h_near`) and `f_far` (a further `h_far`),
/// measured in the direction pointing from `f_end` into the grid.
#[inline]
pub fn end_first_derivative(f_end: f64, f_next: f64, f_far: f64, h_near: f64, h_far: f64) -> f64 {
    let slope_near = (f_next - f_end) / h_near;
    let slope_far = (f_far - f_next) / h_far;
    slope_near - h_near * (slope_far - slope_near) / (h_near + h_far)
}

/// Value at distance `h_out` outside the node `f_next`, extrapolated from the
/// parabola through `f_next`, `f_mid` (spacing `h_a`) and `f_far` (a further
/// `h_b`), all ordered moving away from the extrapolation point.
#[inline]
pub fn extrapolate(f_next: f64, f_mid: f64, f_far: f64, h_out: f64, h_a: f64, h_b: f64) -> f64 {
    let slope_a = (f_mid - f_next) / h_a;
    let slope_b = (f_far - f_mid) / h_b;
    let curvature = (slope_b - slope_a) / (h_a + h_b);
    f_next - h_out * slope_a + curvature * h_out * (h_out + h_a)
}

/// First derivative of samples `f` over node spacings `h` (`h[i]` is the gap
/// between nodes `i` and `i+1`), with one-sided stencils at both ends.
pub fn gradient(f: &[f64], h: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert_eq!(h.len() + 1, n, "spacing count must be one less than sample count");
    assert!(n >= 3, "three-point stencil needs at least three samples");
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = first_derivative(f[i - 1], f[i], f[i + 1], h[i - 1], h[i]);
    }
    out[0] = end_first_derivative(f[0], f[1], f[2], h[0], h[1]);
    out[n - 1] = -end_first_derivative(f[n - 1], f[n - 2], f[n - 3], h[n - 2], h[n - 3]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_through_three_points() {
        // R = {1, 2, 5} at σ = {-1, 0, 1} is R = σ² + 2σ + 2.
        assert_eq!(second_derivative(1.0, 2.0, 5.0, 1.0, 1.0), 2.0);
        assert_eq!(first_derivative(1.0, 2.0, 5.0, 1.0, 1.0), 2.0);
    }

    #[test]
    fn constant_data_is_exactly_flat() {
        let v = 0.367_879_441_171_442_3;
        assert_eq!(second_derivative(v, v, v, 0.6000000000000001, 0.5999999999999996), 0.0);
        assert_eq!(first_derivative(v, v, v, 0.31, 0.29), 0.0);
        assert_eq!(end_first_derivative(v, v, v, 0.31, 0.29), 0.0);
    }

    #[test]
    fn end_derivative_of_quadratic() {
        // f = x² at x = 1, 1.5, 3: f'(1) = 2.
        let d = end_first_derivative(1.0, 2.25, 9.0, 0.5, 1.5);
        assert!((d - 2.0).abs() < 1e-14);
        // f = x² at x = 3 (end), 1.5, 1 going inward: slope along -x is -6.
        let d = end_first_derivative(9.0, 2.25, 1.0, 1.5, 0.5);
        assert!((d + 6.0).abs() < 1e-13);
    }

    #[test]
    fn extrapolation_is_exact_for_quadratics() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 0.5;
        // nodes at 0.4, 1.0, 1.7 ; extrapolate to 0.0
        let v = extrapolate(f(0.4), f(1.0), f(1.7), 0.4, 0.6, 0.7);
        assert!((v - f(0.0)).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gradient_of_linear_data_is_exact() {
        let x = [0.0, 0.5, 1.25, 2.0, 3.5];
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let f: Vec<f64> = x.iter().map(|x| 4.0 * x - 1.0).collect();
        for d in gradient(&f, &h) {
            assert!((d - 4.0).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn stencils_exact_on_quadratics(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
            h_lo in 0.05f64..2.0, h_hi in 0.05f64..2.0, x0 in -3.0f64..3.0,
        ) {
            let f = |x: f64| a * x * x + b * x + c;
            let d2 = second_derivative(f(x0 - h_lo), f(x0), f(x0 + h_hi), h_lo, h_hi);
            let d1 = first_derivative(f(x0 - h_lo), f(x0), f(x0 + h_hi), h_lo, h_hi);
            let scale = 1.0 + a.abs() + b.abs() + c.abs();
            let tol = 1e-12 * scale / (h_lo.min(h_hi) * h_lo.min(h_hi));
            prop_assert!((d2 - 2.0 * a).abs() <= tol);
            prop_assert!((d1 - (2.0 * a * x0 + b)).abs() <= tol);
        }

        #[test]
        fn mirrored_inputs_give_mirrored_outputs(
            fl in -2.0f64..2.0, fm in -2.0f64..2.0, fh in -2.0f64..2.0,
            h_lo in 0.05f64..2.0, h_hi in 0.05f64..2.0,
        ) {
            prop_assert_eq!(
                second_derivative(fl, fm, fh, h_lo, h_hi),
                second_derivative(fh, fm, fl, h_hi, h_lo)
            );
            prop_assert_eq!(
                first_derivative(fl, fm, fh, h_lo, h_hi),
                -first_derivative(fh, fm, fl, h_hi, h_lo)
            );
        }
    }
}
