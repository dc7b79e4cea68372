//! Peak extraction from sampled intensity or density.

/// Default prominence threshold, relative to the global maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// Positions of the strict local maxima of `values` sampled at `xs`, sorted,
/// keeping only peaks whose topographic prominence is at least
/// `rel_prominence` times the global maximum.
///
/// A flat top counts as one peak at its centre. Single-sample peaks are
/// refined with a three-point parabola. The first and last samples are
/// never peaks.
pub fn fringe_positions(xs: &[f64], values: &[f64], rel_prominence: f64) -> Vec<f64> {
    assert_eq!(xs.len(), values.len(), "positions and values must have the same length");
    let n = values.len();
    if n < 5 {
        return Vec::new();
    }
    let global = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if values[i] <= values[i - 1] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        if j + 1 < n && values[j + 1] < values[i] && prominence(values, i, j) >= rel_prominence * global {
            let x = if i == j { refine(xs, values, i) } else { 0.5 * (xs[i] + xs[j]) };
            peaks.push(x);
        }
        i = j + 1;
    }
    peaks
}

/// Height of the plateau `[a, b]` above the higher of the two lowest points
/// separating it from taller terrain (or from the array ends).
fn prominence(values: &[f64], a: usize, b: usize) -> f64 {
    let h = values[a];
    let mut left = h;
    for k in (0..a).rev() {
        if values[k] > h {
            break;
        }
        left = left.min(values[k]);
    }
    let mut right = h;
    for &v in &values[b + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

fn refine(xs: &[f64], v: &[f64], i: usize) -> f64 {
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return xs[i];
    }
    let delta = 0.5 * (a - c) / denom;
    let step = if delta >= 0.0 { xs[i + 1] - xs[i] } else { xs[i] - xs[i - 1] };
    xs[i] + delta * step
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n as f64 - 1.0)).collect()
    }

    #[test]
    fn unimodal_symmetric() {
        let xs = grid(41, -10.0, 10.0);
        let v: Vec<f64> = xs.iter().map(|x| (-x * x / 8.0).exp()).collect();
        assert_eq!(fringe_positions(&xs, &v, DEFAULT_PROMINENCE), vec![0.0]);
    }

    #[test]
    fn two_equal_peaks() {
        let xs = grid(64, -10.0, 10.0);
        let a = 4.3;
        let v: Vec<f64> = xs.iter().map(|x| (-(x - a).powi(2)).exp() + (-(x + a).powi(2)).exp()).collect();
        let p = fringe_positions(&xs, &v, DEFAULT_PROMINENCE);
        let bin = xs[1] - xs[0];
        assert_eq!(p.len(), 2);
        assert!((p[0] + a).abs() < bin && (p[1] - a).abs() < bin, "{p:?}");
        assert!((p[0] + p[1]).abs() < 1e-12);
    }

    #[test]
    fn small_ripples_are_ignored() {
        let xs = grid(101, -5.0, 5.0);
        let v: Vec<f64> = xs.iter().map(|x| (-x * x).exp() + 0.01 * (20.0 * x).cos().abs()).collect();
        assert_eq!(fringe_positions(&xs, &v, DEFAULT_PROMINENCE).len(), 1);
    }

    #[test]
    fn plateau_is_one_peak_at_its_centre() {
        let xs = grid(9, 0.0, 8.0);
        let v = [0.0, 1.0, 2.0, 3.0, 3.0, 3.0, 2.0, 1.0, 0.0];
        assert_eq!(fringe_positions(&xs, &v, DEFAULT_PROMINENCE), vec![4.0]);
    }

    #[test]
    fn edges_and_short_inputs() {
        let xs = grid(6, 0.0, 5.0);
        assert!(fringe_positions(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0, 0.0], 0.05).is_empty());
        assert!(fringe_positions(&xs[..4], &[0.0, 1.0, 0.0, 0.0], 0.05).is_empty());
        assert!(fringe_positions(&xs, &[0.0; 6], 0.05).is_empty());
    }

    #[test]
    fn parabolic_refinement_recovers_vertex() {
        let xs = grid(11, 0.0, 10.0);
        let v: Vec<f64> = xs.iter().map(|x| 10.0 - (x - 4.3).powi(2)).collect();
        let p = fringe_positions(&xs, &v, 0.05);
        assert_eq!(p.len(), 1);
        assert!((p[0] - 4.3).abs() < 1e-12);
    }
}
