//! Small closed-form helpers shared by the exact evaluators.

/// `a^g - b^g` for `a, b >= 0`, without cancellation when `a` is close to `b`.
pub fn pow_diff(a: f64, b: f64, g: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
        return a.powf(g) - b.powf(g);
    }
    let d = a - b;
    if d.abs() < 0.5 * b {
        b.powf(g) * (g * (d / b).ln_1p()).exp_m1()
    } else {
        a.powf(g) - b.powf(g)
    }
}

/// `∫_{lo}^{hi} u^m du` for `0 <= lo <= hi <= ∞`; `+∞` when the integral diverges.
pub fn power_integral(m: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo >= 0.0 && hi >= lo);
    if hi == lo {
        return 0.0;
    }
    let k = m + 1.0;
    if k.abs() < 1e-14 {
        if lo == 0.0 || hi.is_infinite() {
            return f64::INFINITY;
        }
        let d = hi - lo;
        return if d < 0.5 * lo { (d / lo).ln_1p() } else { (hi / lo).ln() };
    }
    if hi.is_infinite() {
        if k > 0.0 {
            return f64::INFINITY;
        }
        return lo.powf(k) / -k;
    }
    if lo == 0.0 {
        if k < 0.0 {
            return f64::INFINITY;
        }
        return hi.powf(k) / k;
    }
    pow_diff(hi, lo, k) / k
}

/// Ordinary least squares fit `y = slope * x + intercept`.
/// Returns `(slope, intercept, max_abs_residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_res = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    Some((slope, intercept, max_res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_diff_far_field() {
        // x^g - (x-h)^g at x = 2^60 has no correct digits when done naively.
        let x = 2f64.powi(60);
        let h = 1024.0;
        let d = pow_diff(x, x - h, 0.25);
        let expected = 0.25 * h * x.powf(-0.75);
        assert!((d / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_integral_cases() {
        assert!((power_integral(0.0, 1.0, 3.0) - 2.0).abs() < 1e-15);
        assert!((power_integral(-1.0, 1.0, 2.0) - 2f64.ln()).abs() < 1e-15);
        assert!((power_integral(-0.5, 0.0, 4.0) - 4.0).abs() < 1e-15);
        assert_eq!(power_integral(-1.5, 0.0, 1.0), f64::INFINITY);
        assert!((power_integral(-2.0, 1.0, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert_eq!(power_integral(-0.5, 1.0, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.3 * x + 2.0).collect();
        let (s, i, r) = linear_fit(&xs, &ys).unwrap();
        assert!((s + 0.3).abs() < 1e-14 && (i - 2.0).abs() < 1e-14 && r < 1e-14);
    }
}
