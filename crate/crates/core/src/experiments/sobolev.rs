//! Sobolev-type checks: the pointwise bound `|f| ≤ C·I_k(|∇^k f|)` and the
//! Herz-Sobolev ratio on two-dimensional grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::norms::{annulus_index, HerzTermLedger};
use crate::quad::{integrate, QuadOptions};
use crate::riesz::{riesz_potential_grid_with, GridFunction, RieszParams};

fn one() -> f64 {
    1.0
}

/// Smooth radial test profiles with closed-form derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothFunction {
    /// `a·exp(1 − 1/(1 − r²/R²))` for `r < R`.
    Bump {
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `a·exp(−r²/(2σ²))`.
    Gaussian {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `a·(1 − r²/R²)^m` for `r < R`.
    PolyCap {
        radius: f64,
        power: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl SmoothFunction {
    fn amplitude(&self) -> f64 {
        match *self {
            SmoothFunction::Bump { amplitude, .. }
            | SmoothFunction::Gaussian { amplitude, .. }
            | SmoothFunction::PolyCap { amplitude, .. } => amplitude,
        }
    }

    /// Radius beyond which the profile is zero (or below `e^{-72}` for the
    /// Gaussian).
    pub fn support_radius(&self) -> f64 {
        match *self {
            SmoothFunction::Bump { radius, .. } | SmoothFunction::PolyCap { radius, .. } => radius,
            SmoothFunction::Gaussian { sigma, .. } => 12.0 * sigma,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SmoothFunction::Bump { radius, .. } | SmoothFunction::PolyCap { radius, .. } => radius > 0.0,
            SmoothFunction::Gaussian { sigma, .. } => sigma > 0.0,
        };
        if !ok || !self.amplitude().is_finite() {
            return Err(Error::invalid(format!("invalid test profile {self:?}")));
        }
        Ok(())
    }

    /// `d^k/dx^k` of the profile read as a function of `x ∈ ℝ` (`k = 0` is the value).
    pub fn derivative_1d(&self, x: f64, k: u32) -> Result<f64> {
        let a = self.amplitude();
        match *self {
            SmoothFunction::Gaussian { sigma, .. } => {
                let y = x / sigma;
                // probabilists' Hermite polynomial He_k(y)
                let (mut h0, mut h1) = (1.0, y);
                let he = match k {
                    0 => 1.0,
                    _ => {
                        for j in 1..k {
                            let h2 = y * h1 - j as f64 * h0;
                            h0 = h1;
                            h1 = h2;
                        }
                        h1
                    }
                };
                Ok(a * (-1.0 / sigma).powi(k as i32) * he * (-0.5 * y * y).exp())
            }
            SmoothFunction::PolyCap { radius, power, .. } => {
                if k > power {
                    return Err(Error::invalid(format!(
                        "(1 - r^2/R^2)^{power} has no continuous derivative of order {k}"
                    )));
                }
                if x.abs() >= radius {
                    return Ok(0.0);
                }
                // expand (1 - y²)^m in y = x/R and differentiate k times
                let m = power as usize;
                let mut coef = vec![0.0; 2 * m + 1];
                let mut binom = 1.0;
                for j in 0..=m {
                    coef[2 * j] = if j % 2 == 0 { binom } else { -binom };
                    binom = binom * (m - j) as f64 / (j + 1) as f64;
                }
                let y = x / radius;
                let mut acc = 0.0;
                for (deg, c) in coef.iter().enumerate().skip(k as usize) {
                    let fall: f64 = (0..k as usize).map(|i| (deg - i) as f64).product();
                    acc += c * fall * y.powi((deg - k as usize) as i32);
                }
                Ok(a * acc / radius.powi(k as i32))
            }
            SmoothFunction::Bump { radius, .. } => {
                if x.abs() >= radius {
                    return Ok(0.0);
                }
                let r2 = radius * radius;
                let s = 1.0 - x * x / r2;
                let g = 1.0 / s;
                let e = a * (1.0 - g).exp();
                let g1 = 2.0 * x / r2 / (s * s);
                match k {
                    0 => Ok(e),
                    1 => Ok(-e * g1),
                    2 => {
                        let g2 = 2.0 / r2 / (s * s) + 8.0 * x * x / (r2 * r2) / (s * s * s);
                        Ok(e * (g1 * g1 - g2))
                    }
                    _ => Err(Error::invalid(format!(
                        "the bump profile has closed-form derivatives up to order 2, not {k}"
                    ))),
                }
            }
        }
    }

    /// Value and radial derivative of the profile at radius `r`.
    fn radial(&self, r: f64) -> Result<(f64, f64)> {
        Ok((self.derivative_1d(r, 0)?, self.derivative_1d(r, 1)?))
    }
}

fn default_grid_points() -> usize {
    257
}

fn default_samples() -> usize {
    64
}

/// Exponents and discretization for [`sobolev_ratio`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevParams {
    pub n: usize,
    pub order: u32,
    pub p1: f64,
    pub q1: f64,
    pub q2: f64,
    pub lambda: f64,
    /// Grid points per axis (2D only).
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Points where the pointwise bound is sampled (1D only).
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub n: usize,
    pub order: u32,
    /// `max |f(x)| / I_k(|∇^k f|)(x)` over the sampled points.
    #[serde(with = "crate::serde_f64")]
    pub pointwise_constant: f64,
    /// Constant from the representation formula: `1/(k−1)!` in 1D,
    /// `1/(2π)` in 2D.
    pub pointwise_bound: f64,
    pub pointwise_holds: bool,
    pub points_checked: usize,
    #[serde(with = "crate::serde_f64::option")]
    pub p2: Option<f64>,
    #[serde(with = "crate::serde_f64::option")]
    pub source: Option<f64>,
    #[serde(with = "crate::serde_f64::option")]
    pub target: Option<f64>,
    #[serde(with = "crate::serde_f64::option")]
    pub ratio: Option<f64>,
    pub note: String,
}

/// Herz norm of grid samples: cell `x` contributes `|v|^p h^n` to the
/// annulus containing `|x|`; the cell at the origin is skipped.
pub fn grid_herz_norm(g: &GridFunction, p: f64, q: f64, lambda: f64) -> Result<f64> {
    let vol = g.cell_volume();
    let mut acc = std::collections::BTreeMap::<i32, f64>::new();
    for (k, v) in g.samples().iter().enumerate() {
        let r = g.point(k).iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 || *v == 0.0 {
            continue;
        }
        *acc.entry(annulus_index(r)).or_default() += v.abs().powf(p) * vol;
    }
    let terms = acc
        .into_iter()
        .map(|(t, s)| (t, 2f64.powf(t as f64 * lambda) * s.powf(1.0 / p)))
        .collect();
    Ok(HerzTermLedger::from_terms(terms, q, false, false, 0.0)?.value())
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Sobolev ratio `‖f‖_{K̇^{p₂}_{λ,q₂}} / ‖∇^k f‖_{K̇^{p₁}_{λ,q₁}}` with
/// `1/p₂ = 1/p₁ − k/n`, plus the pointwise representation bound.
///
/// In 1D `k·p₁ < n` is impossible for `p₁ > 1`, so only the pointwise half
/// runs there. In 2D the full ratio is computed on a grid for `k = 1`, with
/// `|∇f| = |∂₁f| + |∂₂f|`.
pub fn sobolev_ratio(f: &SmoothFunction, params: &SobolevParams, exec: Execution) -> Result<SobolevReport> {
    f.validate()?;
    if params.order == 0 {
        return Err(Error::invalid("order must be positive"));
    }
    match params.n {
        1 => pointwise_1d(f, params),
        2 => grid_2d(f, params, exec),
        n => Err(Error::invalid(format!("sobolev checks run in dimension 1 or 2, got {n}"))),
    }
}

fn pointwise_1d(f: &SmoothFunction, params: &SobolevParams) -> Result<SobolevReport> {
    let k = params.order;
    // validates that the derivative has a closed form
    f.derivative_1d(0.0, k)?;
    let support = f.support_radius();
    let m = params.samples.max(1);
    let opts = QuadOptions::rel(1e-10);
    let mut worst = f64::NAN;
    let mut checked = 0;
    for i in 0..m {
        let x = support * (-0.95 + 1.9 * (i as f64 + 0.5) / m as f64);
        let fx = f.derivative_1d(x, 0)?;
        if fx == 0.0 {
            continue;
        }
        let kernel = |y: f64| -> f64 {
            let d = f.derivative_1d(y, k).unwrap_or(f64::NAN).abs();
            if k == 1 {
                d
            } else {
                d * (x - y).abs().powi(k as i32 - 1)
            }
        };
        let (j, _) = integrate(kernel, -support, support, &[x, 0.0], opts)?;
        let c = fx.abs() / j;
        worst = if worst.is_nan() { c } else { worst.max(c) };
        checked += 1;
    }
    let bound = 1.0 / factorial(k - 1);
    Ok(SobolevReport {
        n: 1,
        order: k,
        pointwise_constant: worst,
        pointwise_bound: bound,
        pointwise_holds: checked == 0 || worst <= bound * (1.0 + 1e-9),
        points_checked: checked,
        p2: None,
        source: None,
        target: None,
        ratio: None,
        note: "n = 1: the full ratio needs 1 < p1 < n/k; only the pointwise bound is checked".into(),
    })
}

fn grid_2d(f: &SmoothFunction, params: &SobolevParams, exec: Execution) -> Result<SobolevReport> {
    let k = params.order;
    let n = 2.0;
    if k != 1 {
        return Err(Error::invalid("2D grid checks are first order (k p1 < 2 with p1 > 1 forces k = 1)"));
    }
    let p1 = params.p1;
    if !(p1 > 1.0 && k as f64 * p1 < n) {
        return Err(Error::invalid(format!("need 1 < p1 < n/k = 2, got {p1}")));
    }
    if !(params.lambda > 0.0 && params.lambda < n - n / p1) {
        return Err(Error::invalid(format!(
            "need 0 < lambda < n - n/p1 = {}, got {}",
            n - n / p1,
            params.lambda
        )));
    }
    if !(1.0 <= params.q1 && params.q1 <= params.q2) {
        return Err(Error::invalid("need 1 <= q1 <= q2"));
    }
    let p2 = 1.0 / (1.0 / p1 - k as f64 / n);
    let np = params.grid_points;
    if np < 16 {
        return Err(Error::invalid("grid_points must be at least 16"));
    }
    let half = 1.5 * f.support_radius();
    let h = 2.0 * half / (np - 1) as f64;
    let radial = |x: f64, y: f64| -> (f64, f64, f64) {
        let r = (x * x + y * y).sqrt();
        let (v, d) = f.radial(r).unwrap_or((f64::NAN, f64::NAN));
        if r == 0.0 {
            (v, 0.0, 0.0)
        } else {
            (v, d * x / r, d * y / r)
        }
    };
    let fg = GridFunction::from_fn_2d((-half, -half), h, (np, np), |x, y| radial(x, y).0)?;
    let gg = GridFunction::from_fn_2d((-half, -half), h, (np, np), |x, y| {
        let (_, dx, dy) = radial(x, y);
        dx.abs() + dy.abs()
    })?;
    let pot = riesz_potential_grid_with(&gg, &RieszParams::new(1.0, 2)?, exec)?;
    let fmax = fg.max_abs();
    let mut worst = f64::NAN;
    let mut checked = 0;
    for (idx, v) in fg.samples().iter().enumerate() {
        let pt = fg.point(idx);
        if pt.iter().any(|c| c.abs() > 0.5 * half) || v.abs() < 1e-3 * fmax {
            continue;
        }
        let c = v.abs() / pot.samples()[idx];
        worst = if worst.is_nan() { c } else { worst.max(c) };
        checked += 1;
    }
    let bound = 1.0 / (2.0 * std::f64::consts::PI);
    let target = grid_herz_norm(&fg, p2, params.q2, params.lambda)?;
    let source = grid_herz_norm(&gg, p1, params.q1, params.lambda)?;
    Ok(SobolevReport {
        n: 2,
        order: k,
        pointwise_constant: worst,
        pointwise_bound: bound,
        pointwise_holds: checked == 0 || worst <= bound * (1.0 + 1e-3),
        points_checked: checked,
        p2: Some(p2),
        source: Some(source),
        target: Some(target),
        ratio: Some(super::ratio(target, source)),
        note: "2D grid, |grad f| = |d1 f| + |d2 f|".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_derivative(f: &SmoothFunction, x: f64, k: u32) -> f64 {
        let h = 1e-4;
        (f.derivative_1d(x + h, k - 1).unwrap() - f.derivative_1d(x - h, k - 1).unwrap()) / (2.0 * h)
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let fs = [
            SmoothFunction::Bump { radius: 1.5, amplitude: 2.0 },
            SmoothFunction::Gaussian { sigma: 0.7, amplitude: 1.0 },
            SmoothFunction::PolyCap { radius: 2.0, power: 4, amplitude: 1.0 },
        ];
        for f in &fs {
            for k in 1..=2 {
                for x in [-1.1, -0.3, 0.0, 0.45, 1.2] {
                    let a = f.derivative_1d(x, k).unwrap();
                    let b = numeric_derivative(f, x, k);
                    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{f:?} k={k} x={x}: {a} vs {b}");
                }
            }
        }
        let bump = SmoothFunction::Bump { radius: 1.0, amplitude: 1.0 };
        assert!(bump.derivative_1d(0.1, 3).is_err());
        assert!(SmoothFunction::PolyCap { radius: 1.0, power: 2, amplitude: 1.0 }.derivative_1d(0.1, 3).is_err());
    }

    #[test]
    fn pointwise_bound_1d() {
        for k in 1..=3 {
            let f = SmoothFunction::Gaussian { sigma: 1.0, amplitude: 1.0 };
            let p = SobolevParams {
                n: 1,
                order: k,
                p1: 1.5,
                q1: 2.0,
                q2: 2.0,
                lambda: 0.2,
                grid_points: 0,
                samples: 32,
            };
            let r = sobolev_ratio(&f, &p, Execution::Sequential).unwrap();
            assert!(r.pointwise_holds, "k={k}: {} > {}", r.pointwise_constant, r.pointwise_bound);
            assert!(r.ratio.is_none());
        }
    }

    #[test]
    fn bump_on_2d_grid() {
        let f = SmoothFunction::Bump { radius: 1.0, amplitude: 1.0 };
        let p = SobolevParams {
            n: 2,
            order: 1,
            p1: 1.5,
            q1: 2.0,
            q2: 2.0,
            lambda: 0.2,
            grid_points: 129,
            samples: 0,
        };
        let r = sobolev_ratio(&f, &p, Execution::Parallel).unwrap();
        assert!(r.pointwise_holds, "{} > {}", r.pointwise_constant, r.pointwise_bound);
        assert!(r.points_checked > 100);
        assert!((r.p2.unwrap() - 6.0).abs() < 1e-12);
        assert!(r.ratio.unwrap().is_finite());
    }

    #[test]
    fn zero_profile_sentinel() {
        let f = SmoothFunction::Bump { radius: 1.0, amplitude: 0.0 };
        let p = SobolevParams {
            n: 2,
            order: 1,
            p1: 1.5,
            q1: 2.0,
            q2: 2.0,
            lambda: 0.2,
            grid_points: 33,
            samples: 0,
        };
        let r = sobolev_ratio(&f, &p, Execution::Sequential).unwrap();
        assert!(r.ratio.unwrap().is_nan());
    }
}
