//! Fractional integration, interpolation and limiting-case experiments.

use serde::{Deserialize, Serialize};

use super::target::{source_norm, target_ledger, trace_ratio, NormPair, TraceResult};
use super::{classify_params, ratio, Classification, Numerics, Theorem, TraceParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::Measure;
use crate::norms::{herz_norm, NormSpec};
use crate::piecewise::{PiecewisePowerFunction, PowerPiece};
use crate::riesz::{
    fourier_symbol_solve_1d, normalization_constant, riesz_potential_1d, riesz_potential_grid_with, GridFunction,
    RieszParams,
};

const IDENTITY_TOL: f64 = 1e-12;

/// Lorentz-Herz trace ratio over Lebesgue measure under the scaling
/// identity `1/p₁ − 1/p₂ = γ/n`.
pub fn hls_ratio(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    numerics: &Numerics,
    exec: Execution,
) -> Result<TraceResult> {
    if !params.measure.is_lebesgue() {
        return Err(Error::invalid("fractional integration ratio needs Lebesgue measure"));
    }
    let n = params.n as f64;
    let defect = 1.0 / params.p1 - 1.0 / params.p2 - params.gamma / n;
    if defect.abs() > IDENTITY_TOL {
        return Err(Error::invalid(format!(
            "identity 1/p1 - 1/p2 = gamma/n violated by {defect:e}"
        )));
    }
    trace_ratio(f, params, NormPair::LorentzHerz, numerics, exec)
}

/// Exponents and measure for [`gns_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnsParams {
    pub theta: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    /// Interpolated exponents; derived from `θ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    pub measure: Measure,
    /// Exponents of the gradient norm `‖f′‖_{K̇^{p₀}_{λ,q₀}(m)}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
}

impl GnsParams {
    pub fn new(theta: f64, (p1, q1): (f64, f64), (p2, q2): (f64, f64), lambda: f64, measure: Measure) -> Self {
        GnsParams {
            theta,
            p1,
            q1,
            p2,
            q2,
            p: None,
            q: None,
            lambda,
            measure,
            p0: None,
            q0: None,
        }
    }

    /// `(p, q)` with `1/p = (1−θ)/p₁ + θ/p₂` and `1/q = (1−θ)/q₁ + θ/q₂`.
    pub fn interpolated(&self) -> Result<(f64, f64)> {
        let th = self.theta;
        if !(0.0..=1.0).contains(&th) {
            return Err(Error::invalid(format!("theta must be in [0, 1], got {th}")));
        }
        let mix = |a: f64, b: f64| -> f64 {
            if th == 0.0 {
                a
            } else if th == 1.0 {
                b
            } else {
                1.0 / ((1.0 - th) / a + th / b)
            }
        };
        let p = mix(self.p1, self.p2);
        let q = mix(self.q1, self.q2);
        for (name, given, a, b) in [("p", self.p, self.p1, self.p2), ("q", self.q, self.q1, self.q2)] {
            if let Some(g) = given {
                let defect = 1.0 / g - (1.0 - th) / a - th / b;
                if defect.abs() > IDENTITY_TOL {
                    return Err(Error::invalid(format!(
                        "identity 1/{name} = (1-theta)/{name}1 + theta/{name}2 violated by {defect:e}"
                    )));
                }
            }
        }
        Ok((self.p.unwrap_or(p), self.q.unwrap_or(q)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnsReport {
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    /// `‖f‖_{K̇^p_{λ,q}(ν)}`.
    pub lhs: f64,
    /// `‖f‖^{1−θ}_{K̇^{p₁}_{λ,q₁}(ν)}·‖f‖^{θ}_{K̇^{p₂}_{λ,q₂}(ν)}`.
    pub interpolation_rhs: f64,
    /// `‖f‖^{1−θ}_{K̇^{p₁}_{λ,q₁}(ν)}·‖f′‖^{θ}_{K̇^{p₀}_{λ,q₀}(m)}`, when requested
    /// and `f` has no jumps. Reported without a constant.
    #[serde(with = "crate::serde_f64::option")]
    pub full_rhs: Option<f64>,
    /// `(rhs − lhs) / rhs`.
    #[serde(with = "crate::serde_f64")]
    pub slack: f64,
    pub interpolation_holds_exactly: bool,
}

/// The interpolation step of the Gagliardo–Nirenberg inequality.
///
/// All three Herz norms are window sums over the same annuli, so Hölder's
/// inequality applies term by term with constant 1.
pub fn gns_check(f: &PiecewisePowerFunction, params: &GnsParams) -> Result<GnsReport> {
    let (p, q) = params.interpolated()?;
    let th = params.theta;
    let herz = |p: f64, q: f64, measure: Measure, g: &PiecewisePowerFunction| -> Result<f64> {
        let spec = NormSpec::herz(p, q, params.lambda, measure)?;
        Ok(herz_norm(g, &spec)?.ledger.value())
    };
    let lhs = herz(p, q, params.measure, f)?;
    let n1 = herz(params.p1, params.q1, params.measure, f)?;
    let n2 = herz(params.p2, params.q2, params.measure, f)?;
    let interpolation_rhs = n1.powf(1.0 - th) * n2.powf(th);
    let full_rhs = match (params.p0, params.q0) {
        (Some(p0), Some(q0)) if !f.has_jumps() => {
            let grad = herz(p0, q0, Measure::lebesgue(1)?, &f.derivative())?;
            Some(n1.powf(1.0 - th) * grad.powf(th))
        }
        _ => None,
    };
    let slack = if interpolation_rhs == 0.0 && lhs == 0.0 {
        0.0
    } else {
        (interpolation_rhs - lhs) / interpolation_rhs
    };
    Ok(GnsReport {
        theta: th,
        p,
        q,
        lhs,
        interpolation_rhs,
        full_rhs,
        slack,
        interpolation_holds_exactly: lhs <= interpolation_rhs * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploratoryRatio {
    pub r: f64,
    pub source: f64,
    #[serde(with = "crate::serde_f64")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingReport {
    pub classification: Classification,
    #[serde(with = "crate::serde_f64")]
    pub target: f64,
    pub diverged: bool,
    /// Source `ḢL^{p,1}_{λ,q₁}` norm and the ratio at `r = 1`.
    pub source_r1: f64,
    #[serde(with = "crate::serde_f64")]
    pub ratio_r1: f64,
    /// Ratios with the source at `r ∈ (1, p)`; no pass/fail is attached.
    pub exploratory: Vec<ExploratoryRatio>,
    pub flag: String,
}

pub const EXPLORATORY_FLAG: &str = "exploratory: open question for r in (1, p)";

/// The limiting case `p₁ = p₂ = p`: Herz target under `μ` against a
/// Lorentz-Herz source at `r = 1`, plus exploratory sources at `r_values`.
pub fn limiting_case_probe(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    r_values: &[f64],
    numerics: &Numerics,
    exec: Execution,
) -> Result<LimitingReport> {
    params.require_dim1()?;
    let classification = classify_params(params, Theorem::Limiting);
    if !classification.admissible {
        return Err(Error::invalid(format!(
            "limiting case hypotheses violated: {}",
            classification.violated_conditions.join("; ")
        )));
    }
    let p = params.p1;
    if let Some(r) = r_values.iter().find(|&&r| !(r > 1.0 && r < p)) {
        return Err(Error::invalid(format!("exploratory r must lie in (1, {p}), got {r}")));
    }
    let ledger = target_ledger(f, params, NormPair::Herz, numerics, exec)?;
    let target = if ledger.decaying() {
        ledger.value_with_tail()
    } else {
        f64::INFINITY
    };
    let source_at = |r: f64| -> Result<f64> {
        let mut sp = params.clone();
        sp.r1 = Some(r);
        Ok(source_norm(f, &sp, NormPair::LorentzHerz, numerics, exec)?.value)
    };
    let source_r1 = source_at(1.0)?;
    let exploratory = r_values
        .iter()
        .map(|&r| {
            let s = source_at(r)?;
            Ok(ExploratoryRatio {
                r,
                source: s,
                ratio: ratio(target, s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitingReport {
        classification,
        target,
        diverged: !ledger.converged,
        source_r1,
        ratio_r1: ratio(target, source_r1),
        exploratory,
        flag: EXPLORATORY_FLAG.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupReport {
    pub alpha: f64,
    pub beta: f64,
    pub points_checked: usize,
    pub max_rel_error: f64,
    pub warnings: Vec<String>,
}

fn gaussian_grid(half_width: f64, h: f64) -> Result<GridFunction> {
    GridFunction::centered_1d(half_width, h, |x| (-std::f64::consts::PI * x * x).exp())
}

/// `Ĩ_α(Ĩ_β f)` against `Ĩ_{α+β} f` with `Ĩ_γ = I_γ/𝒢(γ)` and
/// `f = e^{−πx²}`, at grid points with `|x| <= half_width/4`.
///
/// `Ĩ_β f` is only known on the grid; outside it is replaced by its far
/// field `|y|^{β−1}/𝒢(β)` (the input has unit mass), whose potential is
/// evaluated exactly.
pub fn semigroup_check(
    alpha: f64,
    beta: f64,
    half_width: f64,
    h: f64,
    exec: Execution,
) -> Result<SemigroupReport> {
    if !(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0) {
        return Err(Error::invalid("need alpha, beta > 0 and alpha + beta < 1 (n = 1)"));
    }
    let pa = RieszParams::new(alpha, 1)?;
    let pb = RieszParams::new(beta, 1)?;
    let pab = RieszParams::new(alpha + beta, 1)?;
    let f = gaussian_grid(half_width, h)?;
    let u = riesz_potential_grid_with(&f, &pb, exec)?.scaled(1.0 / normalization_constant(&pb));
    let v = riesz_potential_grid_with(&u, &pa, exec)?;
    let w = riesz_potential_grid_with(&f, &pab, exec)?.scaled(1.0 / normalization_constant(&pab));
    let edge = half_width + 0.5 * h;
    let c = 1.0 / normalization_constant(&pb);
    let far = PiecewisePowerFunction::new(vec![
        PowerPiece::new(f64::NEG_INFINITY, -edge, c, beta - 1.0),
        PowerPiece::new(edge, f64::INFINITY, c, beta - 1.0),
    ])?;
    let xs = f.xs();
    let idx: Vec<usize> = (0..xs.len()).filter(|&k| xs[k].abs() <= 0.25 * half_width).collect();
    let errs = exec.map(&idx, |&k| -> Result<f64> {
        let tail = riesz_potential_1d(&far, &pa, xs[k])?;
        let lhs = (v.samples()[k] + tail) / normalization_constant(&pa);
        let rhs = w.samples()[k];
        Ok((lhs - rhs).abs() / rhs.abs())
    });
    let mut max_rel_error = 0.0f64;
    for e in errs {
        max_rel_error = max_rel_error.max(e?);
    }
    let mut warnings = f.warnings.clone();
    warnings.extend(w.warnings.iter().cloned());
    Ok(SemigroupReport {
        alpha,
        beta,
        points_checked: idx.len(),
        max_rel_error,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSymbolReport {
    pub gamma: f64,
    pub points_checked: usize,
    pub max_rel_error: f64,
}

/// Multiplier `𝒢(γ)(2π|ξ|)^{−γ}` applied to `f̂` against the grid potential,
/// both divided by `𝒢(γ)`, on the central half of the grid.
pub fn fourier_symbol_check(
    gamma: f64,
    half_width: f64,
    h: f64,
    pad_factor: usize,
    exec: Execution,
) -> Result<FourierSymbolReport> {
    let p = RieszParams::new(gamma, 1)?;
    let f = gaussian_grid(half_width, h)?;
    let grid = riesz_potential_grid_with(&f, &p, exec)?.scaled(1.0 / normalization_constant(&p));
    let four = fourier_symbol_solve_1d(&f, &p, pad_factor)?;
    let n = f.len();
    let mut max_rel_error = 0.0f64;
    for k in n / 4..3 * n / 4 {
        let a = grid.samples()[k];
        let b = four.samples()[k];
        max_rel_error = max_rel_error.max((a - b).abs() / a.abs());
    }
    Ok(FourierSymbolReport {
        gamma,
        points_checked: 3 * n / 4 - n / 4,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hls_params() -> TraceParams {
        TraceParams::new(0.25, 2.0, 4.0, 1.0, 2.0, 0.0, Measure::lebesgue(1).unwrap()).with_lorentz(1.0, 2.0)
    }

    #[test]
    fn hls_identity_enforced() {
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let mut p = hls_params();
        p.gamma = 0.3;
        let e = hls_ratio(&f, &p, &Numerics::default(), Execution::Sequential).unwrap_err();
        assert!(e.to_string().contains("1/p1 - 1/p2 = gamma/n"));
    }

    #[test]
    fn hls_dilation_drift_small() {
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let n = Numerics {
            grid_points: 64,
            ..Default::default()
        };
        let a = hls_ratio(&f, &hls_params(), &n, Execution::Parallel).unwrap();
        assert!(a.ratio.is_finite() && !a.diverged);
        let b = hls_ratio(&f.dilated(8.0).unwrap(), &hls_params(), &n, Execution::Parallel).unwrap();
        assert!((a.ratio / b.ratio - 1.0).abs() < 1e-3, "{} vs {}", a.ratio, b.ratio);
    }

    #[test]
    fn gns_endpoints_and_example() {
        let f = PiecewisePowerFunction::annulus_indicator(0)
            .disjoint_sum(&PiecewisePowerFunction::annulus_indicator(2))
            .unwrap();
        let leb = Measure::lebesgue(1).unwrap();
        for th in [0.0, 1.0] {
            let r = gns_check(&f, &GnsParams::new(th, (2.0, 2.0), (4.0, 4.0), 0.1, leb)).unwrap();
            assert_eq!(r.lhs, r.interpolation_rhs);
            assert!(r.interpolation_holds_exactly);
        }
        let r = gns_check(&f, &GnsParams::new(0.5, (2.0, 2.0), (4.0, 4.0), 0.1, leb)).unwrap();
        assert!((r.p - 8.0 / 3.0).abs() < 1e-15 && (r.q - 8.0 / 3.0).abs() < 1e-15);
        assert!(r.slack >= 0.0 && r.interpolation_holds_exactly);
        // two terms: a_t = 2^{0.1 t} (2·2^{t-1})^{1/p}
        let term = |t: f64, p: f64| 2f64.powf(0.1 * t) * 2f64.powf(t / p);
        let norm = |p: f64| (term(0.0, p).powf(p) + term(2.0, p).powf(p)).powf(1.0 / p);
        assert!((r.lhs - norm(8.0 / 3.0)).abs() < 1e-12 * r.lhs);
        assert!((r.interpolation_rhs - (norm(2.0) * norm(4.0)).sqrt()).abs() < 1e-12 * r.lhs);
    }

    #[test]
    fn gns_rejects_inconsistent_exponent() {
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let mut g = GnsParams::new(0.5, (2.0, 2.0), (4.0, 4.0), 0.1, Measure::lebesgue(1).unwrap());
        g.p = Some(3.0);
        assert!(gns_check(&f, &g).is_err());
    }

    #[test]
    fn limiting_probe_example() {
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let p = TraceParams::new(0.25, 2.0, 2.0, 1.0, 2.0, 0.0, Measure::power_weight(0.5).unwrap());
        let r = limiting_case_probe(&f, &p, &[1.5], &Numerics::default(), Execution::Parallel).unwrap();
        assert!(r.ratio_r1.is_finite() && r.ratio_r1 > 0.0);
        assert_eq!(r.exploratory.len(), 1);
        assert_eq!(r.flag, EXPLORATORY_FLAG);
        let bad = p.clone().with_lambda(0.7);
        assert!(limiting_case_probe(&f, &bad, &[], &Numerics::default(), Execution::Parallel).is_err());
    }

    #[test]
    fn semigroup_identity_on_gaussian() {
        let r = semigroup_check(0.25, 0.25, 32.0, 1.0 / 32.0, Execution::Parallel).unwrap();
        assert!(r.max_rel_error < 1e-2, "{}", r.max_rel_error);
    }
}
