//! Optimality families, exponent fits, the annulus divergence sweep and the
//! ball necessity check.

use serde::{Deserialize, Serialize};

use super::target::{target_inner_norms, trace_ratio, NormPair};
use super::{ratio, Numerics, TraceParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::{Ball, Measure, MeasureKind};
use crate::norms::HerzTermLedger;
use crate::numeric::linear_fit;
use crate::piecewise::PiecewisePowerFunction;

/// Exponent fits ignore indices below this value.
pub const BURN_IN_K: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub family_label: String,
    #[serde(with = "crate::serde_f64::vec")]
    pub index: Vec<f64>,
    #[serde(with = "crate::serde_f64::vec")]
    pub source_norms: Vec<f64>,
    #[serde(with = "crate::serde_f64::vec")]
    pub target_norms: Vec<f64>,
    #[serde(with = "crate::serde_f64::vec")]
    pub ratios: Vec<f64>,
    pub diverged_flags: Vec<bool>,
}

impl RatioSeries {
    pub fn new(label: impl Into<String>) -> Self {
        RatioSeries {
            family_label: label.into(),
            index: Vec::new(),
            source_norms: Vec::new(),
            target_norms: Vec::new(),
            ratios: Vec::new(),
            diverged_flags: Vec::new(),
        }
    }

    pub fn push(&mut self, index: f64, source: f64, target: f64, diverged: bool) {
        self.index.push(index);
        self.source_norms.push(source);
        self.target_norms.push(target);
        self.ratios.push(ratio(target, source));
        self.diverged_flags.push(diverged);
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Largest finite ratio.
    pub fn sup_ratio(&self) -> f64 {
        self.ratios.iter().copied().filter(|r| r.is_finite()).fold(f64::NAN, f64::max)
    }

    /// `(max − min) / min` over the finite ratios.
    pub fn drift(&self) -> f64 {
        let finite: Vec<f64> = self.ratios.iter().copied().filter(|r| r.is_finite()).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    }
}

/// Least-squares fit `ln(value) = slope·ln(index) + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// First and last index used.
    pub window: (f64, f64),
}

/// Log-log fit over the entries with `index >= BURN_IN_K` and a positive
/// finite value.
pub fn exponent_fit(index: &[f64], values: &[f64]) -> Result<ExponentFit> {
    if index.len() != values.len() {
        return Err(Error::invalid("index and values differ in length"));
    }
    let kept: Vec<(f64, f64)> = index
        .iter()
        .zip(values)
        .filter(|(k, v)| **k >= BURN_IN_K && **v > 0.0 && v.is_finite())
        .map(|(k, v)| (*k, *v))
        .collect();
    let xs: Vec<f64> = kept.iter().map(|x| x.0.ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|x| x.1.ln()).collect();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "exponent fit needs two points with index >= {BURN_IN_K}, have {}",
            xs.len()
        )));
    }
    let (slope, intercept, max_residual) = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::InsufficientData("exponent fit needs two distinct indices".into()))?;
    Ok(ExponentFit {
        slope,
        intercept,
        max_residual,
        window: (kept[0].0, kept[kept.len() - 1].0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub series: RatioSeries,
    pub source_fit: ExponentFit,
    pub target_fit: ExponentFit,
    /// `target_fit.slope − source_fit.slope`.
    pub slope_gap: f64,
}

fn require_critical_weight(params: &TraceParams) -> Result<f64> {
    params.require_dim1()?;
    let beta = params.growth_exponent();
    match params.measure.kind() {
        MeasureKind::PowerWeight { beta: b } if (b - beta).abs() <= 1e-12 && beta <= 1.0 => Ok(beta),
        _ => Err(Error::invalid(format!(
            "this experiment needs the power weight with beta = p2(1/p1 - gamma) = {beta} <= 1"
        ))),
    }
}

/// Norms of `f_k = |x|^{−(λ+1/p₁)} χ_{1<|x|<2^k}` and of `I_γ f_k` for
/// `k ∈ [k_min, k_max]`, with log-log fits against `k`.
pub fn optimality_fk(
    params: &TraceParams,
    k_min: u32,
    k_max: u32,
    numerics: &Numerics,
    exec: Execution,
) -> Result<OptimalityReport> {
    require_critical_weight(params)?;
    if k_min == 0 || k_min > k_max {
        return Err(Error::invalid(format!("invalid k range [{k_min}, {k_max}]")));
    }
    let usable = (k_min..=k_max).filter(|&k| k as f64 >= BURN_IN_K).count();
    if usable < 2 {
        return Err(Error::InsufficientData(format!(
            "k range [{k_min}, {k_max}] leaves {usable} point(s) after dropping k < {BURN_IN_K}"
        )));
    }
    let exponent = -(params.lambda + 1.0 / params.p1);
    let mut series = RatioSeries::new("f_k = |x|^-(lambda+1/p1) on 1<|x|<2^k");
    for k in k_min..=k_max {
        let f = PiecewisePowerFunction::radial_power(1.0, exponent, 1.0, 2f64.powi(k as i32))?;
        let r = trace_ratio(&f, params, NormPair::Herz, numerics, exec)?;
        series.push(k as f64, r.source, r.target, r.diverged);
    }
    let source_fit = exponent_fit(&series.index, &series.source_norms)?;
    let target_fit = exponent_fit(&series.index, &series.target_norms)?;
    Ok(OptimalityReport {
        slope_gap: target_fit.slope - source_fit.slope,
        series,
        source_fit,
        target_fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthVerdict {
    pub width: i32,
    pub decaying: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub lambda: f64,
    /// Both tails decay over the widest window.
    pub converged: bool,
    /// Decaying and the extrapolated tail is within tolerance.
    pub ledger_converged: bool,
    pub minus_slope: Option<f64>,
    pub plus_slope: Option<f64>,
    /// `λ + β/p₂`, which is `λ + 1/p₁ − γ` for the critical weight.
    pub predicted_minus: f64,
    /// `λ + γ − 1 + β/p₂`, which is `λ − 1 + 1/p₁` for the critical weight.
    pub predicted_plus: f64,
    pub widths: Vec<WidthVerdict>,
}

/// Target ledgers of `I_γ χ_{Ω₁}` over the windows `[−w, w]` for each `λ`.
pub fn annulus_divergence(
    params: &TraceParams,
    lambda_grid: &[f64],
    window_growth: &[i32],
    numerics: &Numerics,
    exec: Execution,
) -> Result<Vec<DivergenceRow>> {
    params.require_dim1()?;
    let widest = *window_growth
        .iter()
        .max()
        .ok_or_else(|| Error::invalid("window_growth is empty"))?;
    if window_growth.iter().any(|&w| w < 4) {
        return Err(Error::invalid("window widths must be at least 4"));
    }
    let mass_exponent = match params.measure.kind() {
        MeasureKind::Lebesgue => 1.0,
        MeasureKind::PowerWeight { beta } => beta,
    };
    let f = PiecewisePowerFunction::annulus_indicator(1);
    let inner = target_inner_norms(&f, params, NormPair::Herz, numerics, (-widest, widest), exec)?;
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let mut widths = Vec::new();
        let mut last: Option<HerzTermLedger> = None;
        let mut sorted = window_growth.to_vec();
        sorted.sort_unstable();
        for w in sorted {
            let terms = inner
                .range(-w..=w)
                .map(|(&t, &v)| (t, 2f64.powf(t as f64 * lambda) * v))
                .collect();
            let ledger = HerzTermLedger::from_terms(terms, params.q2, true, true, numerics.tail_tolerance)?;
            widths.push(WidthVerdict {
                width: w,
                decaying: ledger.decaying(),
                value: ledger.value(),
            });
            last = Some(ledger);
        }
        let ledger = last.expect("nonempty window list");
        let shift = mass_exponent / params.p2;
        rows.push(DivergenceRow {
            lambda,
            converged: ledger.decaying(),
            ledger_converged: ledger.converged,
            minus_slope: ledger.minus_slope,
            plus_slope: ledger.plus_slope,
            predicted_minus: lambda + shift,
            predicted_plus: lambda + params.gamma - 1.0 + shift,
            widths,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRow {
    pub center: f64,
    pub radius: f64,
    pub mu: f64,
    pub m: f64,
    /// `μ(B) / m(B)^e`.
    pub raw_ratio: f64,
    /// Trace ratio with `f = χ_B`.
    #[serde(with = "crate::serde_f64")]
    pub trace_ratio: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub exponent: f64,
    pub sup_ratio: f64,
    #[serde(with = "crate::serde_f64")]
    pub trace_sup: f64,
    pub rows: Vec<BallRow>,
}

/// For each ball `B(c, r)`: the raw growth ratio `μ(B)/m(B)^{p₂(1/p₁−γ/n)}`
/// and the trace ratio of `χ_B`.
pub fn necessity_check(
    params: &TraceParams,
    radii: &[f64],
    centers: &[f64],
    numerics: &Numerics,
    exec: Execution,
) -> Result<NecessityReport> {
    params.require_dim1()?;
    if params.lambda != 0.0 {
        return Err(Error::invalid("the necessity check is stated for lambda = 0"));
    }
    if radii.is_empty() || centers.is_empty() {
        return Err(Error::invalid("need at least one radius and one center"));
    }
    let e = params.growth_exponent();
    let lebesgue = Measure::lebesgue(1)?;
    let mut rows = Vec::new();
    for &c in centers {
        for &r in radii {
            let ball = Ball::interval(c, r)?;
            let mu = params.measure.ball_mass(&ball)?;
            let m = lebesgue.ball_mass(&ball)?;
            let f = PiecewisePowerFunction::indicator(c - r, c + r)?;
            let tr = trace_ratio(&f, params, NormPair::Herz, numerics, exec)?;
            rows.push(BallRow {
                center: c,
                radius: r,
                mu,
                m,
                raw_ratio: mu / m.powf(e),
                trace_ratio: tr.ratio,
                diverged: tr.diverged,
            });
        }
    }
    let sup_ratio = rows.iter().map(|b| b.raw_ratio).fold(f64::NEG_INFINITY, f64::max);
    let trace_sup = rows.iter().map(|b| b.trace_ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(NecessityReport {
        exponent: e,
        sup_ratio,
        trace_sup,
        rows,
    })
}

#[cfg(test)]
/// Source Herz norms of `f_k` alone (no potentials), for fast checks.
fn fk_source_norms(params: &TraceParams, ks: &[u32], numerics: &Numerics) -> Result<Vec<f64>> {
    let exponent = -(params.lambda + 1.0 / params.p1);
    ks.iter()
        .map(|&k| {
            let f = PiecewisePowerFunction::radial_power(1.0, exponent, 1.0, 2f64.powi(k as i32))?;
            Ok(super::target::source_norm(&f, params, NormPair::Herz, numerics, Execution::Sequential)?.value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q1: f64, q2: f64) -> TraceParams {
        TraceParams::new(0.25, 2.0, 3.0, q1, q2, 0.0, Measure::power_weight(0.75).unwrap())
    }

    #[test]
    fn fit_recovers_geometric_slope() {
        let ks: Vec<f64> = (1..=20).map(f64::from).collect();
        let vs: Vec<f64> = ks.iter().map(|k| 3.7 * k.powf(0.4321)).collect();
        let fit = exponent_fit(&ks, &vs).unwrap();
        assert!((fit.slope - 0.4321).abs() < 1e-9);
        assert_eq!(fit.window, (4.0, 20.0));
        assert!(matches!(exponent_fit(&[3.0], &[1.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn fk_source_norm_closed_form() {
        let ks: Vec<u32> = (1..=10).collect();
        let v = fk_source_norms(&params(3.0, 3.0), &ks, &Numerics::default()).unwrap();
        for (k, x) in ks.iter().zip(v) {
            let expect = (2.0 * 2f64.ln()).sqrt() * (*k as f64).powf(1.0 / 3.0);
            assert!((x / expect - 1.0).abs() < 1e-12, "{k}: {x} vs {expect}");
        }
    }

    #[test]
    fn single_k_is_insufficient() {
        let e = optimality_fk(&params(1.0, 2.0), 3, 3, &Numerics::default(), Execution::Sequential);
        assert!(matches!(e, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn optimality_needs_critical_weight() {
        let mut p = params(1.0, 2.0);
        p.measure = Measure::lebesgue(1).unwrap();
        assert!(optimality_fk(&p, 4, 6, &Numerics::default(), Execution::Sequential).is_err());
    }

    #[test]
    fn necessity_origin_balls_constant() {
        let p = params(2.0, 2.0);
        let beta: f64 = 0.75;
        let n = Numerics {
            t_min: -30,
            t_max: 30,
            ..Default::default()
        };
        let rep = necessity_check(&p, &[0.25, 1.0, 4.0], &[0.0], &n, Execution::Parallel).unwrap();
        let expect = 1.0 / (beta * 2f64.powf(beta));
        for row in &rep.rows {
            assert!((row.raw_ratio - expect).abs() < 1e-10 * expect);
        }
        // trace ratio is dilation invariant for the critical weight
        let r0 = rep.rows[0].trace_ratio;
        for row in &rep.rows {
            assert!((row.trace_ratio / r0 - 1.0).abs() < 1e-6, "{} vs {r0}", row.trace_ratio);
        }
        let one = necessity_check(&p, &[2.0], &[1.0], &n, Execution::Parallel).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.sup_ratio, one.rows[0].raw_ratio);
    }

    #[test]
    fn necessity_requires_lambda_zero() {
        let p = params(2.0, 2.0).with_lambda(0.1);
        assert!(necessity_check(&p, &[1.0], &[0.0], &Numerics::default(), Execution::Sequential).is_err());
    }

    #[test]
    fn lebesgue_raw_ratio_grows() {
        let mut p = params(2.0, 2.0);
        p.measure = Measure::lebesgue(1).unwrap();
        let n = Numerics {
            t_min: -12,
            t_max: 12,
            max_window: 12,
            ..Default::default()
        };
        let rep = necessity_check(&p, &[1.0, 16.0, 256.0], &[0.0], &n, Execution::Parallel).unwrap();
        let r: Vec<f64> = rep.rows.iter().map(|b| b.raw_ratio).collect();
        assert!(r[0] < r[1] && r[1] < r[2]);
        // r^{1-e} with e = 3/4
        assert!((r[2] / r[1] - 16f64.powf(0.25)).abs() < 1e-12);
    }
}
