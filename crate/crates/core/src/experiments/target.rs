//! Target norms of `I_γ f` under `μ` and the trace ratio.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{classify_params, ratio, Numerics, RatioSeries, Theorem, TraceParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::{Measure, Side};
use crate::norms::{self, HerzTermLedger, NormSpec};
use crate::piecewise::PiecewisePowerFunction;
use crate::quad::{integrate, QuadOptions};
use crate::riesz::{riesz_potential_1d, RieszParams};

/// Which pair of norms a trace ratio compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormPair {
    /// `K̇^{p₂}_{λ,q₂}(μ)` over `K̇^{p₁}_{λ,q₁}(m)`.
    Herz,
    /// Lorentz-Herz with inner `L^{p₂,r₂}(μ)` over `L^{p₁,r₁}(m)`.
    LorentzHerz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub family: NormPair,
    #[serde(with = "crate::serde_f64")]
    pub source: f64,
    /// Tail-corrected target norm; `inf` when a tail does not decay.
    #[serde(with = "crate::serde_f64")]
    pub target: f64,
    #[serde(with = "crate::serde_f64")]
    pub ratio: f64,
    /// The target ledger did not converge.
    pub diverged: bool,
    pub source_ledger: HerzTermLedger,
    pub target_ledger: HerzTermLedger,
    pub warnings: Vec<String>,
}

struct TargetEval<'a> {
    f: &'a PiecewisePowerFunction,
    riesz: RieszParams,
    measure: Measure,
    p: f64,
    r: Option<f64>,
    numerics: Numerics,
    radial_breaks: Vec<f64>,
}

impl TargetEval<'_> {
    fn potential(&self, x: f64) -> Result<f64> {
        riesz_potential_1d(self.f, &self.riesz, x)
    }

    /// `‖I_γ f · χ_{Ω_t}‖` in `L^p(μ)` or `L^{p,r}(μ)`.
    fn inner(&self, t: i32) -> Result<f64> {
        match self.r {
            None => self.inner_lp(t),
            Some(r) => self.inner_lorentz(t, r),
        }
    }

    fn inner_lp(&self, t: i32) -> Result<f64> {
        let lo = 2f64.powi(t - 1);
        let hi = 2f64.powi(t);
        let mid = 0.5 * (lo + hi);
        let opts = QuadOptions {
            rel_tol: self.numerics.quad_tol,
            abs_tol: 0.0,
            max_panels: 4000,
        };
        // (scale, ∫ (|I f|/scale)^p u^κ du) per side
        let mut parts = Vec::new();
        for side in [Side::Negative, Side::Positive] {
            let Some(kappa) = self.measure.radial_density_exponent(side) else {
                continue;
            };
            let sgn = side.sign();
            let mut scale = 0.0f64;
            for u in [lo, mid, hi] {
                scale = scale.max(self.potential(sgn * u)?.abs());
            }
            if scale == 0.0 || !scale.is_finite() {
                scale = 1.0;
            }
            let failure = RefCell::new(None);
            let g = |u: f64| match self.potential(sgn * u) {
                Ok(v) => (v.abs() / scale).powf(self.p) * (u / mid).powf(kappa),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            };
            let res = integrate(g, lo, hi, &self.radial_breaks, opts);
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            let (val, _) = res?;
            parts.push((scale, val * mid.powf(kappa)));
        }
        let top = parts.iter().map(|x| x.0).fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let total: f64 = parts.iter().map(|&(s, v)| (s / top).powf(self.p) * v).sum();
        Ok(top * total.powf(1.0 / self.p))
    }

    /// Lorentz norm of the midpoint step approximation of `I_γ f` on the
    /// annulus (`grid_points` cells per side).
    fn inner_lorentz(&self, t: i32, r: f64) -> Result<f64> {
        let lo = 2f64.powi(t - 1);
        let hi = 2f64.powi(t);
        let m = self.numerics.grid_points;
        let mut cells = Vec::with_capacity(2 * m);
        for side in [Side::Negative, Side::Positive] {
            if self.measure.radial_density_exponent(side).is_none() {
                continue;
            }
            for i in 0..m {
                let a = lo + (hi - lo) * i as f64 / m as f64;
                let b = if i + 1 == m { hi } else { lo + (hi - lo) * (i + 1) as f64 / m as f64 };
                let v = self.potential(side.sign() * 0.5 * (a + b))?.abs();
                cells.push((v, self.measure.radial_mass(side, a, b)));
            }
        }
        Ok(norms::star_of_steps(&mut cells, self.p, r))
    }
}

fn weighted_ledger(cache: &BTreeMap<i32, f64>, lambda: f64, q: f64, tol: f64) -> Result<HerzTermLedger> {
    let terms = cache
        .iter()
        .map(|(&t, &v)| (t, 2f64.powf(t as f64 * lambda) * v))
        .collect();
    HerzTermLedger::from_terms(terms, q, true, true, tol)
}

/// Unweighted annulus norms `‖I_γ f · χ_{Ω_t}‖` for `t` in `window`.
pub(crate) fn target_inner_norms(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    numerics: &Numerics,
    window: (i32, i32),
    exec: Execution,
) -> Result<BTreeMap<i32, f64>> {
    let mut cache = BTreeMap::new();
    fill_inner(f, params, family, numerics, window, exec, &mut cache)?;
    Ok(cache)
}

fn fill_inner(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    numerics: &Numerics,
    window: (i32, i32),
    exec: Execution,
    cache: &mut BTreeMap<i32, f64>,
) -> Result<()> {
    params.require_dim1()?;
    let r = match family {
        NormPair::Herz => None,
        NormPair::LorentzHerz => Some(
            params
                .r2
                .ok_or_else(|| Error::invalid("Lorentz-Herz target needs r2"))?,
        ),
    };
    let mut radial_breaks: Vec<f64> = f.breakpoints().iter().map(|b| b.abs()).collect();
    radial_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radial_breaks.dedup();
    let eval = TargetEval {
        f,
        riesz: RieszParams::new(params.gamma, 1)?,
        measure: params.measure,
        p: params.p2,
        r,
        numerics: *numerics,
        radial_breaks,
    };
    let missing: Vec<i32> = (window.0..=window.1).filter(|t| !cache.contains_key(t)).collect();
    let vals = exec.map(&missing, |&t| eval.inner(t));
    for (t, v) in missing.into_iter().zip(vals) {
        cache.insert(t, v?);
    }
    Ok(())
}

/// Ledger of `2^{tλ}‖I_γ f · χ_{Ω_t}‖_{target(μ)}`.
///
/// Starts from the configured window and widens it by 20 annuli per side
/// while both tails decay but the extrapolated remainder still exceeds the
/// tail tolerance, up to `|t| <= max_window`.
pub fn target_ledger(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    numerics: &Numerics,
    exec: Execution,
) -> Result<HerzTermLedger> {
    numerics.validate()?;
    if f.is_zero() {
        return HerzTermLedger::from_terms(Vec::new(), params.q2, false, false, numerics.tail_tolerance);
    }
    let mut cache = BTreeMap::new();
    let (mut lo, mut hi) = (numerics.t_min, numerics.t_max);
    loop {
        fill_inner(f, params, family, numerics, (lo, hi), exec, &mut cache)?;
        let ledger = weighted_ledger(&cache, params.lambda, params.q2, numerics.tail_tolerance)?;
        let at_limit = lo <= -numerics.max_window && hi >= numerics.max_window;
        if ledger.converged || !ledger.decaying() || at_limit {
            return Ok(ledger);
        }
        lo = (lo - 20).max(-numerics.max_window);
        hi = (hi + 20).min(numerics.max_window);
    }
}

pub(crate) fn source_spec(params: &TraceParams, family: NormPair, numerics: &Numerics) -> Result<NormSpec> {
    let lebesgue = Measure::lebesgue(params.n)?;
    let spec = match family {
        NormPair::Herz => NormSpec::herz(params.p1, params.q1, params.lambda, lebesgue)?,
        NormPair::LorentzHerz => {
            let r1 = params
                .r1
                .ok_or_else(|| Error::invalid("Lorentz-Herz source needs r1"))?;
            NormSpec::lorentz_herz(params.p1, r1, params.q1, params.lambda, lebesgue)?
        }
    };
    spec.with_truncation(numerics.truncation()?)
}

pub(crate) fn source_norm(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    numerics: &Numerics,
    exec: Execution,
) -> Result<norms::HerzNorm> {
    let spec = source_spec(params, family, numerics)?;
    match family {
        NormPair::Herz => norms::herz_norm_with(f, &spec, exec),
        NormPair::LorentzHerz => norms::lorentz_herz_norm_with(f, &spec, exec),
    }
}

/// `‖I_γ f‖_{target(μ)} / ‖f‖_{source(m)}` with both ledgers.
///
/// Inadmissible parameters are allowed and produce a warning.
pub fn trace_ratio(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    numerics: &Numerics,
    exec: Execution,
) -> Result<TraceResult> {
    params.require_dim1()?;
    let theorem = match family {
        NormPair::Herz => Theorem::Mt,
        NormPair::LorentzHerz => Theorem::MtLh,
    };
    let class = classify_params(params, theorem);
    let mut warnings = Vec::new();
    if !class.admissible {
        warnings.push(format!("parameters violate: {}", class.violated_conditions.join("; ")));
    }
    if !class.growth.holds {
        warnings.push(format!("measure fails the ball-growth condition with exponent {}", class.growth.exponent));
    }
    let source = source_norm(f, params, family, numerics, exec)?;
    let target_ledger = target_ledger(f, params, family, numerics, exec)?;
    let target = if target_ledger.decaying() {
        target_ledger.value_with_tail()
    } else {
        f64::INFINITY
    };
    Ok(TraceResult {
        family,
        source: source.value,
        target,
        ratio: ratio(target, source.value),
        diverged: !target_ledger.converged,
        source_ledger: source.ledger,
        target_ledger,
        warnings,
    })
}

/// Trace ratios of the dilations `f(s·)` over `scales`.
pub fn dilation_series(
    f: &PiecewisePowerFunction,
    params: &TraceParams,
    family: NormPair,
    scales: &[f64],
    numerics: &Numerics,
    exec: Execution,
) -> Result<RatioSeries> {
    let mut series = RatioSeries::new("dilation f(s x)");
    for &s in scales {
        let r = trace_ratio(&f.dilated(s)?, params, family, numerics, exec)?;
        series.push(s, r.source, r.target, r.diverged);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TraceParams {
        TraceParams::new(0.25, 2.0, 3.0, 1.0, 2.0, 0.0, Measure::power_weight(0.75).unwrap())
    }

    #[test]
    fn indicator_ratio_converges() {
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let r = trace_ratio(&f, &params(), NormPair::Herz, &Numerics::default(), Execution::Parallel).unwrap();
        assert!(!r.diverged, "{:?}", r.target_ledger.tail_estimate);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn lambda_outside_window_diverges() {
        let f = PiecewisePowerFunction::annulus_indicator(1);
        let p = params().with_lambda(0.6);
        let r = trace_ratio(&f, &p, NormPair::Herz, &Numerics::default(), Execution::Parallel).unwrap();
        assert!(r.diverged);
        assert_eq!(r.target, f64::INFINITY);
        let slope = r.target_ledger.plus_slope.unwrap();
        assert!((slope - 0.1).abs() < 0.01, "{slope}");
    }

    #[test]
    fn zero_function_sentinel() {
        let r = trace_ratio(
            &PiecewisePowerFunction::zero(),
            &params(),
            NormPair::Herz,
            &Numerics::default(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!((r.source, r.target), (0.0, 0.0));
        assert!(r.ratio.is_nan() && !r.diverged);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = PiecewisePowerFunction::indicator(-1.0, 0.5).unwrap();
        let p = TraceParams::new(0.25, 2.0, 4.0, 2.0, 2.0, 0.1, Measure::lebesgue(1).unwrap());
        let n = Numerics {
            t_min: -20,
            t_max: 20,
            max_window: 20,
            ..Default::default()
        };
        let a = target_ledger(&f, &p, NormPair::Herz, &n, Execution::Sequential).unwrap();
        let b = target_ledger(&f, &p, NormPair::Herz, &n, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
