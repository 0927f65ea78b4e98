//! L^p, Lorentz, Herz and Lorentz–Herz norms with dyadic truncation.

mod ledger;
mod lorentz;

pub(crate) use lorentz::star_of_steps;
pub use ledger::{tail_exponent, HerzTermLedger, TailSide, DECAY_MARGIN, TAIL_TERMS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::Measure;
use crate::piecewise::PiecewisePowerFunction;
use crate::rearrange::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFamily {
    Lebesgue,
    Lorentz,
    LorentzMaximal,
    Herz,
    HerzInhomogeneous,
    LorentzHerz,
}

/// `f*` (star) or `f**` (double star) inside the Lorentz functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LorentzVariant {
    Star,
    DoubleStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    pub t_min: i32,
    pub t_max: i32,
    pub tail_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            t_min: -60,
            t_max: 60,
            tail_tolerance: 1e-8,
        }
    }
}

impl TruncationPolicy {
    pub fn new(t_min: i32, t_max: i32, tail_tolerance: f64) -> Result<Self> {
        let tp = TruncationPolicy {
            t_min,
            t_max,
            tail_tolerance,
        };
        tp.validate()?;
        Ok(tp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_min >= self.t_max {
            return Err(Error::invalid(format!(
                "truncation window needs t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::invalid("tail_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Which norm to evaluate and with which parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub family: NormFamily,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub measure: Measure,
    #[serde(default)]
    pub truncation: TruncationPolicy,
}

impl NormSpec {
    pub fn lebesgue(p: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::Lebesgue, p, None, None, None, measure)
    }

    pub fn lorentz(p: f64, r: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::Lorentz, p, Some(r), None, None, measure)
    }

    pub fn lorentz_maximal(p: f64, r: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::LorentzMaximal, p, Some(r), None, None, measure)
    }

    pub fn herz(p: f64, q: f64, lambda: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::Herz, p, None, Some(q), Some(lambda), measure)
    }

    pub fn herz_inhomogeneous(p: f64, q: f64, lambda: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::HerzInhomogeneous, p, None, Some(q), Some(lambda), measure)
    }

    pub fn lorentz_herz(p: f64, r: f64, q: f64, lambda: f64, measure: Measure) -> Result<Self> {
        Self::build(NormFamily::LorentzHerz, p, Some(r), Some(q), Some(lambda), measure)
    }

    fn build(
        family: NormFamily,
        p: f64,
        r: Option<f64>,
        q: Option<f64>,
        lambda: Option<f64>,
        measure: Measure,
    ) -> Result<Self> {
        let spec = NormSpec {
            family,
            p,
            r,
            q,
            lambda,
            measure,
            truncation: TruncationPolicy::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_truncation(mut self, truncation: TruncationPolicy) -> Result<Self> {
        truncation.validate()?;
        self.truncation = truncation;
        Ok(self)
    }

    fn needs(&self) -> (bool, bool) {
        use NormFamily::*;
        match self.family {
            Lebesgue => (false, false),
            Lorentz | LorentzMaximal => (true, false),
            Herz | HerzInhomogeneous => (false, true),
            LorentzHerz => (true, true),
        }
    }

    /// Checks parameter presence and ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::invalid(format!(
                "p must be a finite number > 1 (quasi-norm range p <= 1 is not supported), got {}",
                self.p
            )));
        }
        let (needs_r, needs_ql) = self.needs();
        match (needs_r, self.r) {
            (true, None) => return Err(Error::invalid(format!("{:?} norm needs r", self.family))),
            (false, Some(_)) => return Err(Error::invalid(format!("{:?} norm takes no r", self.family))),
            (true, Some(r)) if !(r >= 1.0) => return Err(Error::invalid(format!("r must be in [1, ∞], got {r}"))),
            _ => {}
        }
        match (needs_ql, self.q, self.lambda) {
            (true, Some(q), Some(l)) => {
                if !(q >= 1.0) {
                    return Err(Error::invalid(format!("q must be in [1, ∞], got {q}")));
                }
                if !l.is_finite() {
                    return Err(Error::invalid("lambda must be finite"));
                }
            }
            (true, _, _) => return Err(Error::invalid(format!("{:?} norm needs q and lambda", self.family))),
            (false, None, None) => {}
            (false, _, _) => return Err(Error::invalid(format!("{:?} norm takes no q or lambda", self.family))),
        }
        self.truncation.validate()
    }
}

/// Value of a Herz-type norm together with its per-annulus ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerzNorm {
    /// Window sum plus the extrapolated tail (when the tails decay).
    pub value: f64,
    pub ledger: HerzTermLedger,
}

fn piece_label(p: &crate::piecewise::RadialPiece) -> String {
    format!(
        "{}·|x|^{} on |x| ∈ ({}, {}) ({:?} side)",
        p.coef, p.exponent, p.u0, p.u1, p.side
    )
}

/// `‖f‖_{L^p(ν)}`, exact piecewise integration of `|f|^p`.
pub fn lp_norm(f: &PiecewisePowerFunction, measure: &Measure, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("p must be finite and >= 1, got {p}")));
    }
    measure.require_dim(1)?;
    let mut acc = 0.0;
    let mut scale = 0.0f64;
    let pieces = f.radial_pieces();
    for piece in &pieces {
        scale = scale.max(piece.coef);
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    for piece in &pieces {
        let Some(kappa) = measure.radial_density_exponent(piece.side) else {
            continue;
        };
        let m = crate::numeric::power_integral(piece.exponent * p + kappa, piece.u0, piece.u1);
        if !m.is_finite() {
            return Err(Error::divergence(format!("|f|^{p} is not integrable on {}", piece_label(piece))));
        }
        acc += (piece.coef / scale).powf(p) * m;
    }
    Ok(scale * acc.powf(1.0 / p))
}

/// Lorentz norm `‖f‖_{L^{p,r}(ν)}` (star) or `‖f‖_{L^{(p,r)}(ν)}` (double star).
pub fn lorentz_norm(
    f: &PiecewisePowerFunction,
    measure: &Measure,
    p: f64,
    r: f64,
    variant: LorentzVariant,
) -> Result<f64> {
    let p_ok = match variant {
        LorentzVariant::Star => p >= 1.0,
        LorentzVariant::DoubleStar => p > 1.0,
    };
    if !p_ok || !p.is_finite() {
        return Err(Error::invalid(format!("p out of range for {variant:?} Lorentz norm: {p}")));
    }
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("r must be in [1, ∞], got {r}")));
    }
    measure.require_dim(1)?;
    lorentz::check_power_integrability(f, measure, p, r.is_infinite())?;
    let d = Distribution::new(f, measure)?;
    match variant {
        LorentzVariant::Star => lorentz::star(&d, p, r),
        LorentzVariant::DoubleStar => lorentz::double_star(&d, p, r),
    }
}

/// Index `t` of the annulus `Ω_t = {2^{t-1} <= |x| < 2^t}` containing radius `u > 0`.
pub fn annulus_index(u: f64) -> i32 {
    let t = u.log2().floor() as i32 + 1;
    // Guard against rounding in log2 at exact powers of two.
    if 2f64.powi(t - 1) > u {
        t - 1
    } else if 2f64.powi(t) <= u {
        t + 1
    } else {
        t
    }
}

/// Builds a Herz ledger from an inner annulus norm.
///
/// `inner(t)` must return `‖f χ_{Ω_t}‖`; terms are weighted by `2^{tλ}`.
#[allow(clippy::too_many_arguments)]
pub fn herz_ledger_from<F>(
    window: (i32, i32),
    open_minus: bool,
    open_plus: bool,
    lambda: f64,
    q: f64,
    tail_tolerance: f64,
    exec: Execution,
    inner: F,
) -> Result<HerzTermLedger>
where
    F: Fn(i32) -> Result<f64> + Sync + Send,
{
    let (lo, hi) = window;
    let terms: Vec<Result<(i32, f64)>> = if lo <= hi {
        exec.map_range(lo..=hi, |t| inner(t).map(|v| (t, 2f64.powf(t as f64 * lambda) * v)))
    } else {
        Vec::new()
    };
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    HerzTermLedger::from_terms(terms, q, open_minus, open_plus, tail_tolerance)
}

/// Annulus window for a function with the given radial support.
fn window_for(support: Option<(f64, f64)>, tp: &TruncationPolicy) -> ((i32, i32), bool, bool) {
    match support {
        None => ((0, -1), false, false),
        Some((lo, hi)) => {
            let t_lo = if lo > 0.0 { annulus_index(lo) } else { i32::MIN };
            let t_hi = if hi.is_finite() {
                // the annulus containing radii just below hi
                let t = annulus_index(hi);
                if 2f64.powi(t - 1) == hi {
                    t - 1
                } else {
                    t
                }
            } else {
                i32::MAX
            };
            (
                (t_lo.max(tp.t_min), t_hi.min(tp.t_max)),
                t_lo < tp.t_min,
                t_hi > tp.t_max,
            )
        }
    }
}

fn inner_norm(f: &PiecewisePowerFunction, spec: &NormSpec, lorentz: bool) -> Result<f64> {
    if lorentz {
        lorentz_norm(f, &spec.measure, spec.p, spec.r.unwrap_or(spec.p), LorentzVariant::Star)
    } else {
        lp_norm(f, &spec.measure, spec.p)
    }
}

fn herz_impl(f: &PiecewisePowerFunction, spec: &NormSpec, exec: Execution, lorentz: bool) -> Result<HerzNorm> {
    spec.validate()?;
    let q = spec.q.unwrap();
    let lambda = spec.lambda.unwrap();
    let tp = &spec.truncation;
    let inhomogeneous = spec.family == NormFamily::HerzInhomogeneous;
    let (mut window, mut open_minus, open_plus) = window_for(f.radial_support(), tp);
    if inhomogeneous && window.0 <= window.1 {
        open_minus = false;
        window.0 = -1;
        window.1 = window.1.max(-1);
    }
    let ledger = herz_ledger_from(window, open_minus, open_plus, lambda, q, tp.tail_tolerance, exec, |t| {
        let piece = if inhomogeneous && t == -1 {
            f.restrict_radial(0.0, 0.5)
        } else {
            f.restrict_annulus(t)
        };
        if piece.is_zero() {
            return Ok(0.0);
        }
        inner_norm(&piece, spec, lorentz)
    })?;
    Ok(HerzNorm {
        value: ledger.value_with_tail(),
        ledger,
    })
}

/// Homogeneous or inhomogeneous Herz norm over the truncation window.
pub fn herz_norm(f: &PiecewisePowerFunction, spec: &NormSpec) -> Result<HerzNorm> {
    herz_norm_with(f, spec, Execution::default())
}

pub fn herz_norm_with(f: &PiecewisePowerFunction, spec: &NormSpec, exec: Execution) -> Result<HerzNorm> {
    if !matches!(spec.family, NormFamily::Herz | NormFamily::HerzInhomogeneous) {
        return Err(Error::invalid(format!("herz_norm called with a {:?} spec", spec.family)));
    }
    herz_impl(f, spec, exec, false)
}

/// Herz norm with the inner `L^p` norm replaced by the `L^{p,r}` (star) norm.
pub fn lorentz_herz_norm(f: &PiecewisePowerFunction, spec: &NormSpec) -> Result<HerzNorm> {
    lorentz_herz_norm_with(f, spec, Execution::default())
}

pub fn lorentz_herz_norm_with(f: &PiecewisePowerFunction, spec: &NormSpec, exec: Execution) -> Result<HerzNorm> {
    if spec.family != NormFamily::LorentzHerz {
        return Err(Error::invalid(format!("lorentz_herz_norm called with a {:?} spec", spec.family)));
    }
    herz_impl(f, spec, exec, true)
}

/// Any norm described by `spec`; Herz families return the tail-corrected value.
pub fn norm(f: &PiecewisePowerFunction, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    match spec.family {
        NormFamily::Lebesgue => lp_norm(f, &spec.measure, spec.p),
        NormFamily::Lorentz => lorentz_norm(f, &spec.measure, spec.p, spec.r.unwrap(), LorentzVariant::Star),
        NormFamily::LorentzMaximal => {
            lorentz_norm(f, &spec.measure, spec.p, spec.r.unwrap(), LorentzVariant::DoubleStar)
        }
        NormFamily::Herz | NormFamily::HerzInhomogeneous => Ok(herz_norm(f, spec)?.value),
        NormFamily::LorentzHerz => Ok(lorentz_herz_norm(f, spec)?.value),
    }
}
