//! Distribution function, decreasing rearrangement `f*` and maximal average
//! `f**` of a piecewise power function with respect to a measure.
//!
//! Everything is driven by the closed-form level sets of `c·u^a` on each
//! radial piece. `f*` is obtained by inverting the distribution function
//! between consecutive critical levels; `∫₀ᵗ f*` uses the identity
//! `∫₀ᵗ f* = ∫_{|f|>s} |f| dν + s·(t − ν(|f|>s))` with `s = f*(t)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::numeric::power_integral;
use crate::piecewise::{PiecewisePowerFunction, RadialPiece};

#[derive(Debug, Clone, Copy)]
struct WeightedPiece {
    piece: RadialPiece,
    /// Density exponent of the measure on this side.
    kappa: f64,
}

impl WeightedPiece {
    /// `{u : c·u^a > s}` (or `>=` when `strict` is false) as a `u`-interval.
    fn level_interval(&self, s: f64, strict: bool) -> Option<(f64, f64)> {
        let p = &self.piece;
        if s <= 0.0 && (strict || s < 0.0) {
            return Some((p.u0, p.u1));
        }
        let (lo, hi) = if p.exponent == 0.0 {
            let inside = if strict { p.coef > s } else { p.coef >= s };
            if !inside {
                return None;
            }
            (p.u0, p.u1)
        } else {
            let thr = (s / p.coef).powf(1.0 / p.exponent);
            if p.exponent > 0.0 {
                (p.u0.max(thr), p.u1)
            } else {
                (p.u0, p.u1.min(thr))
            }
        };
        (lo < hi).then_some((lo, hi))
    }

    fn mass(&self, lo: f64, hi: f64) -> f64 {
        power_integral(self.kappa, lo, hi)
    }

    fn moment(&self, lo: f64, hi: f64) -> f64 {
        self.piece.coef * power_integral(self.piece.exponent + self.kappa, lo, hi)
    }
}

/// Precomputed distribution data for a function/measure pair.
#[derive(Debug, Clone)]
pub struct Distribution {
    pieces: Vec<WeightedPiece>,
    levels: Vec<f64>,
}

impl Distribution {
    pub fn new(f: &PiecewisePowerFunction, measure: &Measure) -> Result<Self> {
        measure.require_dim(1)?;
        let pieces: Vec<WeightedPiece> = f
            .radial_pieces()
            .into_iter()
            .filter_map(|piece| {
                measure
                    .radial_density_exponent(piece.side)
                    .map(|kappa| WeightedPiece { piece, kappa })
            })
            .collect();
        let mut levels: Vec<f64> = pieces
            .iter()
            .flat_map(|w| {
                let (a, b) = w.piece.end_values();
                [a, b]
            })
            .filter(|v| v.is_finite() && *v > 0.0)
            .collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        Ok(Distribution { pieces, levels })
    }

    /// Finite positive values where some piece starts or stops contributing.
    pub fn critical_levels(&self) -> &[f64] {
        &self.levels
    }

    /// `ν(|f| > s)`; `+∞` when the level set has infinite mass.
    pub fn measure_above(&self, s: f64) -> f64 {
        self.pieces
            .iter()
            .filter_map(|w| w.level_interval(s, true).map(|(lo, hi)| w.mass(lo, hi)))
            .sum()
    }

    /// `ln ν(|f| > e^w)`, finite where `ν(|f| > e^w)` overflows or `e^w`
    /// underflows.
    pub(crate) fn ln_measure_above_at(&self, w: f64) -> f64 {
        let s = w.exp();
        let direct = self.measure_above(s);
        if s > 0.0 && direct.is_finite() {
            return direct.ln();
        }
        let mut logs = Vec::new();
        for wp in &self.pieces {
            let p = &wp.piece;
            let (ln_u0, ln_u1) = (p.u0.ln(), p.u1.ln());
            let (ln_lo, ln_hi) = if p.exponent == 0.0 {
                if p.coef.ln() <= w {
                    continue;
                }
                (ln_u0, ln_u1)
            } else {
                let ln_thr = (w - p.coef.ln()) / p.exponent;
                if p.exponent > 0.0 {
                    (ln_u0.max(ln_thr), ln_u1)
                } else {
                    (ln_u0, ln_u1.min(ln_thr))
                }
            };
            if !(ln_lo < ln_hi) {
                continue;
            }
            let k1 = wp.kappa + 1.0;
            if ln_hi.is_infinite() {
                return f64::INFINITY;
            }
            // ln((hi^k1 − lo^k1) / k1)
            logs.push(k1 * ln_hi + (-(k1 * (ln_lo - ln_hi)).exp()).ln_1p() - k1.ln());
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return top;
        }
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }

    /// `ν(|f| >= s)`, the left limit of [`Self::measure_above`] at `s > 0`.
    pub fn measure_at_least(&self, s: f64) -> f64 {
        self.pieces
            .iter()
            .filter_map(|w| w.level_interval(s, false).map(|(lo, hi)| w.mass(lo, hi)))
            .sum()
    }

    /// `∫_{|f| > s} |f| dν`.
    pub fn integral_above(&self, s: f64) -> f64 {
        self.pieces
            .iter()
            .filter_map(|w| w.level_interval(s, true).map(|(lo, hi)| w.moment(lo, hi)))
            .sum()
    }

    /// Whether `|f|` is unbounded (some piece is singular at the origin).
    pub fn is_unbounded(&self) -> bool {
        self.pieces.iter().any(|w| {
            let (a, b) = w.piece.end_values();
            a.is_infinite() || b.is_infinite()
        })
    }

    /// `ν(|f| > 0)`.
    pub fn support_mass(&self) -> f64 {
        self.measure_above(0.0)
    }

    /// `f*(t) = inf{s >= 0 : ν(|f| > s) <= t}`.
    pub fn rearrangement(&self, t: f64) -> f64 {
        if self.measure_above(0.0) <= t {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = None;
        for &c in &self.levels {
            if self.measure_above(c) <= t {
                hi = Some(c);
                break;
            }
            lo = c;
        }
        let hi = match hi {
            Some(h) => h,
            None => {
                let mut h = if lo > 0.0 { 2.0 * lo } else { 1.0 };
                let mut n = 0;
                while self.measure_above(h) > t {
                    h *= 2.0;
                    n += 1;
                    if n > 2000 || !h.is_finite() {
                        return f64::INFINITY;
                    }
                }
                // Only the last doubling step brackets the answer.
                lo = lo.max(h / 2.0);
                h
            }
        };
        self.bisect(lo, hi, t)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, t: f64) -> f64 {
        if lo == 0.0 {
            // geometric search for a positive lower bracket; levels far
            // below the smallest critical level occur for large t
            let mut l = hi;
            loop {
                l *= 2f64.powi(-32);
                if l == 0.0 {
                    return hi;
                }
                if self.measure_above(l) > t {
                    lo = l;
                    break;
                }
                hi = l;
            }
        }
        for _ in 0..400 {
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if mid <= lo || mid >= hi {
                break;
            }
            if self.measure_above(mid) <= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `∫₀ᵗ f*(u) du`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        let s = self.rearrangement(t);
        if s.is_infinite() {
            return Err(Error::divergence("rearrangement is infinite"));
        }
        let j = self.integral_above(s);
        if !j.is_finite() {
            return Err(Error::divergence(format!("∫|f| over {{|f| > {s}}} diverges")));
        }
        let d = self.measure_above(s);
        let extra = if s > 0.0 { s * (t - d).max(0.0) } else { 0.0 };
        Ok(j + extra)
    }

    /// `f**(t) = (1/t) ∫₀ᵗ f*`.
    pub fn maximal_average(&self, t: f64) -> Result<f64> {
        Ok(self.cumulative(t)? / t)
    }

    /// Points in `t` where `f*` may fail to be smooth: `ν(|f| > c)` and
    /// `ν(|f| >= c)` over the critical levels `c`.
    pub fn t_breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .levels
            .iter()
            .flat_map(|&c| [self.measure_above(c), self.measure_at_least(c)])
            .chain(std::iter::once(self.support_mass()))
            .filter(|t| t.is_finite() && *t > 0.0)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }
}

/// `ν({|f| > s})`. Infinite mass is returned as `f64::INFINITY`.
pub fn distribution_function(f: &PiecewisePowerFunction, measure: &Measure, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid(format!("level must be nonnegative, got {s}")));
    }
    Ok(Distribution::new(f, measure)?.measure_above(s))
}

/// `f*(t)`.
pub fn decreasing_rearrangement(f: &PiecewisePowerFunction, measure: &Measure, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    Ok(Distribution::new(f, measure)?.rearrangement(t))
}

/// `f**(t)`.
pub fn maximal_average(f: &PiecewisePowerFunction, measure: &Measure, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    Distribution::new(f, measure)?.maximal_average(t)
}

/// Sampled `f*` on a grid of `t` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementProfile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    /// True when every value came from the closed-form distribution function.
    pub exact: bool,
}

impl RearrangementProfile {
    pub fn sample(f: &PiecewisePowerFunction, measure: &Measure, ts: &[f64]) -> Result<Self> {
        let mut ts: Vec<f64> = ts.to_vec();
        if ts.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("profile abscissae must be positive"));
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = Distribution::new(f, measure)?;
        let values = ts.iter().map(|&t| d.rearrangement(t)).collect();
        Ok(RearrangementProfile {
            breakpoints: ts,
            values,
            exact: true,
        })
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0]) && self.values.iter().all(|v| *v >= 0.0)
    }

    /// Two-column CSV `t,f_star`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,f_star")?;
        for (t, v) in self.breakpoints.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PowerPiece;

    fn leb() -> Measure {
        Measure::lebesgue(1).unwrap()
    }

    fn singular() -> PiecewisePowerFunction {
        PiecewisePowerFunction::radial_power(1.0, -0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let ind = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(distribution_function(&ind, &leb(), 0.5).unwrap(), 1.0);
        assert_eq!(distribution_function(&ind, &leb(), 1.0).unwrap(), 0.0);
        let d = distribution_function(&singular(), &leb(), 2.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert!(distribution_function(&ind, &leb(), -1.0).is_err());
    }

    #[test]
    fn infinite_mass_sentinel() {
        let f = PiecewisePowerFunction::new(vec![PowerPiece::new(1.0, f64::INFINITY, 1.0, -2.0)]).unwrap();
        let d = Distribution::new(&f, &leb()).unwrap();
        assert_eq!(d.measure_above(0.0), f64::INFINITY);
        // |f| > 1/4 on (1, 2)
        assert!((d.measure_above(0.25) - 1.0).abs() < 1e-14);
        assert!((d.rearrangement(1.0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rearrangement_examples() {
        let ind = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(decreasing_rearrangement(&ind, &leb(), 0.5).unwrap(), 1.0);
        assert_eq!(decreasing_rearrangement(&ind, &leb(), 1.5).unwrap(), 0.0);
        // plateau boundary: f* takes the lower level at t = 1
        assert_eq!(decreasing_rearrangement(&ind, &leb(), 1.0).unwrap(), 0.0);
        let v = decreasing_rearrangement(&singular(), &leb(), 1.0).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-14);
        let two = PiecewisePowerFunction::new(vec![
            PowerPiece::constant(0.0, 1.0, 3.0),
            PowerPiece::constant(2.0, 4.0, 1.0),
        ])
        .unwrap();
        assert_eq!(decreasing_rearrangement(&two, &leb(), 1.5).unwrap(), 1.0);
        assert_eq!(decreasing_rearrangement(&two, &leb(), 0.5).unwrap(), 3.0);
    }

    #[test]
    fn maximal_average_examples() {
        let ind = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        assert!((maximal_average(&ind, &leb(), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((maximal_average(&ind, &leb(), 2.0).unwrap() - 0.5).abs() < 1e-15);
        let v = maximal_average(&singular(), &leb(), 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        // t = 1/2: f* = (u/2)^{-1/2} on (0, 1/2], average = 2·2^{1/2}·(1/2)^{1/2}/(1/2)... closed form
        let half = maximal_average(&singular(), &leb(), 0.5).unwrap();
        let expected = (2f64.sqrt() * 2.0 * 0.5f64.sqrt()) / 0.5;
        assert!((half - expected).abs() < 1e-12);
    }

    #[test]
    fn divergent_average_is_an_error() {
        let f = PiecewisePowerFunction::radial_power(1.0, -1.0, 0.0, 1.0).unwrap();
        assert!(matches!(maximal_average(&f, &leb(), 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn rearrangement_under_power_weight() {
        // μ((0,4)) = 4 for β = 1/2; χ_(0,4) rearranges to χ_[0,4).
        let mu = Measure::power_weight(0.5).unwrap();
        let f = PiecewisePowerFunction::indicator(-1.0, 4.0).unwrap();
        assert_eq!(decreasing_rearrangement(&f, &mu, 3.9).unwrap(), 1.0);
        assert_eq!(decreasing_rearrangement(&f, &mu, 4.1).unwrap(), 0.0);
    }

    #[test]
    fn log_distribution_survives_overflow() {
        let tail = PiecewisePowerFunction::new(vec![
            PowerPiece::new(2.0, f64::INFINITY, 1.0, -0.75),
            PowerPiece::constant(-1.0, 0.0, 3.0),
        ])
        .unwrap();
        for m in [leb(), Measure::power_weight(0.5).unwrap()] {
            let d = Distribution::new(&tail, &m).unwrap();
            for w in [-5.0, -1.0, 0.5, 1.05] {
                let direct = d.measure_above(f64::exp(w)).ln();
                let logged = d.ln_measure_above_at(w);
                assert!(direct == logged || (direct - logged).abs() <= 1e-12 * direct.abs().max(1.0), "w={w}: {direct} vs {logged}");
            }
        }
        // Lebesgue: ν = (e^{-4w/3} − 2) + 1 for small e^w, so ln ν ≈ −4w/3
        let d = Distribution::new(&tail, &leb()).unwrap();
        assert!(d.measure_above(f64::exp(-600.0)).is_infinite());
        assert!((d.ln_measure_above_at(-600.0) - 800.0).abs() < 1e-9);
        assert!((d.ln_measure_above_at(-1000.0) - 4000.0 / 3.0).abs() < 1e-9);
        assert_eq!(d.ln_measure_above_at(5.0), f64::NEG_INFINITY);
    }

    #[test]
    fn profile_csv() {
        let p = RearrangementProfile::sample(&singular(), &leb(), &[0.5, 1.0, 2.0, 3.0]).unwrap();
        assert!(p.is_nonincreasing());
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,f_star\n0.5,2\n"));
    }
}
