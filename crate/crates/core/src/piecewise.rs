//! Exact one-dimensional test functions: finite sums of `c·|x|^a` on
//! disjoint intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Side;

/// `x ↦ coef · |x|^exponent` on the open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPiece {
    pub a: f64,
    pub b: f64,
    pub coef: f64,
    #[serde(default)]
    pub exponent: f64,
}

impl PowerPiece {
    pub fn new(a: f64, b: f64, coef: f64, exponent: f64) -> Self {
        PowerPiece { a, b, coef, exponent }
    }

    pub fn constant(a: f64, b: f64, coef: f64) -> Self {
        PowerPiece::new(a, b, coef, 0.0)
    }

    fn value(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coef
        } else {
            self.coef * x.abs().powf(self.exponent)
        }
    }
}

/// A piece restricted to one side of the origin, in the radial variable
/// `u = |x| ∈ (u0, u1)`, carrying `|coef| · u^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPiece {
    pub side: Side,
    pub u0: f64,
    pub u1: f64,
    pub coef: f64,
    pub exponent: f64,
}

impl RadialPiece {
    pub fn value(&self, u: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coef
        } else {
            self.coef * u.powf(self.exponent)
        }
    }

    /// `|f|` at the inner and outer ends (limits; may be `0` or `∞`).
    pub fn end_values(&self) -> (f64, f64) {
        (self.value(self.u0), self.value(self.u1))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<PowerPiece>", into = "Vec<PowerPiece>")]
pub struct PiecewisePowerFunction {
    pieces: Vec<PowerPiece>,
}

impl TryFrom<Vec<PowerPiece>> for PiecewisePowerFunction {
    type Error = Error;
    fn try_from(p: Vec<PowerPiece>) -> Result<Self> {
        PiecewisePowerFunction::new(p)
    }
}

impl From<PiecewisePowerFunction> for Vec<PowerPiece> {
    fn from(f: PiecewisePowerFunction) -> Self {
        f.pieces
    }
}

impl PiecewisePowerFunction {
    /// Validates and sorts the pieces. Zero-coefficient pieces are dropped.
    pub fn new(pieces: Vec<PowerPiece>) -> Result<Self> {
        let mut pieces: Vec<PowerPiece> = pieces.into_iter().filter(|p| p.coef != 0.0).collect();
        for p in &pieces {
            if p.a.is_nan() || p.b.is_nan() || !(p.a < p.b) {
                return Err(Error::invalid(format!("piece interval ({}, {}) is empty", p.a, p.b)));
            }
            if !p.coef.is_finite() || !p.exponent.is_finite() {
                return Err(Error::invalid("piece coefficient and exponent must be finite"));
            }
            if p.exponent < 0.0 && p.a < 0.0 && p.b > 0.0 {
                return Err(Error::invalid(format!(
                    "piece ({}, {}) has exponent {} < 0 with the origin inside; split it at 0",
                    p.a, p.b, p.exponent
                )));
            }
        }
        pieces.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
        for w in pieces.windows(2) {
            if w[1].a < w[0].b {
                return Err(Error::invalid(format!(
                    "pieces ({}, {}) and ({}, {}) overlap",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        Ok(PiecewisePowerFunction { pieces })
    }

    pub fn zero() -> Self {
        PiecewisePowerFunction { pieces: Vec::new() }
    }

    /// `χ_{(a,b)}`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![PowerPiece::constant(a, b, 1.0)])
    }

    /// `coef · |x|^exponent · χ_{inner < |x| < outer}` (both sides of 0).
    pub fn radial_power(coef: f64, exponent: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::invalid(format!("need 0 <= inner < outer, got ({inner}, {outer})")));
        }
        Self::new(vec![
            PowerPiece::new(-outer, -inner, coef, exponent),
            PowerPiece::new(inner, outer, coef, exponent),
        ])
    }

    /// `χ_{Ω_t}` with `Ω_t = {2^{t-1} <= |x| < 2^t}`.
    pub fn annulus_indicator(t: i32) -> Self {
        Self::radial_power(1.0, 0.0, 2f64.powi(t - 1), 2f64.powi(t)).expect("valid annulus")
    }

    pub fn pieces(&self) -> &[PowerPiece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_step_function(&self) -> bool {
        self.pieces.iter().all(|p| p.exponent == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.a < x && x < p.b)
            .map_or(0.0, |p| p.value(x))
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        PiecewisePowerFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| PowerPiece { coef: p.coef * c, ..*p })
                .collect(),
        }
    }

    /// `x ↦ f(s·x)` for `s > 0`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("dilation factor must be positive, got {s}")));
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| PowerPiece {
                    a: p.a / s,
                    b: p.b / s,
                    coef: p.coef * s.powf(p.exponent),
                    exponent: p.exponent,
                })
                .collect(),
        )
    }

    /// `x ↦ f(x - shift)`. Only step functions can be translated exactly.
    pub fn translated(&self, shift: f64) -> Result<Self> {
        if !self.is_step_function() {
            return Err(Error::invalid("only step functions can be translated exactly"));
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| PowerPiece { a: p.a + shift, b: p.b + shift, ..*p })
                .collect(),
        )
    }

    /// Sum of two functions with disjoint supports.
    pub fn disjoint_sum(&self, other: &Self) -> Result<Self> {
        Self::new(self.pieces.iter().chain(&other.pieces).copied().collect())
    }

    /// `f · χ_{lo <= |x| < hi}`.
    pub fn restrict_radial(&self, lo: f64, hi: f64) -> Self {
        let mut out = Vec::new();
        for p in &self.pieces {
            for (a, b) in [(-hi, -lo), (lo, hi)] {
                let (na, nb) = (p.a.max(a), p.b.min(b));
                if na < nb {
                    out.push(PowerPiece { a: na, b: nb, ..*p });
                }
            }
        }
        PiecewisePowerFunction::new(out).expect("restriction keeps pieces disjoint")
    }

    /// `f · χ_{Ω_t}`.
    pub fn restrict_annulus(&self, t: i32) -> Self {
        self.restrict_radial(2f64.powi(t - 1), 2f64.powi(t))
    }

    /// Pieces split at the origin, in the radial variable `u = |x|`.
    pub fn radial_pieces(&self) -> Vec<RadialPiece> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let c = p.coef.abs();
            if p.b > 0.0 {
                out.push(RadialPiece {
                    side: Side::Positive,
                    u0: p.a.max(0.0),
                    u1: p.b,
                    coef: c,
                    exponent: p.exponent,
                });
            }
            if p.a < 0.0 {
                out.push(RadialPiece {
                    side: Side::Negative,
                    u0: (-p.b).max(0.0),
                    u1: -p.a,
                    coef: c,
                    exponent: p.exponent,
                });
            }
        }
        out
    }

    /// `(inf |x|, sup |x|)` over the support, or `None` for the zero function.
    pub fn radial_support(&self) -> Option<(f64, f64)> {
        let rp = self.radial_pieces();
        if rp.is_empty() {
            return None;
        }
        let lo = rp.iter().map(|p| p.u0).fold(f64::INFINITY, f64::min);
        let hi = rp.iter().map(|p| p.u1).fold(0.0, f64::max);
        Some((lo, hi))
    }

    /// All finite piece endpoints, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.a, p.b])
            .filter(|x| x.is_finite())
            .collect();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v.dedup();
        v
    }

    /// Classical derivative on each piece (jump parts are not represented).
    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for p in &self.pieces {
            if p.exponent == 0.0 {
                continue;
            }
            let k = p.coef * p.exponent;
            if p.b > 0.0 {
                out.push(PowerPiece::new(p.a.max(0.0), p.b, k, p.exponent - 1.0));
            }
            if p.a < 0.0 {
                out.push(PowerPiece::new(p.a, p.b.min(0.0), -k, p.exponent - 1.0));
            }
        }
        PiecewisePowerFunction::new(out).expect("derivative pieces stay disjoint")
    }

    /// Whether `f` has a jump at some piece endpoint.
    pub fn has_jumps(&self) -> bool {
        let lim = |p: &PowerPiece, x: f64| -> f64 {
            if x.is_infinite() {
                0.0
            } else {
                p.value(x)
            }
        };
        for (i, p) in self.pieces.iter().enumerate() {
            let left_neighbor = if i > 0 && self.pieces[i - 1].b == p.a {
                lim(&self.pieces[i - 1], p.a)
            } else {
                0.0
            };
            if p.a.is_finite() && (lim(p, p.a) - left_neighbor).abs() > 1e-12 * lim(p, p.a).abs().max(1.0) {
                return true;
            }
            let right_neighbor = if i + 1 < self.pieces.len() && self.pieces[i + 1].a == p.b {
                lim(&self.pieces[i + 1], p.b)
            } else {
                0.0
            };
            if p.b.is_finite() && (lim(p, p.b) - right_neighbor).abs() > 1e-12 * lim(p, p.b).abs().max(1.0) {
                return true;
            }
        }
        false
    }
}
