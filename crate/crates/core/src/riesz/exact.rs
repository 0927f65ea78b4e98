//! Pointwise evaluation of `I_γ f(x)` for piecewise power functions in 1D.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::pow_diff;
use crate::piecewise::{PiecewisePowerFunction, PowerPiece};
use crate::quad::gk15;

use super::RieszParams;

/// Panels narrower than this fraction of the interval are closed analytically.
const MIN_REL_WIDTH: f64 = 1.0 / (1u64 << 44) as f64;
const MAX_DEPTH: u32 = 60;
/// Dyadic panels used on an infinite piece before the asymptotic tail.
const TAIL_OCTAVES: i32 = 48;

/// `∫_a^b |x - y|^{γ-1} dy` for finite `a < b`.
fn indicator_integral(a: f64, b: f64, x: f64, g: f64) -> f64 {
    // far^γ − (far − w)^γ, formed from the exact width when x is far away
    let outside = |far: f64, near: f64| -> f64 {
        let w = b - a;
        if w < 0.5 * far {
            -far.powf(g) * (g * (-w / far).ln_1p()).exp_m1() / g
        } else {
            pow_diff(far, near, g) / g
        }
    };
    if x <= a {
        outside(b - x, a - x)
    } else if x >= b {
        outside(x - a, x - b)
    } else {
        ((x - a).powf(g) + (b - x).powf(g)) / g
    }
}

/// Integrand `|y|^e |x-y|^{γ-1}` in a local coordinate `t`, where
/// `y = anchor + dir·t`. The singular points sit at `t = d0` (for `y = 0`)
/// and `t = dx` (for `y = x`); distances are formed as `|d - t|`, so a
/// singular point at the anchor keeps full relative precision.
struct PowerKernel {
    e: f64,
    gm1: f64,
    d0: f64,
    dx: f64,
}

impl PowerKernel {
    fn framed(e: f64, gm1: f64, x: f64, anchor: f64, dir: f64) -> Self {
        PowerKernel {
            e,
            gm1,
            d0: dir * (0.0 - anchor),
            dx: dir * (x - anchor),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        (self.d0 - t).abs().powf(self.e) * (self.dx - t).abs().powf(self.gm1)
    }

    /// Exponent of the product at a singular point `s`, and the value of the
    /// remaining factor there.
    fn local(&self, s: f64) -> (f64, f64) {
        let mut alpha = 0.0;
        let mut rest = 1.0;
        if s == self.d0 {
            alpha += self.e;
        } else {
            rest *= (self.d0 - s).abs().powf(self.e);
        }
        if s == self.dx {
            alpha += self.gm1;
        } else {
            rest *= (self.dx - s).abs().powf(self.gm1);
        }
        (alpha, rest)
    }

    fn is_singular(&self, s: f64) -> bool {
        (s == self.d0 && self.e != 0.0) || s == self.dx
    }

    fn dist_to_singular(&self, l: f64, r: f64) -> f64 {
        let d = |s: f64| {
            if s < l {
                l - s
            } else if s > r {
                s - r
            } else {
                0.0
            }
        };
        let mut m = d(self.dx);
        if self.e != 0.0 {
            m = m.min(d(self.d0));
        }
        m
    }

    /// Panel refinement toward singular points; `scale` is the width of the
    /// enclosing interval.
    fn panel(&self, l: f64, r: f64, scale: f64, depth: u32) -> Result<f64> {
        let w = r - l;
        if self.dist_to_singular(l, r) >= w {
            return Ok(gk15(&|t| self.eval(t), l, r).0);
        }
        if depth >= MAX_DEPTH || w <= MIN_REL_WIDTH * scale {
            let s = if self.is_singular(l) {
                l
            } else if self.is_singular(r) {
                r
            } else {
                return Ok(gk15(&|t| self.eval(t), l, r).0);
            };
            let (alpha, rest) = self.local(s);
            if alpha <= -1.0 {
                return Err(Error::divergence(format!(
                    "kernel integrand has a non-integrable singularity of order {alpha}"
                )));
            }
            return Ok(rest * w.powf(alpha + 1.0) / (alpha + 1.0));
        }
        let m = 0.5 * (l + r);
        Ok(self.panel(l, m, scale, depth + 1)? + self.panel(m, r, scale, depth + 1)?)
    }
}

/// `∫_a^b |y|^e |x-y|^{γ-1} dy` for `0 <= a < b`, `b` possibly infinite.
fn power_integral_1d(e: f64, gm1: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    if b.is_infinite() {
        let k = e + gm1 + 1.0;
        if k >= 0.0 {
            return Err(Error::divergence(format!(
                "|y|^{e} against the kernel is not integrable at infinity"
            )));
        }
        let big_r = 2.0 * a.max(x.abs()).max(1.0);
        let mut total = power_integral_1d(e, gm1, x, a, big_r)?;
        let far = PowerKernel::framed(e, gm1, x, 0.0, 1.0);
        let mut lo = big_r;
        for _ in 0..TAIL_OCTAVES {
            total += gk15(&|t| far.eval(t), lo, 2.0 * lo).0;
            lo *= 2.0;
        }
        // |x - y|^{γ-1} ≈ y^{γ-1} beyond lo.
        total += lo.powf(k) / -k;
        return Ok(total);
    }
    let mut cuts = vec![a];
    for s in [0.0, x] {
        if s > a && s < b {
            cuts.push(s);
        }
    }
    cuts.push(b);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let m = 0.5 * (l + r);
        let left = PowerKernel::framed(e, gm1, x, l, 1.0);
        let right = PowerKernel::framed(e, gm1, x, r, -1.0);
        total += left.panel(0.0, m - l, m - l, 0)?;
        total += right.panel(0.0, r - m, r - m, 0)?;
    }
    Ok(total)
}

fn piece_potential(p: &PowerPiece, x: f64, g: f64) -> Result<f64> {
    if p.exponent == 0.0 {
        if p.a.is_infinite() || p.b.is_infinite() {
            return Err(Error::divergence(format!(
                "constant piece on ({}, {}) has an infinite potential",
                p.a, p.b
            )));
        }
        return Ok(p.coef * indicator_integral(p.a, p.b, x, g));
    }
    // Reflect negative pieces onto the positive axis.
    let (a, b, xx) = if p.b <= 0.0 { (-p.b, -p.a, -x) } else { (p.a, p.b, x) };
    if a < 0.0 {
        // Piece straddles the origin (only allowed for positive exponents).
        let left = PowerPiece { b: 0.0, ..*p };
        let right = PowerPiece { a: 0.0, ..*p };
        return Ok(piece_potential(&left, x, g)? + piece_potential(&right, x, g)?);
    }
    Ok(p.coef * power_integral_1d(p.exponent, g - 1.0, xx, a, b)?)
}

/// `I_γ f(x) = ∫ f(y) |x - y|^{γ-1} dy` for `n = 1`.
pub fn riesz_potential_1d(f: &PiecewisePowerFunction, params: &RieszParams, x: f64) -> Result<f64> {
    if params.n != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: params.n });
    }
    if !x.is_finite() {
        return Err(Error::invalid(format!("evaluation point must be finite, got {x}")));
    }
    let mut total = 0.0;
    for p in f.pieces() {
        total += piece_potential(p, x, params.gamma)?;
    }
    Ok(total)
}

/// [`riesz_potential_1d`] at many points, in input order.
pub fn riesz_potential_1d_batch(
    f: &PiecewisePowerFunction,
    params: &RieszParams,
    xs: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    exec.map(xs, |&x| riesz_potential_1d(f, params, x)).into_iter().collect()
}
