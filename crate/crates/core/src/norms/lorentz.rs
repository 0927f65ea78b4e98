//! Lorentz quasi-norms from the closed-form distribution function.
//!
//! Star variant: `‖f‖_{p,r}^r = p ∫₀^∞ s^{r-1} D(s)^{r/p} ds`, integrated level
//! segment by level segment (closed form where `D` is constant, adaptive
//! quadrature in `ln s` otherwise). Double-star variant: `∫ (t^{1/p} f**)^r dt/t`
//! in `ln t`, with the exact tail beyond the support mass.

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::piecewise::PiecewisePowerFunction;
use crate::quad::{integrate, QuadOptions};
use crate::rearrange::Distribution;

const LN2: f64 = std::f64::consts::LN_2;
/// How far (in octaves) the sup search looks past the outermost breakpoint.
const SUP_OCTAVES: f64 = 48.0;

fn quad_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_panels: 4000,
    }
}

/// Checks that `|f|^p` has the integrability at `0` and `∞` that a Lorentz
/// `L^{p,r}` norm needs. With `weak` the borderline power is allowed.
pub(crate) fn check_power_integrability(
    f: &PiecewisePowerFunction,
    measure: &Measure,
    p: f64,
    weak: bool,
) -> Result<()> {
    for piece in f.radial_pieces() {
        let Some(kappa) = measure.radial_density_exponent(piece.side) else {
            continue;
        };
        let e = piece.exponent;
        let m = e * p + 1.0 + kappa;
        let name = || format!("{}·|x|^{} on |x| ∈ ({}, {}) ({:?} side)", piece.coef, e, piece.u0, piece.u1, piece.side);
        if piece.u0 == 0.0 && e < 0.0 {
            let ok = if weak { m >= 0.0 } else { m > 0.0 };
            if !ok {
                return Err(Error::divergence(format!("{} is too singular at the origin", name())));
            }
        }
        if piece.u1.is_infinite() {
            let ok = e < 0.0 && if weak { m <= 0.0 } else { m < 0.0 };
            if !ok {
                return Err(Error::divergence(format!("{} does not decay fast enough at infinity", name())));
            }
        }
    }
    Ok(())
}

fn ln_or_inf(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// `∫ g(w) dw` over `[lo, hi]` in log coordinates, allowing infinite ends.
fn integrate_log<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> Result<f64> {
    let breaks: Vec<f64> = if lo.is_infinite() && hi.is_infinite() { vec![0.0] } else { vec![] };
    Ok(integrate(g, lo, hi, &breaks, quad_opts())?.0)
}

/// Maximizes `g` over `[lo, hi]` (finite) by sampling plus golden-section refinement.
fn maximize<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, samples: usize) -> f64 {
    if !(hi > lo) {
        return g(lo);
    }
    let h = (hi - lo) / samples as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=samples {
        let v = g(lo + h * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
    }
    best.max(f1).max(f2)
}

/// `(lo, hi)` search range in log coordinates around a set of breakpoints.
fn search_range(points: &[f64], lo_open: bool, hi_open: bool) -> (f64, f64) {
    let lns: Vec<f64> = points.iter().filter(|x| **x > 0.0 && x.is_finite()).map(|x| x.ln()).collect();
    let (mn, mx) = if lns.is_empty() {
        (0.0, 0.0)
    } else {
        (lns.iter().cloned().fold(f64::INFINITY, f64::min), lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    };
    (
        if lo_open { mn - SUP_OCTAVES * LN2 } else { mn },
        if hi_open { mx + SUP_OCTAVES * LN2 } else { mx },
    )
}

pub(crate) fn star(d: &Distribution, p: f64, r: f64) -> Result<f64> {
    let levels = d.critical_levels();
    if d.support_mass() == 0.0 {
        return Ok(0.0);
    }
    let mut edges = vec![0.0];
    edges.extend_from_slice(levels);
    edges.push(f64::INFINITY);

    if r.is_infinite() {
        let mut best = 0.0f64;
        for &c in levels {
            best = best.max(c * d.measure_at_least(c).powf(1.0 / p));
            best = best.max(c * d.measure_above(c).powf(1.0 / p));
        }
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let da = d.measure_above(a);
            if b.is_finite() && da.is_finite() && (da - d.measure_at_least(b)).abs() <= 1e-13 * da {
                continue; // constant segment: the sup sits at the left limit of b
            }
            let (lo, hi) = search_range(&[a, b], a == 0.0, b.is_infinite());
            let g = |w: f64| {
                let s = w.exp();
                s * d.measure_above(s).powf(1.0 / p)
            };
            best = best.max(maximize(g, lo.max(ln_or_inf(a)), hi.min(b.ln()), 64));
        }
        return Ok(best);
    }

    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let da = d.measure_above(a);
        if da == 0.0 {
            continue;
        }
        let constant = b.is_finite() && da.is_finite() && (da - d.measure_at_least(b)).abs() <= 1e-13 * da;
        if constant {
            let dm = d.measure_above(0.5 * (a + b));
            total += p * dm.powf(r / p) * (b.powf(r) - a.powf(r)) / r;
            continue;
        }
        let g = |w: f64| {
            let ln_dv = d.ln_measure_above_at(w);
            if ln_dv == f64::NEG_INFINITY {
                0.0
            } else {
                p * (r * w + (r / p) * ln_dv).exp()
            }
        };
        total += integrate_log(g, ln_or_inf(a), b.ln())?;
    }
    if !total.is_finite() {
        return Err(Error::divergence("Lorentz integral diverges"));
    }
    Ok(total.powf(1.0 / r))
}

pub(crate) fn double_star(d: &Distribution, p: f64, r: f64) -> Result<f64> {
    let big_t = d.support_mass();
    if big_t == 0.0 {
        return Ok(0.0);
    }
    let bps = d.t_breakpoints();
    let cum = |t: f64| d.cumulative(t).unwrap_or(f64::INFINITY);

    if r.is_infinite() {
        let g = |w: f64| {
            let t = w.exp();
            ((1.0 / p - 1.0) * w).exp() * cum(t)
        };
        let mut best = bps.iter().map(|t| g(t.ln())).fold(0.0, f64::max);
        let (lo, hi) = search_range(&bps, true, big_t.is_infinite());
        best = best.max(maximize(g, lo, hi, 256));
        return Ok(best);
    }

    let g = |w: f64| {
        let t = w.exp();
        // the part of the integral beyond t = f64::MAX is not representable
        if t.is_infinite() {
            return 0.0;
        }
        let c = cum(t);
        if c == 0.0 {
            0.0
        } else {
            (w * (r / p - r) + r * c.ln()).exp()
        }
    };
    let mut pts: Vec<f64> = bps.iter().map(|t| t.ln()).collect();
    let hi = if big_t.is_finite() { big_t.ln() } else { f64::INFINITY };
    if pts.is_empty() || hi.is_infinite() {
        pts.push(0.0);
    }
    let mut total = integrate(g, f64::NEG_INFINITY, hi, &pts, quad_opts())?.0;
    if big_t.is_finite() {
        let l1 = d.integral_above(0.0);
        total += l1.powf(r) * big_t.powf(r / p - r) / (r - r / p);
    }
    if !total.is_finite() {
        return Err(Error::divergence("maximal Lorentz integral diverges"));
    }
    Ok(total.powf(1.0 / r))
}

/// `‖·‖_{L^{p,r}}` (star variant) of a step function given as
/// `(|value|, mass)` cells. `f*` is constant on consecutive mass blocks after
/// sorting, so each block contributes `v^r (p/r)(T_i^{r/p} − T_{i−1}^{r/p})`.
pub(crate) fn star_of_steps(cells: &mut [(f64, f64)], p: f64, r: f64) -> f64 {
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut mass = 0.0f64;
    let mut acc = 0.0f64;
    for &(v, m) in cells.iter() {
        if v == 0.0 || m == 0.0 {
            mass += m;
            continue;
        }
        let next = mass + m;
        if r.is_infinite() {
            acc = acc.max(v * next.powf(1.0 / p));
        } else {
            acc += v.powf(r) * (p / r) * (next.powf(r / p) - mass.powf(r / p));
        }
        mass = next;
    }
    if r.is_infinite() {
        acc
    } else {
        acc.powf(1.0 / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Side;
    use crate::norms::{lorentz_norm, LorentzVariant};
    use crate::piecewise::PowerPiece;

    #[test]
    fn slowly_decaying_tail_matches_lp() {
        let leb = Measure::lebesgue(1).unwrap();
        let f = PiecewisePowerFunction::new(vec![PowerPiece::new(1.0, f64::INFINITY, 1.0, -0.5)]).unwrap();
        let p = 2.1;
        let want = 20f64.powf(1.0 / p);
        let got = lorentz_norm(&f, &leb, p, p, LorentzVariant::Star).unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn step_formula_matches_general_norm() {
        let vals = [0.3, 2.0, 0.0, 1.1, 2.0, 0.7, 5.0, 0.2];
        for measure in [Measure::lebesgue(1).unwrap(), Measure::power_weight(0.6).unwrap()] {
            let mut pieces = Vec::new();
            let mut cells = Vec::new();
            for (i, &v) in vals.iter().enumerate() {
                let (a, b) = (0.25 * i as f64 + 0.1, 0.25 * (i + 1) as f64 + 0.1);
                pieces.push(PowerPiece::constant(a, b, v));
                cells.push((v, measure.radial_mass(Side::Positive, a, b)));
                pieces.push(PowerPiece::constant(-b, -a, 0.5 * v));
                cells.push((0.5 * v, measure.radial_mass(Side::Negative, a, b)));
            }
            let f = PiecewisePowerFunction::new(pieces).unwrap();
            for (p, r) in [(2.0, 1.0), (3.0, 2.0), (1.5, 4.0), (2.0, f64::INFINITY)] {
                let want = lorentz_norm(&f, &measure, p, r, LorentzVariant::Star).unwrap();
                let got = star_of_steps(&mut cells.clone(), p, r);
                assert!((got - want).abs() <= 1e-10 * want, "p={p} r={r}: {got} vs {want}");
            }
        }
    }
}
