//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Kronrod panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

/// Globally adaptive integration of `f` over `[a, b]` split at `breaks`.
///
/// Infinite endpoints are mapped onto finite ones. Returns the estimate and
/// its error bound; failing to reach tolerance is reported as an error.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    if a > b {
        let (v, e) = integrate(f, b, a, breaks, opts)?;
        return Ok((-v, e));
    }
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();

    let f = &f;
    let mut panels = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        match (lo.is_infinite(), hi.is_infinite()) {
            (false, false) => {
                let (val, err) = gk15(f, lo, hi);
                panels.push((Segment::Finite, Panel { a: lo, b: hi, val, err }));
            }
            (false, true) => {
                let g = |u: f64| upper_map(f, lo, u);
                let (val, err) = gk15(&g, 0.0, 1.0);
                panels.push((Segment::Upper(lo), Panel { a: 0.0, b: 1.0, val, err }));
            }
            (true, false) => {
                let g = |u: f64| lower_map(f, hi, u);
                let (val, err) = gk15(&g, 0.0, 1.0);
                panels.push((Segment::Lower(hi), Panel { a: 0.0, b: 1.0, val, err }));
            }
            (true, true) => {
                return Err(Error::invalid("integration over the whole line needs a finite break"));
            }
        }
    }
    refine(f, panels, opts)
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Finite,
    Upper(f64),
    Lower(f64),
}

fn upper_map<F: Fn(f64) -> f64>(f: &F, lo: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let x = lo + (1.0 - u) / u;
    let fx = f(x);
    if fx == 0.0 {
        0.0
    } else {
        fx / (u * u)
    }
}

fn lower_map<F: Fn(f64) -> f64>(f: &F, hi: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let x = hi - (1.0 - u) / u;
    let fx = f(x);
    if fx == 0.0 {
        0.0
    } else {
        fx / (u * u)
    }
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, seg: Segment, a: f64, b: f64) -> (f64, f64) {
    match seg {
        Segment::Finite => gk15(f, a, b),
        Segment::Upper(lo) => gk15(&|u| upper_map(f, lo, u), a, b),
        Segment::Lower(hi) => gk15(&|u| lower_map(f, hi, u), a, b),
    }
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    mut panels: Vec<(Segment, Panel)>,
    opts: QuadOptions,
) -> Result<(f64, f64)> {
    loop {
        let total: f64 = panels.iter().map(|(_, p)| p.val).sum();
        let err: f64 = panels.iter().map(|(_, p)| p.err).sum();
        if !total.is_finite() {
            return Err(Error::divergence("integrand produced a non-finite value"));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            return Ok((total, err));
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "estimate {total:e} with error {err:e} after {} panels",
                panels.len()
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .1.err.partial_cmp(&y.1 .1.err).unwrap())
            .unwrap();
        let (seg, p) = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Panel can no longer be split in floating point; accept it.
            panels.push((seg, Panel { err: 0.0, ..p }));
            continue;
        }
        let (v1, e1) = eval_panel(f, seg, p.a, m);
        let (v2, e2) = eval_panel(f, seg, m, p.b);
        panels.push((seg, Panel { a: p.a, b: m, val: v1, err: e1 }));
        panels.push((seg, Panel { a: m, b: p.b, val: v2, err: e2 }));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, &[], QuadOptions::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let (v, _) = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &[], QuadOptions::rel(1e-9)).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite() {
        let (v, _) = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &[], QuadOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let (w, _) =
            integrate(|x: f64| x.exp(), f64::NEG_INFINITY, 0.0, &[], QuadOptions::default()).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let (v, _) = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], QuadOptions::default()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }
}
