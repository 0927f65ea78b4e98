//! Riesz potentials of sampled functions by zero-padded FFT convolution, and
//! the Fourier-multiplier route `(2π|ξ|)^{-γ}` used as an independent check.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::pow_diff;
use crate::quad::{gk15, integrate, QuadOptions};

use super::grid::GridFunction;
use super::RieszParams;

/// Kernel offsets (in cells, sup norm) that use numerically integrated cell
/// averages in 2D rather than point values.
const NEAR_CELLS: i64 = 2;

/// Average of `|y|^{γ-1}` over the 1D cell `[(m - 1/2)h, (m + 1/2)h]`.
fn kernel_cell_1d(m: i64, h: f64, g: f64) -> f64 {
    let m = m.unsigned_abs() as f64;
    let unit = if m == 0.0 {
        2.0 * 0.5f64.powf(g) / g
    } else {
        pow_diff(m + 0.5, m - 0.5, g) / g
    };
    h.powf(g - 1.0) * unit
}

/// `∫` of `|u|^{γ-2}` over the unit cell centered at the origin.
fn centered_cell_2d(g: f64) -> f64 {
    let f = |th: f64| (0.5 / th.cos()).powf(g) / g;
    let (v, _) = integrate(f, 0.0, std::f64::consts::FRAC_PI_4, &[], QuadOptions::rel(1e-14))
        .expect("smooth integrand");
    8.0 * v
}

/// `∫` of `|u|^{γ-2}` over the unit cell centered at `(m1, m2) != 0`.
fn offset_cell_2d(m1: i64, m2: i64, g: f64) -> f64 {
    let (c1, c2) = (m1 as f64, m2 as f64);
    let inner = |x: f64| {
        let f = |y: f64| (x * x + y * y).powf(0.5 * (g - 2.0));
        integrate(f, c2 - 0.5, c2 + 0.5, &[0.0], QuadOptions::rel(1e-13)).map_or(f64::NAN, |r| r.0)
    };
    integrate(inner, c1 - 0.5, c1 + 0.5, &[0.0], QuadOptions::rel(1e-12))
        .map_or(f64::NAN, |r| r.0)
}

fn fft_inplace(buf: &mut [Complex<f64>], rows: usize, cols: usize, inverse: bool, exec: Execution) {
    let mut planner = FftPlanner::new();
    let row_fft = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    exec.for_each_chunk_mut(buf, cols, |row| row_fft.process(row));
    if rows > 1 {
        let col_fft = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
        let mut t = transpose(buf, rows, cols);
        exec.for_each_chunk_mut(&mut t, rows, |col| col_fft.process(col));
        let back = transpose(&t, cols, rows);
        buf.copy_from_slice(&back);
    }
}

fn transpose(buf: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut t = vec![Complex::new(0.0, 0.0); buf.len()];
    for i in 0..rows {
        for j in 0..cols {
            t[j * rows + i] = buf[i * cols + j];
        }
    }
    t
}

fn wrap(m: i64, len: usize) -> usize {
    m.rem_euclid(len as i64) as usize
}

/// `I_γ f` on the grid of `f` (n = 1 or 2), by FFT convolution with the
/// cell-averaged kernel. Warnings about non-decaying input are carried in
/// the output's `warnings`.
pub fn riesz_potential_grid(f: &GridFunction, params: &RieszParams) -> Result<GridFunction> {
    riesz_potential_grid_with(f, params, Execution::default())
}

pub fn riesz_potential_grid_with(f: &GridFunction, params: &RieszParams, exec: Execution) -> Result<GridFunction> {
    if f.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: f.dim(),
        });
    }
    let g = params.gamma;
    let h = f.spacing();
    let (rows, cols) = match f.dims() {
        [n] => (1, *n),
        [r, c] => (*r, *c),
        _ => unreachable!(),
    };
    let (pr, pc) = (if rows > 1 { 2 * rows } else { 1 }, 2 * cols);
    let zero = Complex::new(0.0, 0.0);

    let mut fb = vec![zero; pr * pc];
    for i in 0..rows {
        for j in 0..cols {
            fb[i * pc + j] = Complex::new(f.samples()[i * cols + j], 0.0);
        }
    }

    let mut kb = vec![zero; pr * pc];
    if params.n == 1 {
        let n = cols as i64;
        for m in -(n - 1)..n {
            kb[wrap(m, pc)] = Complex::new(kernel_cell_1d(m, h, g), 0.0);
        }
    } else {
        let hs = h.powf(g - 2.0);
        let center = centered_cell_2d(g);
        let (nr, nc) = (rows as i64, cols as i64);
        for m1 in -(nr - 1)..nr {
            for m2 in -(nc - 1)..nc {
                let v = if m1 == 0 && m2 == 0 {
                    center
                } else if m1.abs().max(m2.abs()) <= NEAR_CELLS {
                    offset_cell_2d(m1, m2, g)
                } else {
                    // Midpoint value plus the h²/24·Δ correction of the cell average.
                    let r2 = (m1 * m1 + m2 * m2) as f64;
                    let e = g - 2.0;
                    r2.powf(0.5 * e) * (1.0 + e * e / (24.0 * r2))
                };
                kb[wrap(m1, pr) * pc + wrap(m2, pc)] = Complex::new(hs * v, 0.0);
            }
        }
    }

    fft_inplace(&mut fb, pr, pc, false, exec);
    fft_inplace(&mut kb, pr, pc, false, exec);
    for (a, b) in fb.iter_mut().zip(&kb) {
        *a *= b;
    }
    fft_inplace(&mut fb, pr, pc, true, exec);

    let scale = f.cell_volume() / (pr * pc) as f64;
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(fb[i * pc + j].re * scale);
        }
    }
    let mut res = f.with_samples(out);
    if !f.decays_at_boundary() {
        let (b, i) = f.boundary_and_interior_max();
        res.warnings.push(format!(
            "input has not decayed at the grid boundary (boundary/interior max = {:e})",
            b / i
        ));
    }
    Ok(res)
}

/// `∫ |u|^{-γ} Λ(u - k) du` with `Λ` the unit hat function.
fn hat_moment(k: usize, g: f64) -> f64 {
    let kf = k as f64;
    if k == 0 {
        return 2.0 * (1.0 / (1.0 - g) - 1.0 / (2.0 - g));
    }
    if k < 16 {
        let e = 2.0 - g;
        return ((kf + 1.0).powf(e) - 2.0 * kf.powf(e) + (kf - 1.0).powf(e)) / ((1.0 - g) * e);
    }
    let left = gk15(&|u: f64| u.powf(-g) * (u - kf + 1.0), kf - 1.0, kf).0;
    let right = gk15(&|u: f64| u.powf(-g) * (kf + 1.0 - u), kf, kf + 1.0).0;
    left + right
}

/// `I_γ f / 𝒢(γ)` for a 1D grid via the Fourier multiplier `(2π|ξ|)^{-γ}`.
///
/// The grid is zero-padded by `pad_factor` and the multiplier is averaged
/// against hat functions around each discrete frequency, so the
/// singularity at `ξ = 0` is integrated rather than sampled.
pub fn fourier_symbol_solve_1d(f: &GridFunction, params: &RieszParams, pad_factor: usize) -> Result<GridFunction> {
    if f.dim() != 1 || params.n != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim().max(params.n),
        });
    }
    if pad_factor < 2 {
        return Err(Error::invalid("pad_factor must be at least 2"));
    }
    let g = params.gamma;
    let n = f.len();
    let len = pad_factor * n;
    let dxi = 1.0 / (len as f64 * f.spacing());
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for (b, v) in buf.iter_mut().zip(f.samples()) {
        b.re = *v;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let pre = (2.0 * std::f64::consts::PI * dxi).powf(-g);
    for (k, b) in buf.iter_mut().enumerate() {
        let kk = if k <= len / 2 { k } else { len - k };
        *b *= pre * hat_moment(kk, g);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let out = buf[..n].iter().map(|c| c.re / len as f64).collect();
    Ok(f.with_samples(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PiecewisePowerFunction;
    use crate::riesz::{normalization_constant, riesz_potential_1d};

    #[test]
    fn cell_average_sums_to_exact_integral() {
        // Σ_{|m| <= M} h·K_m = ∫_{-(M+1/2)h}^{(M+1/2)h} |y|^{γ-1} dy.
        let (g, h) = (0.3, 0.01);
        let s: f64 = (-50..=50).map(|m| h * kernel_cell_1d(m, h, g)).sum();
        let want = 2.0 * (50.5 * h).powf(g) / g;
        assert!((s - want).abs() < 1e-12 * want);
    }

    #[test]
    fn centered_cell_matches_cartesian_quadrature() {
        let g = 1.0;
        let polar = centered_cell_2d(g);
        // For γ = 1 the cell integral of 1/|u| over [-1/2,1/2]^2 is 4 ln(1 + √2).
        let want = 4.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((polar - want).abs() < 1e-12, "{polar} vs {want}");
        let off = offset_cell_2d(1, 0, g);
        let direct = gk15(&|x: f64| gk15(&|y: f64| 1.0 / (x * x + y * y).sqrt(), -0.5, 0.5).0, 0.5, 1.5).0;
        assert!((off - direct).abs() < 1e-9);
    }

    #[test]
    fn grid_matches_exact_on_indicator() {
        let p = RieszParams::new(0.5, 1).unwrap();
        let h = 2f64.powi(-10);
        let f = PiecewisePowerFunction::indicator(-1.0, 1.0).unwrap();
        let grid = GridFunction::sample_piecewise(&f, -2.0, h, (4.0 / h) as usize + 1).unwrap();
        let u = riesz_potential_grid(&grid, &p).unwrap();
        let mid = grid.len() / 2;
        let exact = riesz_potential_1d(&f, &p, 0.0).unwrap();
        assert!((u.samples()[mid] - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn zero_and_linearity() {
        let p = RieszParams::new(0.4, 1).unwrap();
        let z = GridFunction::from_fn_1d(-1.0, 0.01, 201, |_| 0.0).unwrap();
        assert!(riesz_potential_grid(&z, &p).unwrap().samples().iter().all(|v| *v == 0.0));
        let a = GridFunction::from_fn_1d(-3.0, 0.01, 601, |x| (-x * x).exp()).unwrap();
        let b = GridFunction::from_fn_1d(-3.0, 0.01, 601, |x| (1.0 - x.abs()).max(0.0)).unwrap();
        let ua = riesz_potential_grid(&a, &p).unwrap();
        let ub = riesz_potential_grid(&b, &p).unwrap();
        let uab = riesz_potential_grid(&a.add(&b).unwrap(), &p).unwrap();
        let scale = uab.max_abs();
        for k in 0..a.len() {
            assert!((uab.samples()[k] - ua.samples()[k] - ub.samples()[k]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn non_decaying_input_is_flagged() {
        let p = RieszParams::new(0.5, 1).unwrap();
        let f = GridFunction::from_fn_1d(0.0, 0.1, 50, |_| 1.0).unwrap();
        let u = riesz_potential_grid(&f, &p).unwrap();
        assert_eq!(u.warnings.len(), 1);
    }

    #[test]
    fn fourier_route_matches_grid_on_gaussian() {
        let p = RieszParams::new(0.5, 1).unwrap();
        let f = GridFunction::centered_1d(8.0, 1.0 / 64.0, |x| (-std::f64::consts::PI * x * x).exp()).unwrap();
        let grid = riesz_potential_grid(&f, &p).unwrap();
        let four = fourier_symbol_solve_1d(&f, &p, 64).unwrap();
        let c = normalization_constant(&p);
        let n = f.len();
        for k in n / 4..3 * n / 4 {
            let a = grid.samples()[k] / c;
            let b = four.samples()[k];
            assert!((a - b).abs() < 1e-2 * a, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn two_dimensional_radial_symmetry() {
        let p = RieszParams::new(1.0, 2).unwrap();
        let h = 1.0 / 16.0;
        let f = GridFunction::from_fn_2d((-5.0, -5.0), h, (161, 161), |x, y| (-(x * x + y * y)).exp()).unwrap();
        let u = riesz_potential_grid(&f, &p).unwrap();
        // u(1, 0) = u(0, 1) by symmetry of the kernel and the input.
        let at = |i: usize, j: usize| u.samples()[i * 161 + j];
        assert!((at(96, 80) - at(80, 96)).abs() < 1e-12 * at(80, 80));
        // I₁ of e^{-|x|²} at 0 is 2π∫₀^∞ e^{-r²} dr = π^{3/2}.
        let want = std::f64::consts::PI.powf(1.5);
        assert!((at(80, 80) - want).abs() < 1e-3 * want, "{} vs {want}", at(80, 80));
    }
}
