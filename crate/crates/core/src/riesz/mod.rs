//! Riesz potentials `I_γ f = f * |·|^{γ-n}`: exact 1D evaluation, FFT
//! evaluation on grids, the normalizing constant `𝒢(γ)` and the
//! fractional-Laplace solution map `f ↦ I_γ f / 𝒢(γ)`.

mod exact;
mod fft;
mod grid;

pub use exact::{riesz_potential_1d, riesz_potential_1d_batch};
pub use fft::{fourier_symbol_solve_1d, riesz_potential_grid, riesz_potential_grid_with};
pub use grid::{GridFunction, CSV_MAX_POINTS};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::piecewise::PiecewisePowerFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    pub gamma: f64,
    pub n: usize,
}

impl RieszParams {
    pub fn new(gamma: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(gamma > 0.0 && gamma < n as f64) {
            return Err(Error::invalid(format!("need 0 < γ < n = {n}, got γ = {gamma}")));
        }
        Ok(RieszParams { gamma, n })
    }
}

/// `|x|^{γ-n}`.
pub fn riesz_kernel(x: &[f64], params: &RieszParams) -> Result<f64> {
    if x.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: x.len(),
        });
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::Singularity("x = 0".into()));
    }
    Ok(r.powf(params.gamma - params.n as f64))
}

/// `𝒢(γ) = π^{n/2} 2^γ Γ(γ/2) / Γ((n-γ)/2)`, so that the Fourier transform
/// of `|x|^{γ-n}` is `𝒢(γ)(2π|ξ|)^{-γ}`.
pub fn normalization_constant(params: &RieszParams) -> f64 {
    let n = params.n as f64;
    let g = params.gamma;
    std::f64::consts::PI.powf(n / 2.0) * 2f64.powf(g) * gamma(g / 2.0) / gamma((n - g) / 2.0)
}

/// `u = I_γ f / 𝒢(γ)` at a point, for exact 1D inputs.
pub fn fractional_laplace_solve_1d(f: &PiecewisePowerFunction, params: &RieszParams, x: f64) -> Result<f64> {
    Ok(riesz_potential_1d(f, params, x)? / normalization_constant(params))
}

/// `u = I_γ f / 𝒢(γ)` on a grid.
pub fn fractional_laplace_solve(f: &GridFunction, params: &RieszParams) -> Result<GridFunction> {
    Ok(riesz_potential_grid(f, params)?.scaled(1.0 / normalization_constant(params)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let p = RieszParams::new(0.5, 1).unwrap();
        assert_eq!(riesz_kernel(&[4.0], &p).unwrap(), 0.5);
        let p2 = RieszParams::new(1.0, 2).unwrap();
        assert!((riesz_kernel(&[3.0, 4.0], &p2).unwrap() - 0.2).abs() < 1e-16);
        let p3 = RieszParams::new(0.9, 1).unwrap();
        assert_eq!(riesz_kernel(&[1.0], &p3).unwrap(), 1.0);
        assert!(matches!(riesz_kernel(&[0.0], &p), Err(Error::Singularity(_))));
    }

    #[test]
    fn params_validation() {
        assert!(RieszParams::new(1.0, 1).is_err());
        assert!(RieszParams::new(0.0, 2).is_err());
        assert!(RieszParams::new(1.5, 2).is_ok());
    }

    #[test]
    fn normalization_examples() {
        let c = |g: f64, n: usize| normalization_constant(&RieszParams::new(g, n).unwrap());
        let pi = std::f64::consts::PI;
        assert!((c(0.5, 1) - (2.0 * pi).sqrt()).abs() < 1e-13);
        assert!((c(1.0, 2) - 2.0 * pi).abs() < 1e-13);
        assert!((c(2.0, 3) - 4.0 * pi).abs() < 1e-12);
    }

    #[test]
    fn solve_is_scaled_potential() {
        let p = RieszParams::new(0.3, 1).unwrap();
        let f = PiecewisePowerFunction::indicator(0.0, 1.0).unwrap();
        let u = fractional_laplace_solve_1d(&f, &p, 0.2).unwrap();
        let i = riesz_potential_1d(&f, &p, 0.2).unwrap();
        assert_eq!(u, i / normalization_constant(&p));
        assert_eq!(fractional_laplace_solve_1d(&PiecewisePowerFunction::zero(), &p, 0.2).unwrap(), 0.0);
    }
}
