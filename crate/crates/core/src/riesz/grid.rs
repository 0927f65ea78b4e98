//! Uniformly sampled functions on 1D and 2D grids.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::PiecewisePowerFunction;

/// Grids with more points than this are not written as CSV.
pub const CSV_MAX_POINTS: usize = 1 << 16;

/// Samples `f(origin + h·i)` in row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    dims: Vec<usize>,
    origin: Vec<f64>,
    h: f64,
    samples: Vec<f64>,
    /// Contract violations noticed while producing this grid.
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, h: f64, samples: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::invalid(format!("grids must be 1D or 2D, got {} axes", dims.len())));
        }
        if origin.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                got: origin.len(),
            });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {h}")));
        }
        if dims.iter().any(|&d| d < 4) {
            return Err(Error::invalid("grids need at least 4 samples per axis"));
        }
        let len: usize = dims.iter().product();
        if samples.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: samples.len(),
            });
        }
        Ok(GridFunction {
            dims,
            origin,
            h,
            samples,
            warnings: Vec::new(),
        })
    }

    /// 1D grid `x_i = origin + h·i`, `i < len`.
    pub fn from_fn_1d(origin: f64, h: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..len).map(|i| f(origin + h * i as f64)).collect();
        Self::new(vec![len], vec![origin], h, samples)
    }

    /// 2D grid with `f(x, y)` at `(origin.0 + h·i, origin.1 + h·j)`.
    pub fn from_fn_2d(
        origin: (f64, f64),
        h: f64,
        dims: (usize, usize),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(dims.0 * dims.1);
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                samples.push(f(origin.0 + h * i as f64, origin.1 + h * j as f64));
            }
        }
        Self::new(vec![dims.0, dims.1], vec![origin.0, origin.1], h, samples)
    }

    /// Samples a piecewise function; points exactly on a jump get the mean of
    /// the one-sided limits.
    pub fn sample_piecewise(f: &PiecewisePowerFunction, origin: f64, h: f64, len: usize) -> Result<Self> {
        let bps = f.breakpoints();
        Self::from_fn_1d(origin, h, len, |x| {
            if bps.contains(&x) {
                let eps = 1e-12 * x.abs().max(h);
                0.5 * (f.eval(x - eps) + f.eval(x + eps))
            } else {
                f.eval(x)
            }
        })
    }

    /// Centered 1D grid covering `[-half_width, half_width]` with spacing `h`.
    pub fn centered_1d(half_width: f64, h: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = (half_width / h).round() as usize;
        Self::from_fn_1d(-(m as f64) * h, h, 2 * m + 1, f)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Coordinates of the sample with flat index `k`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        match self.dims.len() {
            1 => vec![self.origin[0] + self.h * k as f64],
            _ => {
                let (i, j) = (k / self.dims[1], k % self.dims[1]);
                vec![self.origin[0] + self.h * i as f64, self.origin[1] + self.h * j as f64]
            }
        }
    }

    /// 1D abscissae.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.dims[0]).map(|i| self.origin[0] + self.h * i as f64).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dims.len() as i32)
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        GridFunction {
            dims: self.dims.clone(),
            origin: self.origin.clone(),
            h: self.h,
            samples,
            warnings: self.warnings.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims || self.origin != other.origin || self.h != other.h {
            return Err(Error::invalid("grids have different layouts"));
        }
        Ok(())
    }

    /// Pointwise sum of two grids on the same layout.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        let mut out = self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect());
        out.warnings.extend(other.warnings.iter().cloned());
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn on_boundary(&self, k: usize) -> bool {
        match self.dims.len() {
            1 => k == 0 || k + 1 == self.dims[0],
            _ => {
                let (i, j) = (k / self.dims[1], k % self.dims[1]);
                i == 0 || j == 0 || i + 1 == self.dims[0] || j + 1 == self.dims[1]
            }
        }
    }

    /// `(max |f| on the boundary, max |f| inside)`.
    pub fn boundary_and_interior_max(&self) -> (f64, f64) {
        let mut b = 0.0f64;
        let mut i = 0.0f64;
        for (k, v) in self.samples.iter().enumerate() {
            if self.on_boundary(k) {
                b = b.max(v.abs());
            } else {
                i = i.max(v.abs());
            }
        }
        (b, i)
    }

    /// Whether the samples have decayed at the boundary (`< 1e-6` of the interior max).
    pub fn decays_at_boundary(&self) -> bool {
        let (b, i) = self.boundary_and_interior_max();
        b < 1e-6 * i || (b == 0.0 && i == 0.0)
    }

    /// Linear interpolation of a 1D grid; `None` outside the grid.
    pub fn interpolate_1d(&self, x: f64) -> Option<f64> {
        if self.dim() != 1 {
            return None;
        }
        let u = (x - self.origin[0]) / self.h;
        let n = self.dims[0];
        if u < 0.0 || u > (n - 1) as f64 {
            return None;
        }
        let i = (u.floor() as usize).min(n - 2);
        let w = u - i as f64;
        Some((1.0 - w) * self.samples[i] + w * self.samples[i + 1])
    }

    /// Little-endian binary layout: `n: u64`, `dims: u64 × n`, `origin: f64 × n`,
    /// `h: f64`, then the row-major samples as `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.dims.len() as u64).to_le_bytes())?;
        for &d in &self.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &o in &self.origin {
            w.write_all(&o.to_le_bytes())?;
        }
        w.write_all(&self.h.to_le_bytes())?;
        for &v in &self.samples {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        let mut u64_ = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let n = u64_(&mut r)? as usize;
        if n == 0 || n > 2 {
            return Err(Error::Io(format!("bad grid header: dimension {n}")));
        }
        let dims = (0..n).map(|_| u64_(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let origin = (0..n)
            .map(|_| u64_(&mut r).map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        let h = f64::from_bits(u64_(&mut r)?);
        let len: usize = dims.iter().product();
        let samples = (0..len)
            .map(|_| u64_(&mut r).map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, origin, h, samples)
    }

    /// CSV `x,value` (1D) or `x,y,value` (2D). Refuses very large grids.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.len() > CSV_MAX_POINTS {
            return Err(Error::invalid(format!(
                "grid has {} points; use the binary layout above {CSV_MAX_POINTS}",
                self.len()
            )));
        }
        if self.dim() == 1 {
            writeln!(w, "x,value")?;
        } else {
            writeln!(w, "x,y,value")?;
        }
        for (k, v) in self.samples.iter().enumerate() {
            let p = self.point(k);
            if p.len() == 1 {
                writeln!(w, "{},{v}", p[0])?;
            } else {
                writeln!(w, "{},{},{v}", p[0], p[1])?;
            }
        }
        Ok(())
    }
}
