//! Riesz potentials, rearrangement-based Lorentz norms and dyadic Herz-type
//! norms over radial-weight measures, plus the numerical experiments built on
//! them.

// `!(x > 0.0)` guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod measure;
pub mod norms;
pub mod numeric;
pub mod piecewise;
pub mod quad;
pub mod rearrange;
pub mod riesz;
mod serde_f64;

pub use error::{Error, Result};
pub use exec::Execution;
pub use measure::{Ball, Measure, MeasureKind, Side};
pub use piecewise::{PiecewisePowerFunction, PowerPiece};
