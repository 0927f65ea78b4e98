//! Numerical experiments for trace inequalities of Riesz potentials on
//! Herz-type spaces: boundedness sweeps, necessity checks, optimality
//! families with exponent fits, and the Sobolev, GNS and HLS applications.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Measure, MeasureKind};

mod applications;
pub mod catalog;
mod optimality;
mod sobolev;
mod target;

pub use applications::{
    fourier_symbol_check, gns_check, hls_ratio, limiting_case_probe, semigroup_check, FourierSymbolReport,
    ExploratoryRatio, GnsParams, GnsReport, LimitingReport, SemigroupReport, EXPLORATORY_FLAG,
};
pub use optimality::{
    annulus_divergence, exponent_fit, necessity_check, optimality_fk, BallRow, DivergenceRow, ExponentFit,
    NecessityReport, OptimalityReport, RatioSeries, WidthVerdict, BURN_IN_K,
};
pub use sobolev::{grid_herz_norm, sobolev_ratio, SmoothFunction, SobolevParams, SobolevReport};
pub use target::{dilation_series, target_ledger, trace_ratio, NormPair, TraceResult};

/// Parameters of a trace inequality `‖I_γ f‖_{target(μ)} ≲ ‖f‖_{source(m)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    #[serde(default = "one")]
    pub n: usize,
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r2: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    pub measure: Measure,
}

fn one() -> usize {
    1
}

impl TraceParams {
    /// `TraceParams` with `n = 1` and no Lorentz indices.
    pub fn new(gamma: f64, p1: f64, p2: f64, q1: f64, q2: f64, lambda: f64, measure: Measure) -> Self {
        TraceParams {
            n: 1,
            gamma,
            p1,
            p2,
            q1,
            q2,
            r1: None,
            r2: None,
            lambda,
            measure,
        }
    }

    pub fn with_lorentz(mut self, r1: f64, r2: f64) -> Self {
        self.r1 = Some(r1);
        self.r2 = Some(r2);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// The ball-growth exponent `p₂(1/p₁ − γ/n)`.
    pub fn growth_exponent(&self) -> f64 {
        self.p2 * (1.0 / self.p1 - self.gamma / self.n as f64)
    }

    /// The admissible `λ` interval `(γ − n/p₁, n − n/p₁)`.
    pub fn lambda_window(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.gamma - n / self.p1, n - n / self.p1)
    }

    /// One-dimensional power weight `β = p₂(1/p₁ − γ)`, the measure used
    /// throughout the one-dimensional examples.
    pub fn critical_power_weight(gamma: f64, p1: f64, p2: f64) -> Result<Measure> {
        Measure::power_weight(p2 * (1.0 / p1 - gamma))
    }

    pub(crate) fn require_dim1(&self) -> Result<()> {
        if self.n != 1 || self.measure.dim() != 1 {
            return Err(Error::invalid("this experiment is one-dimensional (n = 1)"));
        }
        Ok(())
    }
}

/// Which theorem's hypotheses [`classify_params`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Herz-to-Herz trace inequality.
    Mt,
    /// Lorentz-Herz variant.
    MtLh,
    /// Limiting case `p₁ = p₂ = p` with a Lorentz-Herz source at `r = 1`.
    Limiting,
}

/// Ball-growth hypothesis `μ(B) ≤ C·m(B)^e`, decided analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub exponent: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// All parameter inequalities hold.
    pub admissible: bool,
    pub violated_conditions: Vec<String>,
    /// The measure hypothesis, reported separately from the parameter
    /// inequalities.
    pub growth: GrowthCheck,
}

/// Whether `μ(B) ≤ C·m(B)^e` holds for every ball.
///
/// Lebesgue measure in dimension `n` satisfies it iff `e = 1`; the power
/// weight `x^{β−1}dx` iff `β = e ≤ 1` (small and large origin balls force
/// `β = e`, small balls away from the origin force `e ≤ 1`).
pub fn growth_condition_holds(measure: &Measure, e: f64) -> bool {
    const TOL: f64 = 1e-12;
    match measure.kind() {
        MeasureKind::Lebesgue => (e - 1.0).abs() <= TOL,
        MeasureKind::PowerWeight { beta } => (beta - e).abs() <= TOL && e <= 1.0 + TOL,
    }
}

/// Evaluates each hypothesis of `theorem` literally and names the failures.
pub fn classify_params(params: &TraceParams, theorem: Theorem) -> Classification {
    let TraceParams {
        gamma: g,
        p1,
        p2,
        q1,
        q2,
        lambda: l,
        ..
    } = *params;
    let n = params.n as f64;
    let mut bad = Vec::new();
    let mut check = |ok: bool, name: &str| {
        if !ok {
            bad.push(name.to_string());
        }
    };
    let growth_exponent = match theorem {
        Theorem::Mt | Theorem::MtLh => {
            check(1.0 < p1, "1 < p1");
            check(p1 < p2, "p1 < p2");
            check(p2 < f64::INFINITY, "p2 < inf");
            check(0.0 < g, "0 < gamma");
            check(g < n / p1, "gamma < n/p1");
            check(g - n / p1 < l, "gamma - n/p1 < lambda");
            check(l < n - n / p1, "lambda < n - n/p1");
            params.growth_exponent()
        }
        Theorem::Limiting => {
            let p = p1;
            check(p1 == p2, "p1 = p2");
            check(1.0 < p, "1 < p");
            check(p < f64::INFINITY, "p < inf");
            check(0.0 < g, "0 < gamma");
            check(g < n / p, "gamma < n/p");
            check(g - n / p < l, "gamma - n/p < lambda");
            check(l < n - n / p, "lambda < n - n/p");
            1.0 - g * p / n
        }
    };
    check(1.0 <= q1, "1 <= q1");
    check(q1 <= q2, "q1 <= q2");
    check(q2 < f64::INFINITY, "q2 < inf");
    if theorem == Theorem::MtLh {
        check(n * (1.0 / p1 - 1.0 / p2) <= g, "n(1/p1 - 1/p2) <= gamma");
        match (params.r1, params.r2) {
            (Some(r1), Some(r2)) => check(
                (1.0 <= r1 && r1 < r2 && r2 <= f64::INFINITY) || (r1.is_infinite() && r2.is_infinite()),
                "1 <= r1 < r2 <= inf or r1 = r2 = inf",
            ),
            _ => check(false, "r1 and r2 given"),
        }
    }
    Classification {
        admissible: bad.is_empty(),
        violated_conditions: bad,
        growth: GrowthCheck {
            exponent: growth_exponent,
            holds: growth_condition_holds(&params.measure, growth_exponent),
        },
    }
}

/// Numerical settings shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Relative tolerance of the per-annulus quadratures.
    pub quad_tol: f64,
    /// Initial annulus window.
    pub t_min: i32,
    pub t_max: i32,
    /// Constant cells per annulus side for Lorentz target norms, and grid
    /// points per axis for grid experiments.
    pub grid_points: usize,
    /// Relative size of the extrapolated tail accepted as converged.
    pub tail_tolerance: f64,
    /// Target windows grow by 20 annuli per side while the tails decay but
    /// exceed the tolerance, up to `|t| <= max_window`.
    pub max_window: i32,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            quad_tol: 1e-8,
            t_min: -60,
            t_max: 60,
            grid_points: 512,
            tail_tolerance: 1e-8,
            max_window: 300,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(Error::invalid(format!("quad_tol must be in (0, 1), got {}", self.quad_tol)));
        }
        if self.t_min > self.t_max {
            return Err(Error::invalid(format!("empty window [{}, {}]", self.t_min, self.t_max)));
        }
        if self.grid_points < 4 {
            return Err(Error::invalid("grid_points must be at least 4"));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::invalid("tail_tolerance must be positive"));
        }
        if self.max_window < self.t_max.max(-self.t_min) {
            return Err(Error::invalid("max_window must contain the initial window"));
        }
        Ok(())
    }

    pub(crate) fn truncation(&self) -> Result<crate::norms::TruncationPolicy> {
        crate::norms::TruncationPolicy::new(self.t_min, self.t_max, self.tail_tolerance)
    }
}

/// `target / source`, with `0/0` reported as NaN.
pub fn ratio(target: f64, source: f64) -> f64 {
    if target == 0.0 && source == 0.0 {
        f64::NAN
    } else {
        target / source
    }
}
