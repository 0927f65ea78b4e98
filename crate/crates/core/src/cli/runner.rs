//! Executes experiment specs and collects result records in config order.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentSpec, Task};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiments::{
    annulus_divergence, dilation_series, fourier_symbol_check, gns_check, hls_ratio, limiting_case_probe,
    necessity_check, optimality_fk, semigroup_check, sobolev_ratio, trace_ratio, DivergenceRow,
    FourierSymbolReport, GnsReport, LimitingReport, NecessityReport, NormPair, OptimalityReport, RatioSeries,
    SemigroupReport, SobolevReport, TraceResult,
};

/// The computed output of one experiment, or the hard error it raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Trace(TraceResult),
    Dilation(RatioSeries),
    Necessity(NecessityReport),
    Optimality(OptimalityReport),
    Divergence(Vec<DivergenceRow>),
    Sobolev(SobolevReport),
    Gns(GnsReport),
    Limiting(LimitingReport),
    Semigroup(SemigroupReport),
    Fourier(FourierSymbolReport),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub spec: ExperimentSpec,
    pub outcome: Outcome,
    /// Divergence, warning and exploratory flags raised while computing.
    pub flags: Vec<String>,
    /// Seconds; kept out of the serialized record so reports are
    /// reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl ResultRecord {
    pub fn is_error(&self) -> bool {
        matches!(self.outcome, Outcome::Error(_))
    }
}

pub const DIVERGED_FLAG: &str = "diverged";

fn series_flags(s: &RatioSeries) -> Vec<String> {
    if s.diverged_flags.iter().any(|&d| d) {
        vec![DIVERGED_FLAG.to_string()]
    } else {
        Vec::new()
    }
}

fn flags_of(outcome: &Outcome) -> Vec<String> {
    let mut flags = Vec::new();
    match outcome {
        Outcome::Trace(t) => {
            if t.diverged {
                flags.push(DIVERGED_FLAG.to_string());
            }
            flags.extend(t.warnings.iter().cloned());
        }
        Outcome::Dilation(s) => flags = series_flags(s),
        Outcome::Optimality(r) => flags = series_flags(&r.series),
        Outcome::Necessity(r) => {
            if r.rows.iter().any(|b| b.diverged) {
                flags.push(DIVERGED_FLAG.to_string());
            }
        }
        Outcome::Divergence(rows) => {
            if rows.iter().any(|r| !r.converged) {
                flags.push(DIVERGED_FLAG.to_string());
            }
        }
        Outcome::Limiting(r) => {
            if r.diverged {
                flags.push(DIVERGED_FLAG.to_string());
            }
            if !r.exploratory.is_empty() {
                flags.push(r.flag.clone());
            }
        }
        Outcome::Semigroup(r) => flags.extend(r.warnings.iter().cloned()),
        Outcome::Sobolev(_) | Outcome::Gns(_) | Outcome::Fourier(_) | Outcome::Error(_) => {}
    }
    flags
}

/// Runs one spec with the kernels in `exec` mode.
pub fn execute(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let num = &spec.numerics;
    Ok(match &spec.task {
        Task::TraceRatio {
            params,
            norms,
            function,
            scales,
        } => match scales {
            Some(s) => Outcome::Dilation(dilation_series(function, params, *norms, s, num, exec)?),
            None => Outcome::Trace(trace_ratio(function, params, *norms, num, exec)?),
        },
        Task::Necessity { params, radii, centers } => {
            Outcome::Necessity(necessity_check(params, radii, centers, num, exec)?)
        }
        Task::OptimalityFk { params, k_min, k_max } => {
            Outcome::Optimality(optimality_fk(params, *k_min, *k_max, num, exec)?)
        }
        Task::AnnulusDivergence {
            params,
            lambda_grid,
            window_growth,
        } => Outcome::Divergence(annulus_divergence(params, lambda_grid, window_growth, num, exec)?),
        Task::Hls {
            params,
            function,
            scales,
        } => match scales {
            Some(s) => {
                hls_ratio(function, params, num, exec)?;
                Outcome::Dilation(dilation_series(function, params, NormPair::LorentzHerz, s, num, exec)?)
            }
            None => Outcome::Trace(hls_ratio(function, params, num, exec)?),
        },
        Task::Sobolev { params, profile } => Outcome::Sobolev(sobolev_ratio(profile, params, exec)?),
        Task::Gns { params, function } => Outcome::Gns(gns_check(function, params)?),
        Task::LimitingProbe {
            params,
            function,
            r_values,
        } => Outcome::Limiting(limiting_case_probe(function, params, r_values, num, exec)?),
        Task::Semigroup { params: p } => Outcome::Semigroup(semigroup_check(p.alpha, p.beta, p.half_width, p.h, exec)?),
        Task::FourierSymbol { params: p } => {
            Outcome::Fourier(fourier_symbol_check(p.gamma, p.half_width, p.h, p.pad_factor, exec)?)
        }
    })
}

fn record(spec: &ExperimentSpec, exec: Execution) -> ResultRecord {
    let start = Instant::now();
    let outcome = execute(spec, exec).unwrap_or_else(|e| Outcome::Error(e.to_string()));
    let wall_time = start.elapsed().as_secs_f64();
    let mut flags = flags_of(&outcome);
    if let Outcome::Error(e) = &outcome {
        flags.push(format!("error: {e}"));
    }
    ResultRecord {
        spec: spec.clone(),
        outcome,
        flags,
        wall_time,
    }
}

/// Executes all specs on up to `jobs` threads. Records come back in config
/// order and a failing spec does not stop its siblings.
pub fn run(specs: &[ExperimentSpec], jobs: usize) -> Result<Vec<ResultRecord>> {
    if jobs == 0 {
        return Err(Error::invalid("jobs must be positive"));
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {jobs} worker threads: {e}")))?;
        let exec = if jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
        Ok(pool.install(|| exec.map(specs, |s| record(s, exec))))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(specs.iter().map(|s| record(s, Execution::Sequential)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    const CONFIG: &str = r#"
[[experiment]]
id = "chi"
kind = "trace_ratio"
params = { gamma = 0.25, p1 = 2.0, p2 = 3.0, q1 = 1.0, q2 = 2.0, lambda = 0.6, measure = { kind = "power_weight", beta = 0.75 } }
function = [{ a = 0.0, b = 1.0, coef = 1.0 }]

[[experiment]]
id = "bad"
kind = "necessity"
params = { gamma = 0.25, p1 = 2.0, p2 = 3.0, q1 = 1.0, q2 = 2.0, lambda = 0.1, measure = { kind = "power_weight", beta = 0.75 } }
family = { radii = [1.0] }

[[experiment]]
id = "semi"
kind = "semigroup"
params = { alpha = 0.25, beta = 0.25, half_width = 8.0, h = 0.125 }
"#;

    #[test]
    fn errors_do_not_stop_siblings_and_flags_survive() {
        let specs = parse_config(CONFIG).unwrap();
        let out = run(&specs, 2).unwrap();
        let ids: Vec<&str> = out.iter().map(|r| r.spec.id.as_str()).collect();
        assert_eq!(ids, ["chi", "bad", "semi"]);
        assert!(out[0].flags.contains(&DIVERGED_FLAG.to_string()));
        assert!(out[0].flags.iter().any(|f| f.starts_with("parameters violate")));
        assert!(out[1].is_error());
        assert!(matches!(out[2].outcome, Outcome::Semigroup(_)));
    }

    #[test]
    fn empty_run_and_zero_jobs() {
        assert!(run(&[], 1).unwrap().is_empty());
        assert!(run(&[], 0).is_err());
    }
}
