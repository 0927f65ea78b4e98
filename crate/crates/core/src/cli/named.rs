//! Named experiments for `list` and `verify`, each with a pass/fail check.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentSpec, FourierParams, SemigroupParams, Task};
use super::runner::{run, Outcome, ResultRecord};
use crate::error::Result;
use crate::experiments::catalog::catalog;
use crate::experiments::{GnsParams, NormPair, TraceParams};
use crate::measure::Measure;
use crate::piecewise::PiecewisePowerFunction;

pub struct NamedExperiment {
    pub name: &'static str,
    pub description: &'static str,
    pub specs: Vec<ExperimentSpec>,
    check: fn(&[ResultRecord]) -> (bool, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn weight(beta: f64) -> Measure {
    Measure::power_weight(beta).expect("positive beta")
}

fn critical(gamma: f64, p1: f64, p2: f64, q1: f64, q2: f64, lambda: f64) -> TraceParams {
    let m = TraceParams::critical_power_weight(gamma, p1, p2).expect("beta in (0, 1]");
    TraceParams::new(gamma, p1, p2, q1, q2, lambda, m)
}

/// Admissible tuples `(γ, p₁, p₂, q₁, q₂, λ)` with `β = p₂(1/p₁ − γ) <= 1`.
pub const SWEEP_TUPLES: [(f64, f64, f64, f64, f64, f64); 11] = [
    (0.25, 2.0, 3.0, 1.0, 2.0, 0.0),
    (0.25, 2.0, 3.0, 2.0, 2.0, 0.2),
    (0.25, 2.0, 4.0, 1.0, 1.0, 0.0),
    (0.25, 2.0, 3.0, 1.0, 2.0, -0.1),
    (0.3, 1.5, 2.5, 1.0, 2.0, -0.1),
    (0.4, 2.0, 5.0, 2.0, 3.0, 0.1),
    (0.2, 3.0, 4.0, 1.0, 2.0, 0.0),
    (0.5, 1.8, 3.0, 1.5, 2.0, 0.2),
    (0.15, 2.5, 3.5, 2.0, 4.0, 0.3),
    (0.6, 1.2, 1.5, 1.0, 1.0, 0.0),
    (0.1, 4.0, 6.0, 2.0, 2.0, 0.1),
];

pub fn sweep_params() -> Vec<TraceParams> {
    SWEEP_TUPLES
        .iter()
        .map(|&(g, p1, p2, q1, q2, l)| critical(g, p1, p2, q1, q2, l))
        .collect()
}

pub const EXAMPLE_31_LAMBDAS: [f64; 10] = [-0.6, -0.4, -0.25, -0.15, 0.0, 0.2, 0.35, 0.5, 0.6, 0.8];

fn example_31() -> NamedExperiment {
    let spec = ExperimentSpec::new(
        "example-3.1",
        Task::AnnulusDivergence {
            params: critical(0.25, 2.0, 3.0, 1.0, 2.0, 0.0),
            lambda_grid: EXAMPLE_31_LAMBDAS.to_vec(),
            window_growth: vec![20, 40, 60],
        },
    );
    NamedExperiment {
        name: "example-3.1",
        description: "I_gamma of an annulus indicator: target ledger converges iff gamma - 1/p1 < lambda < 1 - 1/p1",
        specs: vec![spec],
        check: |r| {
            let Outcome::Divergence(rows) = &r[0].outcome else {
                return (false, format!("{:?}", r[0].outcome));
            };
            let (lo, hi) = (0.25 - 0.5, 1.0 - 0.5);
            let mut worst = 0.0f64;
            let mut verdicts_ok = true;
            for row in rows {
                verdicts_ok &= row.converged == (lo < row.lambda && row.lambda < hi);
                if let (Some(m), Some(p)) = (row.minus_slope, row.plus_slope) {
                    worst = worst.max((m - row.predicted_minus).abs()).max((p - row.predicted_plus).abs());
                } else {
                    verdicts_ok = false;
                }
            }
            (
                verdicts_ok && worst <= 0.05,
                format!("verdicts match window: {verdicts_ok}; worst slope error {worst:.3e}"),
            )
        },
    }
}

fn example_32() -> NamedExperiment {
    let spec = ExperimentSpec::new(
        "example-3.2",
        Task::OptimalityFk {
            params: critical(0.25, 2.0, 3.0, 3.0, 2.0, 0.0),
            k_min: 1,
            k_max: 14,
        },
    );
    NamedExperiment {
        name: "example-3.2",
        description: "f_k family with q1 = 3 > q2 = 2: source grows like k^(1/3), target faster",
        specs: vec![spec],
        check: |r| {
            let Outcome::Optimality(o) = &r[0].outcome else {
                return (false, format!("{:?}", r[0].outcome));
            };
            let s = o.source_fit.slope;
            let t = o.target_fit.slope;
            let pass = (s - 1.0 / 3.0).abs() <= 1e-6 && t >= 0.5 - 0.1 && o.slope_gap >= 0.5 * (0.5 - 1.0 / 3.0);
            (pass, format!("source slope {s:.8}, target slope {t:.4}, gap {:.4}", o.slope_gap))
        },
    }
}

fn prop_22() -> NamedExperiment {
    let radii = (-4..=4).map(|j| 2f64.powi(j)).collect();
    let spec = ExperimentSpec::new(
        "prop-2.2",
        Task::Necessity {
            params: critical(0.25, 2.0, 3.0, 1.0, 2.0, 0.0),
            radii,
            centers: vec![0.0],
        },
    );
    NamedExperiment {
        name: "prop-2.2",
        description: "origin balls under the critical power weight: mu(B)/m(B)^beta = 1/(beta 2^beta)",
        specs: vec![spec],
        check: |r| {
            let Outcome::Necessity(n) = &r[0].outcome else {
                return (false, format!("{:?}", r[0].outcome));
            };
            let beta = n.exponent;
            let expected = 1.0 / (beta * 2f64.powf(beta));
            let worst = n
                .rows
                .iter()
                .map(|b| (b.raw_ratio / expected - 1.0).abs())
                .fold(0.0, f64::max);
            let traces_finite = n.rows.iter().all(|b| b.trace_ratio.is_finite() && !b.diverged);
            (
                worst <= 1e-10 && traces_finite,
                format!("raw ratio deviation {worst:.2e}; trace ratios finite: {traces_finite}"),
            )
        },
    }
}

fn thm_21_sweep() -> NamedExperiment {
    let f = PiecewisePowerFunction::indicator(0.0, 1.0).expect("valid interval");
    let specs = sweep_params()
        .into_iter()
        .enumerate()
        .map(|(i, params)| {
            ExperimentSpec::new(
                format!("thm-2.1-sweep-{i}"),
                Task::TraceRatio {
                    params,
                    norms: NormPair::Herz,
                    function: f.clone(),
                    scales: Some(vec![0.125, 1.0, 16.0]),
                },
            )
        })
        .collect();
    NamedExperiment {
        name: "thm-2.1-sweep",
        description: "admissible tuples with the critical power weight: no target ledger diverges",
        specs,
        check: |r| {
            let mut worst = 0.0f64;
            let mut ok = true;
            for rec in r {
                match &rec.outcome {
                    Outcome::Dilation(s) => {
                        ok &= s.diverged_flags.iter().all(|d| !d);
                        worst = worst.max(s.drift());
                    }
                    _ => ok = false,
                }
            }
            (
                ok && worst < 0.05,
                format!("{} tuples, all converged: {ok}, worst dyadic drift {worst:.2e}", r.len()),
            )
        },
    }
}

fn cor_41() -> NamedExperiment {
    let params = TraceParams::new(0.25, 2.0, 4.0, 1.0, 2.0, 0.0, Measure::lebesgue(1).expect("n = 1"))
        .with_lorentz(1.0, 2.0);
    let spec = ExperimentSpec::new(
        "cor-4.1",
        Task::Hls {
            params,
            function: PiecewisePowerFunction::indicator(0.0, 1.0).expect("valid interval"),
            scales: Some(vec![0.25, 1.0, 4.0]),
        },
    );
    NamedExperiment {
        name: "cor-4.1",
        description: "fractional integration between Lorentz-Herz spaces under 1/p1 - 1/p2 = gamma",
        specs: vec![spec],
        check: |r| match &r[0].outcome {
            Outcome::Dilation(s) => {
                let ok = s.diverged_flags.iter().all(|d| !d) && s.drift() < 1e-3;
                (ok, format!("sup ratio {:.6}, dyadic drift {:.2e}", s.sup_ratio(), s.drift()))
            }
            other => (false, format!("{other:?}")),
        },
    }
}

pub const GNS_THETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn thm_46() -> NamedExperiment {
    let mut specs = Vec::new();
    for (i, e) in catalog().into_iter().enumerate() {
        for (j, &theta) in GNS_THETAS.iter().enumerate() {
            let params = GnsParams::new(theta, (1.5, 2.0), (4.0, 4.0), 0.1, Measure::lebesgue(1).expect("n = 1"));
            specs.push(ExperimentSpec::new(
                format!("thm-4.6-f{i:02}-t{j}"),
                Task::Gns {
                    params,
                    function: e.f.clone(),
                },
            ));
        }
    }
    NamedExperiment {
        name: "thm-4.6",
        description: "interpolation step of Gagliardo-Nirenberg: Hoelder with constant 1 on the catalog",
        specs,
        check: |r| {
            let mut worst = f64::INFINITY;
            let mut ok = true;
            for rec in r {
                match &rec.outcome {
                    Outcome::Gns(g) => worst = worst.min(g.slack),
                    _ => ok = false,
                }
            }
            (ok && worst >= -1e-9, format!("{} checks, minimum slack {worst:.3e}", r.len()))
        },
    }
}

fn thm_24_probe() -> NamedExperiment {
    let spec = ExperimentSpec::new(
        "thm-2.4-probe",
        Task::LimitingProbe {
            params: TraceParams::new(0.25, 2.0, 2.0, 1.0, 2.0, 0.0, weight(0.5)),
            function: PiecewisePowerFunction::indicator(0.0, 1.0).expect("valid interval"),
            r_values: vec![1.5],
        },
    );
    NamedExperiment {
        name: "thm-2.4-probe",
        description: "limiting case p1 = p2 with a Lorentz (p, 1) source; r in (1, p) reported as exploratory",
        specs: vec![spec],
        check: |r| match &r[0].outcome {
            Outcome::Limiting(l) => (
                l.ratio_r1.is_finite() && !l.diverged,
                format!("ratio at r = 1: {:.6}; exploratory {:?}", l.ratio_r1, l.exploratory.iter().map(|e| e.ratio).collect::<Vec<_>>()),
            ),
            other => (false, format!("{other:?}")),
        },
    }
}

fn riesz_identities() -> NamedExperiment {
    let specs = vec![
        ExperimentSpec::new(
            "riesz-semigroup",
            Task::Semigroup {
                params: SemigroupParams {
                    alpha: 0.25,
                    beta: 0.25,
                    half_width: 32.0,
                    h: 1.0 / 32.0,
                },
            },
        ),
        ExperimentSpec::new(
            "riesz-fourier-symbol",
            Task::FourierSymbol {
                params: FourierParams {
                    gamma: 0.5,
                    half_width: 8.0,
                    h: 1.0 / 64.0,
                    pad_factor: 64,
                },
            },
        ),
    ];
    NamedExperiment {
        name: "riesz-identities",
        description: "semigroup and Fourier-symbol identities on a Gaussian grid",
        specs,
        check: |r| match (&r[0].outcome, &r[1].outcome) {
            (Outcome::Semigroup(s), Outcome::Fourier(f)) => (
                s.max_rel_error < 1e-2 && f.max_rel_error < 1e-2,
                format!("semigroup {:.2e}, symbol {:.2e}", s.max_rel_error, f.max_rel_error),
            ),
            other => (false, format!("{other:?}")),
        },
    }
}

/// The named experiments shown by `list`.
pub fn named_experiments() -> Vec<NamedExperiment> {
    vec![
        example_31(),
        example_32(),
        prop_22(),
        thm_21_sweep(),
        cor_41(),
        thm_46(),
        thm_24_probe(),
    ]
}

/// The acceptance catalog run by `verify`: the named experiments plus the
/// Riesz grid identities.
pub fn verify_catalog() -> Vec<NamedExperiment> {
    let mut v = named_experiments();
    v.push(riesz_identities());
    v
}

/// Runs the acceptance catalog. Records come back in catalog order.
pub fn verify(jobs: usize) -> Result<(Vec<Verdict>, Vec<ResultRecord>)> {
    let cat = verify_catalog();
    let specs: Vec<ExperimentSpec> = cat.iter().flat_map(|n| n.specs.iter().cloned()).collect();
    let records = run(&specs, jobs)?;
    let mut verdicts = Vec::new();
    let mut offset = 0;
    for n in &cat {
        let slice = &records[offset..offset + n.specs.len()];
        offset += n.specs.len();
        let (pass, detail) = if let Some(e) = slice.iter().find(|r| r.is_error()) {
            (false, format!("{}: {:?}", e.spec.id, e.outcome))
        } else {
            (n.check)(slice)
        };
        verdicts.push(Verdict {
            name: n.name.to_string(),
            pass,
            detail,
        });
    }
    Ok((verdicts, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{classify_params, Theorem};

    #[test]
    fn list_names() {
        let names: Vec<&str> = named_experiments().iter().map(|n| n.name).collect();
        assert_eq!(
            names,
            ["example-3.1", "example-3.2", "prop-2.2", "thm-2.1-sweep", "cor-4.1", "thm-4.6", "thm-2.4-probe"]
        );
    }

    #[test]
    fn sweep_tuples_are_admissible_with_growth() {
        for p in sweep_params() {
            let c = classify_params(&p, Theorem::Mt);
            assert!(c.admissible, "{p:?}: {:?}", c.violated_conditions);
            assert!(c.growth.holds && c.growth.exponent <= 1.0);
        }
    }

    #[test]
    fn spec_ids_are_unique() {
        let mut ids: Vec<String> = verify_catalog().into_iter().flat_map(|n| n.specs).map(|s| s.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }
}
