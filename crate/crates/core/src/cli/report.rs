//! CSV and JSON reports plus two-column series files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Format;
use super::runner::{Outcome, ResultRecord, DIVERGED_FLAG};
use crate::error::{Error, Result};

/// One scalar output: a CSV row without the `spec_id` and `kind` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub key: String,
    pub value: f64,
    pub flag: String,
}

fn scalar(key: impl Into<String>, value: f64) -> Scalar {
    Scalar {
        key: key.into(),
        value,
        flag: String::new(),
    }
}

fn flagged(key: impl Into<String>, value: f64, on: bool, flag: &str) -> Scalar {
    Scalar {
        key: key.into(),
        value,
        flag: if on { flag.to_string() } else { String::new() },
    }
}

fn bool_value(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Scalar outputs of a record, followed by one `flag` row per record flag.
pub fn scalars(rec: &ResultRecord) -> Vec<Scalar> {
    let mut out = Vec::new();
    match &rec.outcome {
        Outcome::Trace(t) => {
            out.push(scalar("source", t.source));
            out.push(flagged("target", t.target, t.diverged, DIVERGED_FLAG));
            out.push(flagged("ratio", t.ratio, t.diverged, DIVERGED_FLAG));
            out.push(scalar("target_tail_estimate", t.target_ledger.tail_estimate));
        }
        Outcome::Dilation(s) => {
            for i in 0..s.len() {
                let d = s.diverged_flags[i];
                out.push(flagged(format!("ratio@s={}", s.index[i]), s.ratios[i], d, DIVERGED_FLAG));
            }
            out.push(scalar("sup_ratio", s.sup_ratio()));
            out.push(scalar("drift", s.drift()));
        }
        Outcome::Necessity(r) => {
            out.push(scalar("exponent", r.exponent));
            out.push(scalar("sup_ratio", r.sup_ratio));
            out.push(scalar("trace_sup", r.trace_sup));
            for b in &r.rows {
                let at = format!("c={},r={}", b.center, b.radius);
                out.push(scalar(format!("raw_ratio@{at}"), b.raw_ratio));
                out.push(flagged(format!("trace_ratio@{at}"), b.trace_ratio, b.diverged, DIVERGED_FLAG));
            }
        }
        Outcome::Optimality(r) => {
            out.push(scalar("source_slope", r.source_fit.slope));
            out.push(scalar("target_slope", r.target_fit.slope));
            out.push(scalar("slope_gap", r.slope_gap));
            out.push(scalar("source_fit_max_residual", r.source_fit.max_residual));
            out.push(scalar("target_fit_max_residual", r.target_fit.max_residual));
            let s = &r.series;
            for i in 0..s.len() {
                let d = s.diverged_flags[i];
                out.push(scalar(format!("source@k={}", s.index[i]), s.source_norms[i]));
                out.push(flagged(format!("target@k={}", s.index[i]), s.target_norms[i], d, DIVERGED_FLAG));
            }
        }
        Outcome::Divergence(rows) => {
            for r in rows {
                let at = format!("lambda={}", r.lambda);
                out.push(flagged(format!("converged@{at}"), bool_value(r.converged), !r.converged, DIVERGED_FLAG));
                out.push(scalar(format!("minus_slope@{at}"), opt(r.minus_slope)));
                out.push(scalar(format!("predicted_minus@{at}"), r.predicted_minus));
                out.push(scalar(format!("plus_slope@{at}"), opt(r.plus_slope)));
                out.push(scalar(format!("predicted_plus@{at}"), r.predicted_plus));
            }
        }
        Outcome::Sobolev(r) => {
            out.push(scalar("pointwise_constant", r.pointwise_constant));
            out.push(scalar("pointwise_bound", r.pointwise_bound));
            out.push(scalar("pointwise_holds", bool_value(r.pointwise_holds)));
            out.push(scalar("p2", opt(r.p2)));
            out.push(scalar("source", opt(r.source)));
            out.push(scalar("target", opt(r.target)));
            out.push(scalar("ratio", opt(r.ratio)));
        }
        Outcome::Gns(r) => {
            out.push(scalar("lhs", r.lhs));
            out.push(scalar("interpolation_rhs", r.interpolation_rhs));
            out.push(scalar("full_rhs", opt(r.full_rhs)));
            out.push(scalar("slack", r.slack));
            out.push(scalar("interpolation_holds", bool_value(r.interpolation_holds_exactly)));
        }
        Outcome::Limiting(r) => {
            out.push(flagged("target", r.target, r.diverged, DIVERGED_FLAG));
            out.push(scalar("source_r1", r.source_r1));
            out.push(flagged("ratio_r1", r.ratio_r1, r.diverged, DIVERGED_FLAG));
            for e in &r.exploratory {
                out.push(flagged(format!("ratio@r={}", e.r), e.ratio, true, &r.flag));
            }
        }
        Outcome::Semigroup(r) => out.push(scalar("max_rel_error", r.max_rel_error)),
        Outcome::Fourier(r) => out.push(scalar("max_rel_error", r.max_rel_error)),
        Outcome::Error(_) => {}
    }
    for f in &rec.flags {
        out.push(Scalar {
            key: "flag".into(),
            value: f64::NAN,
            flag: f.clone(),
        });
    }
    out
}

const CSV_HEADER: [&str; 5] = ["spec_id", "kind", "key", "value", "flag"];

pub fn to_csv(results: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for rec in results {
        for s in scalars(rec) {
            let value = if s.key == "flag" { String::new() } else { s.value.to_string() };
            w.write_record([rec.spec.id.as_str(), rec.spec.kind(), &s.key, &value, &s.flag])
                .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    results: Vec<ResultRecord>,
}

/// Full nested records. Wall times are omitted, so equal inputs give equal
/// bytes.
pub fn to_json(results: &[ResultRecord]) -> Result<String> {
    #[derive(Serialize)]
    struct Borrowed<'a> {
        results: &'a [ResultRecord],
    }
    let mut s = serde_json::to_string_pretty(&Borrowed { results }).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Vec<ResultRecord>> {
    let r: JsonReport = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
    Ok(r.results)
}

pub fn render(results: &[ResultRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(results),
        Format::Json => to_json(results),
    }
}

/// Two-column `(index, value)` series of a record, by file name.
pub fn series(rec: &ResultRecord) -> Vec<(String, Vec<(f64, f64)>)> {
    let zip = |xs: &[f64], ys: &[f64]| xs.iter().copied().zip(ys.iter().copied()).collect::<Vec<_>>();
    match &rec.outcome {
        Outcome::Optimality(r) => vec![
            ("fk_source.dat".into(), zip(&r.series.index, &r.series.source_norms)),
            ("fk_target.dat".into(), zip(&r.series.index, &r.series.target_norms)),
            ("fk_ratio.dat".into(), zip(&r.series.index, &r.series.ratios)),
        ],
        Outcome::Dilation(s) => vec![("dilation_ratio.dat".into(), zip(&s.index, &s.ratios))],
        Outcome::Trace(t) => vec![(
            "target_terms.dat".into(),
            t.target_ledger.terms.iter().map(|&(k, v)| (k as f64, v)).collect(),
        )],
        _ => Vec::new(),
    }
}

fn render_series(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (x, y) in points {
        s.push_str(&format!("{x} {y}\n"));
    }
    s
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

/// Writes `report.<format>` and `timings.csv` to `dir`, plus series files
/// and an optional per-experiment report under `dir/<output.path or id>/`.
pub fn emit_report(results: &[ResultRecord], format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    write(dir.join(format!("report.{}", format.extension())), &render(results, format)?, &mut written)?;
    let mut timings = String::from("spec_id,wall_time_s\n");
    for r in results {
        timings.push_str(&format!("{},{:.6}\n", r.spec.id, r.wall_time));
    }
    write(dir.join("timings.csv"), &timings, &mut written)?;
    for rec in results {
        let files = series(rec);
        if files.is_empty() && rec.spec.output.is_none() {
            continue;
        }
        let sub = dir.join(rec.spec.output.as_ref().map_or(rec.spec.id.as_str(), |o| o.path.as_str()));
        fs::create_dir_all(&sub).map_err(|e| Error::Io(format!("{}: {e}", sub.display())))?;
        for (name, points) in files {
            write(sub.join(name), &render_series(&points), &mut written)?;
        }
        if let Some(out) = &rec.spec.output {
            let f = out.format.unwrap_or(format);
            let one = std::slice::from_ref(rec);
            write(sub.join(format!("report.{}", f.extension())), &render(one, f)?, &mut written)?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{ExperimentSpec, Task};
    use crate::cli::runner::run;
    use crate::experiments::{RatioSeries, TraceParams};
    use crate::measure::Measure;
    use crate::experiments::{ExponentFit, OptimalityReport};

    fn fk_record() -> ResultRecord {
        let params = TraceParams::new(0.25, 2.0, 3.0, 3.0, 2.0, 0.0, Measure::power_weight(0.75).unwrap());
        let mut series = RatioSeries::new("f_k");
        series.push(4.0, 1.0, 2.0, false);
        series.push(5.0, 1.1, f64::INFINITY, true);
        let fit = ExponentFit {
            slope: 1.0 / 3.0,
            intercept: 0.1,
            max_residual: 1e-17,
            window: (4.0, 5.0),
        };
        ResultRecord {
            spec: ExperimentSpec::new("fk", Task::OptimalityFk { params, k_min: 4, k_max: 5 }),
            outcome: Outcome::Optimality(OptimalityReport {
                series,
                source_fit: fit.clone(),
                target_fit: fit,
                slope_gap: 0.0,
            }),
            flags: vec![DIVERGED_FLAG.into()],
            wall_time: 0.5,
        }
    }

    #[test]
    fn empty_results_give_header_only_csv() {
        assert_eq!(to_csv(&[]).unwrap(), "spec_id,kind,key,value,flag\n");
    }

    #[test]
    fn optimality_layout() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[fk_record()], Format::Csv, dir.path()).unwrap();
        for f in ["report.csv", "timings.csv", "fk/fk_source.dat", "fk/fk_target.dat"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let target = fs::read_to_string(dir.path().join("fk/fk_target.dat")).unwrap();
        assert_eq!(target, "4 2\n5 inf\n");
        let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.contains("fk,optimality_fk,target@k=5,inf,diverged\n"), "{csv}");
        assert!(csv.contains("fk,optimality_fk,flag,,diverged\n"));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rec = fk_record();
        rec.wall_time = 0.0;
        let text = to_json(&[rec.clone()]).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(to_json(&back).unwrap(), text);
        let (a, b) = match (&rec.outcome, &back[0].outcome) {
            (Outcome::Optimality(a), Outcome::Optimality(b)) => (a, b),
            _ => panic!(),
        };
        assert_eq!(a.source_fit.slope.to_bits(), b.source_fit.slope.to_bits());
        assert_eq!(a.series.target_norms[1], f64::INFINITY);
        assert_eq!(back[0].spec, rec.spec);
    }

    #[test]
    fn computed_records_round_trip() {
        let text = r#"
[[experiment]]
id = "chi"
kind = "trace_ratio"
params = { gamma = 0.25, p1 = 2.0, p2 = 3.0, q1 = 1.0, q2 = 2.0, measure = { kind = "power_weight", beta = 0.75 } }
function = [{ a = 0.0, b = 1.0, coef = 1.0 }]
"#;
        let specs = crate::cli::config::parse_config(text).unwrap();
        let out = run(&specs, 1).unwrap();
        let json = to_json(&out).unwrap();
        assert_eq!(to_json(&from_json(&json).unwrap()).unwrap(), json);
        assert!(!json.contains("wall_time"));
    }
}
