//! Experiment configs.
//!
//! A config is TOML with one `[[experiment]]` table per run:
//!
//! ```toml
//! [[experiment]]
//! id = "fk"
//! kind = "optimality_fk"
//! params = { gamma = 0.25, p1 = 2.0, p2 = 3.0, q1 = 3.0, q2 = 2.0, measure = { kind = "power_weight", beta = 0.75 } }
//! family = { k_min = 1, k_max = 14 }
//! numerics = { quad_tol = 1e-8 }
//! output = { path = "fk", format = "csv" }
//! ```
//!
//! Keys of an experiment table: `id`, `kind`, `params`, `family`,
//! `function`, `profile`, `norms`, `numerics`, `output`. Which of them a
//! kind reads is listed on [`Task`].

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::catalog::catalog;
use crate::experiments::{GnsParams, NormPair, Numerics, SmoothFunction, SobolevParams, TraceParams};
use crate::piecewise::PiecewisePowerFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Per-experiment output: a subdirectory of the run directory for series
/// files and an extra per-experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_semigroup_width")]
    pub half_width: f64,
    #[serde(default = "default_semigroup_h")]
    pub h: f64,
}

fn default_semigroup_width() -> f64 {
    32.0
}

fn default_semigroup_h() -> f64 {
    1.0 / 32.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierParams {
    pub gamma: f64,
    #[serde(default = "default_fourier_width")]
    pub half_width: f64,
    #[serde(default = "default_fourier_h")]
    pub h: f64,
    #[serde(default = "default_pad")]
    pub pad_factor: usize,
}

fn default_fourier_width() -> f64 {
    8.0
}

fn default_fourier_h() -> f64 {
    1.0 / 64.0
}

fn default_pad() -> usize {
    64
}

/// What an experiment computes, with the keys each kind reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    /// `params`, `function`, optional `norms` (`herz` or `lorentz_herz`) and
    /// `family.scales` for a dilation series.
    TraceRatio {
        params: TraceParams,
        norms: NormPair,
        function: PiecewisePowerFunction,
        scales: Option<Vec<f64>>,
    },
    /// `params`, `family.radii`, optional `family.centers` (default `[0]`).
    Necessity {
        params: TraceParams,
        radii: Vec<f64>,
        centers: Vec<f64>,
    },
    /// `params`, `family.k_max`, optional `family.k_min` (default 1).
    OptimalityFk { params: TraceParams, k_min: u32, k_max: u32 },
    /// `params`, `family.lambda_grid`, optional `family.window_growth`
    /// (default `[20, 40, 60]`).
    AnnulusDivergence {
        params: TraceParams,
        lambda_grid: Vec<f64>,
        window_growth: Vec<i32>,
    },
    /// `params`, `function`, optional `family.scales`.
    Hls {
        params: TraceParams,
        function: PiecewisePowerFunction,
        scales: Option<Vec<f64>>,
    },
    /// `params` as [`SobolevParams`] and `profile` as [`SmoothFunction`].
    Sobolev { params: SobolevParams, profile: SmoothFunction },
    /// `params` as [`GnsParams`] and `function`.
    Gns { params: GnsParams, function: PiecewisePowerFunction },
    /// `params`, `function`, optional `family.r_values`.
    LimitingProbe {
        params: TraceParams,
        function: PiecewisePowerFunction,
        r_values: Vec<f64>,
    },
    /// `params` as [`SemigroupParams`].
    Semigroup { params: SemigroupParams },
    /// `params` as [`FourierParams`].
    FourierSymbol { params: FourierParams },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::TraceRatio { .. } => "trace_ratio",
            Task::Necessity { .. } => "necessity",
            Task::OptimalityFk { .. } => "optimality_fk",
            Task::AnnulusDivergence { .. } => "annulus_divergence",
            Task::Hls { .. } => "hls",
            Task::Sobolev { .. } => "sobolev",
            Task::Gns { .. } => "gns",
            Task::LimitingProbe { .. } => "limiting_probe",
            Task::Semigroup { .. } => "semigroup",
            Task::FourierSymbol { .. } => "fourier_symbol",
        }
    }
}

pub const KINDS: [&str; 10] = [
    "trace_ratio",
    "necessity",
    "optimality_fk",
    "annulus_divergence",
    "hls",
    "sobolev",
    "gns",
    "limiting_probe",
    "semigroup",
    "fourier_symbol",
];

/// One validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: String,
    #[serde(flatten)]
    pub task: Task,
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentSpec {
    pub fn new(id: impl Into<String>, task: Task) -> Self {
        ExperimentSpec {
            id: id.into(),
            task,
            numerics: Numerics::default(),
            output: None,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.task.kind()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Family {
    k_min: Option<u32>,
    k_max: Option<u32>,
    scales: Option<Vec<f64>>,
    radii: Option<Vec<f64>>,
    centers: Option<Vec<f64>>,
    lambda_grid: Option<Vec<f64>>,
    window_growth: Option<Vec<i32>>,
    r_values: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(default)]
    experiment: Vec<toml::Spanned<toml::Table>>,
}

const SPEC_KEYS: [&str; 9] = [
    "id", "kind", "params", "family", "function", "profile", "norms", "numerics", "output",
];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct SpecReader<'a> {
    table: &'a toml::Table,
    prefix: String,
}

impl SpecReader<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            key: format!("{}.{key}", self.prefix),
            message: message.into(),
        }
    }

    fn typed<T: DeserializeOwned>(&self, key: &str, value: &toml::Value) -> Result<T, Error> {
        serde_path_to_error::deserialize(value.clone()).map_err(|e| {
            let path = e.path().to_string();
            let full = if path == "." || path.is_empty() {
                key.to_string()
            } else {
                format!("{key}.{path}")
            };
            self.err(&full, e.into_inner().to_string())
        })
    }

    fn required<T: DeserializeOwned>(&self, key: &str) -> Result<T, Error> {
        match self.table.get(key) {
            Some(v) => self.typed(key, v),
            None => Err(self.err(key, "missing field")),
        }
    }

    fn optional<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, Error> {
        self.table.get(key).map(|v| self.typed(key, v)).transpose()
    }

    fn function(&self) -> Result<PiecewisePowerFunction, Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum FunctionSpec {
            Pieces(PiecewisePowerFunction),
            Named { catalog: String },
        }
        match self.required::<FunctionSpec>("function")? {
            FunctionSpec::Pieces(f) => Ok(f),
            FunctionSpec::Named { catalog: name } => catalog()
                .into_iter()
                .find(|e| e.name == name)
                .map(|e| e.f)
                .ok_or_else(|| self.err("function.catalog", format!("no catalog function named {name:?}"))),
        }
    }
}

fn family_keys(f: &Family) -> Vec<&'static str> {
    let mut keys = Vec::new();
    let present = [
        ("k_min", f.k_min.is_some()),
        ("k_max", f.k_max.is_some()),
        ("scales", f.scales.is_some()),
        ("radii", f.radii.is_some()),
        ("centers", f.centers.is_some()),
        ("lambda_grid", f.lambda_grid.is_some()),
        ("window_growth", f.window_growth.is_some()),
        ("r_values", f.r_values.is_some()),
    ];
    for (k, p) in present {
        if p {
            keys.push(k);
        }
    }
    keys
}

fn parse_spec(table: &toml::Table, index: usize, line: usize) -> Result<ExperimentSpec, Error> {
    let mut r = SpecReader {
        table,
        prefix: format!("experiment[{index}] (line {line})"),
    };
    for key in table.keys() {
        if !SPEC_KEYS.contains(&key.as_str()) {
            return Err(r.err(key, "unknown key"));
        }
    }
    let id: String = r.required("id")?;
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        return Err(r.err("id", "id must be a nonempty name without path separators"));
    }
    r.prefix = format!("experiment {id:?} (line {line})");
    let kind: String = r.required("kind")?;
    if !KINDS.contains(&kind.as_str()) {
        return Err(r.err("kind", format!("unknown kind {kind:?}; expected one of {}", KINDS.join(", "))));
    }
    let family: Family = r.optional("family")?.unwrap_or_default();
    let allowed: &[&str] = match kind.as_str() {
        "trace_ratio" | "hls" => &["scales"],
        "necessity" => &["radii", "centers"],
        "optimality_fk" => &["k_min", "k_max"],
        "annulus_divergence" => &["lambda_grid", "window_growth"],
        "limiting_probe" => &["r_values"],
        _ => &[],
    };
    if let Some(k) = family_keys(&family).into_iter().find(|k| !allowed.contains(k)) {
        return Err(r.err(&format!("family.{k}"), format!("not used by kind {kind}")));
    }
    let wants = |key: &str, kinds: &[&str]| -> Result<(), Error> {
        if table.contains_key(key) && !kinds.contains(&kind.as_str()) {
            return Err(r.err(key, format!("not used by kind {kind}")));
        }
        Ok(())
    };
    wants("function", &["trace_ratio", "hls", "gns", "limiting_probe"])?;
    wants("profile", &["sobolev"])?;
    wants("norms", &["trace_ratio"])?;
    let missing = |key: &str| r.err(key, "missing field");
    let task = match kind.as_str() {
        "trace_ratio" => Task::TraceRatio {
            params: r.required("params")?,
            norms: r.optional("norms")?.unwrap_or(NormPair::Herz),
            function: r.function()?,
            scales: family.scales,
        },
        "necessity" => Task::Necessity {
            params: r.required("params")?,
            radii: family.radii.ok_or_else(|| missing("family.radii"))?,
            centers: family.centers.unwrap_or_else(|| vec![0.0]),
        },
        "optimality_fk" => Task::OptimalityFk {
            params: r.required("params")?,
            k_min: family.k_min.unwrap_or(1),
            k_max: family.k_max.ok_or_else(|| missing("family.k_max"))?,
        },
        "annulus_divergence" => Task::AnnulusDivergence {
            params: r.required("params")?,
            lambda_grid: family.lambda_grid.ok_or_else(|| missing("family.lambda_grid"))?,
            window_growth: family.window_growth.unwrap_or_else(|| vec![20, 40, 60]),
        },
        "hls" => Task::Hls {
            params: r.required("params")?,
            function: r.function()?,
            scales: family.scales,
        },
        "sobolev" => Task::Sobolev {
            params: r.required("params")?,
            profile: r.required("profile")?,
        },
        "gns" => Task::Gns {
            params: r.required("params")?,
            function: r.function()?,
        },
        "limiting_probe" => Task::LimitingProbe {
            params: r.required("params")?,
            function: r.function()?,
            r_values: family.r_values.unwrap_or_default(),
        },
        "semigroup" => Task::Semigroup {
            params: r.required("params")?,
        },
        "fourier_symbol" => Task::FourierSymbol {
            params: r.required("params")?,
        },
        _ => unreachable!("kind validated above"),
    };
    let numerics: Numerics = r.optional("numerics")?.unwrap_or_default();
    numerics.validate().map_err(|e| r.err("numerics", e.to_string()))?;
    Ok(ExperimentSpec {
        id,
        task,
        numerics,
        output: r.optional("output")?,
    })
}

/// Parses and validates a config. All schema errors are collected.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>, Vec<Error>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        vec![Error::Schema {
            key: format!("line {line}"),
            message: e.message().to_string(),
        }]
    })?;
    let mut specs = Vec::new();
    let mut errors = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, spanned) in raw.experiment.iter().enumerate() {
        let line = line_of(text, spanned.span().start);
        match parse_spec(spanned.get_ref(), i, line) {
            Ok(spec) => {
                if !ids.insert(spec.id.clone()) {
                    errors.push(Error::Schema {
                        key: format!("experiment {:?} (line {line}).id", spec.id),
                        message: "duplicate id".into(),
                    });
                } else {
                    specs.push(spec);
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(specs)
    } else {
        Err(errors)
    }
}
