//! Command-line front end: `run`, `verify` and `list`.
//!
//! Exit codes: 0 success, 1 hard error in some experiment (or a failed
//! verify check), 2 config error.

pub mod config;
pub mod named;
pub mod report;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, ExperimentSpec, Format, OutputSpec, Task};
pub use named::{named_experiments, verify, verify_catalog, Verdict};
pub use report::{emit_report, from_json, render, to_csv, to_json};
pub use runner::{execute, run, Outcome, ResultRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HARD_ERROR: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "herzlab", version, about = "Riesz potential and Herz-norm experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunOptions {
    /// Output directory for reports and series files.
    #[arg(long, default_value = "herzlab-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads.
    #[arg(long, env = "HERZLAB_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiments of a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        options: RunOptions,
        /// Overrides the quadrature tolerance of every experiment.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the built-in acceptance catalog.
    Verify {
        #[command(flatten)]
        options: RunOptions,
    },
    /// List the named experiments.
    List,
}

fn default_jobs(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn summarize(rec: &ResultRecord) -> String {
    let status = if rec.is_error() { "error" } else { "ok" };
    let mut line = format!("{} [{}] {status} ({:.2} s)", rec.spec.id, rec.spec.kind(), rec.wall_time);
    for f in &rec.flags {
        line.push_str(&format!("; {f}"));
    }
    line
}

fn cmd_run(config: PathBuf, options: RunOptions, tol: Option<f64>) -> i32 {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_CONFIG_ERROR;
        }
    };
    let mut specs = match parse_config(&text) {
        Ok(s) => s,
        Err(errors) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return EXIT_CONFIG_ERROR;
        }
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            eprintln!("error: --tol must be in (0, 1), got {t}");
            return EXIT_CONFIG_ERROR;
        }
        for s in &mut specs {
            s.numerics.quad_tol = t;
        }
    }
    let records = match run(&specs, default_jobs(options.jobs)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    for r in &records {
        println!("{}", summarize(r));
    }
    if let Err(e) = emit_report(&records, options.format, &options.out) {
        eprintln!("error: {e}");
        return EXIT_HARD_ERROR;
    }
    if records.iter().any(|r| r.is_error()) {
        EXIT_HARD_ERROR
    } else {
        EXIT_OK
    }
}

fn cmd_verify(options: RunOptions) -> i32 {
    let (verdicts, records) = match verify(default_jobs(options.jobs)) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    for v in &verdicts {
        println!("{}: {} ({})", v.name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if let Err(e) = emit_report(&records, options.format, &options.out) {
        eprintln!("error: {e}");
        return EXIT_HARD_ERROR;
    }
    if verdicts.iter().all(|v| v.pass) {
        EXIT_OK
    } else {
        EXIT_HARD_ERROR
    }
}

fn cmd_list() -> i32 {
    for n in named_experiments() {
        println!("{:<14} {} spec(s)  {}", n.name, n.specs.len(), n.description);
    }
    EXIT_OK
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, options, tol } => cmd_run(config, options, tol),
        Command::Verify { options } => cmd_verify(options),
        Command::List => cmd_list(),
    }
}
