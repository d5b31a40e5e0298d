//! Batch front-end for the taunets verification suites.
//!
//! Every command produces one [`Envelope`] (schema version 1) written as JSON or as CSV
//! with one row per check. Exit codes: 0 all checks pass, 1 some check fails, 2 usage or
//! parse error, 3 evaluation error. Reports are written only on 0 and 1.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use taunets::report::{Check, VerificationReport};
use taunets::{Context64, EpsGrid64, Error, OpenBox64, Thresholds};

mod commands;
mod output;

pub use output::{render, Envelope, RunConfig, SCHEMA_VERSION};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_EVAL: u8 = 3;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "taunets",
    version,
    about = "Verify tempered generalized functions on finite eps-grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Run every suite on the built-in counterexample net.
    VerifyCounterexample,
    /// Classify an expression as moderate, negligible or neither.
    Classify,
    /// Reciprocal test, pointwise criterion and witness search side by side.
    InvertCheck,
    /// Value of an expression at a generalized point.
    EvalPoint {
        /// Comma separated coordinates in `eps`, e.g. "eps^-2, 0.5".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyCounterexample => "verify-counterexample",
            Command::Classify => "classify",
            Command::InvertCheck => "invert-check",
            Command::EvalPoint { .. } => "eval-point",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Space dimension d.
    #[arg(long, global = true, default_value_t = 2)]
    pub dim: usize,
    /// Largest grid value is 2^-K.
    #[arg(long, global = true, default_value_t = 4)]
    pub grid_min_exp: u32,
    /// Number of dyadic grid values 2^-K, 2^-(K+1), ...
    #[arg(long, global = true, default_value_t = 37)]
    pub grid_points: u32,
    /// Sampled reach |x| <= eps^-J.
    #[arg(long, global = true, default_value_t = 6)]
    pub jmax: u32,
    /// Largest negligibility exponent tested.
    #[arg(long, global = true, default_value_t = Thresholds::default().p_max)]
    pub pmax: u32,
    /// Largest moderateness exponent tested.
    #[arg(long, global = true, default_value_t = Thresholds::default().n_max)]
    pub nmax: u32,
    /// Largest strict non-zero exponent tested.
    #[arg(long, global = true, default_value_t = Thresholds::default().m_max)]
    pub mmax: u32,
    /// Seed for sampling and perturbations (decimal or 0x-hex).
    #[arg(long, global = true, value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Expression in the net language.
    #[arg(
        long,
        global = true,
        allow_hyphen_values = true,
        conflicts_with = "expr_file"
    )]
    pub expr: Option<String>,
    /// File holding the expression.
    #[arg(long, global = true)]
    pub expr_file: Option<PathBuf>,
    /// Domain: `whole`, `unit`, `half` or intervals like "0:1,-inf:inf".
    #[arg(
        long = "box",
        global = true,
        allow_hyphen_values = true,
        default_value = "whole"
    )]
    pub domain: String,
    /// Expected verdict; without it the verdicts are reported as observed.
    #[arg(long, global = true, value_enum)]
    pub expect: Option<Expect>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Moderate,
    Negligible,
    Neither,
    Invertible,
    NotInvertible,
    Nonzero,
    NotNonzero,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

/// What a run produced: exit code, the rendered report if one was written, and the
/// message for standard error otherwise.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: u8,
    pub envelope: Option<Envelope>,
    pub rendered: Option<Vec<u8>>,
    pub error: Option<String>,
}

impl Outcome {
    fn failure(code: u8, msg: impl Into<String>) -> Self {
        Outcome {
            code,
            envelope: None,
            rendered: None,
            error: Some(msg.into()),
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub(crate) struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Domain(_) | Error::InvalidGrid(_) => EXIT_USAGE,
            Error::Evaluation { .. } | Error::NotModerate { .. } | Error::Construction { .. } => {
                EXIT_EVAL
            }
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

/// Caps the worker pool at `TAUNETS_THREADS` workers when set.
pub fn configure_threads(var: Option<&str>) -> Result<(), String> {
    let Some(v) = var.map(str::trim).filter(|v| !v.is_empty()) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("TAUNETS_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("TAUNETS_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Runs one command and writes its report to `--out` or standard output.
pub fn run(cli: &Cli) -> Outcome {
    let outcome = execute(cli);
    let Some(bytes) = &outcome.rendered else {
        return outcome;
    };
    let written = match &cli.opts.out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => outcome,
        Err(msg) => Outcome::failure(EXIT_USAGE, msg),
    }
}

/// Runs one command and renders its report without writing it anywhere.
pub fn execute(cli: &Cli) -> Outcome {
    let started = Instant::now();
    let result = setup(cli).and_then(|(ctx, config, domain, expr)| {
        let report = commands::dispatch(cli, &ctx, &domain, expr.as_deref())?;
        Ok((config, report))
    });
    let (config, report) = match result {
        Ok(v) => v,
        Err(f) => return Outcome::failure(f.code, f.msg),
    };
    let wall_time_ms = cli
        .opts
        .timing
        .then(|| started.elapsed().as_millis() as u64);
    let envelope = Envelope::new(config, report, wall_time_ms);
    match render(&envelope, cli.opts.format) {
        Ok(bytes) => Outcome {
            code: if envelope.overall {
                EXIT_PASS
            } else {
                EXIT_FAIL
            },
            envelope: Some(envelope),
            rendered: Some(bytes),
            error: None,
        },
        Err(msg) => Outcome::failure(EXIT_EVAL, msg),
    }
}

type Setup = (Context64, RunConfig, OpenBox64, Option<String>);

fn setup(cli: &Cli) -> Result<Setup, Failure> {
    let o = &cli.opts;
    if o.dim == 0 {
        return Err(Failure::usage("--dim must be at least 1"));
    }
    for (flag, v) in [
        ("--grid-min-exp", o.grid_min_exp),
        ("--grid-points", o.grid_points),
        ("--pmax", o.pmax),
        ("--nmax", o.nmax),
        ("--mmax", o.mmax),
    ] {
        if v == 0 {
            return Err(Failure::usage(format!("{flag} must be positive")));
        }
    }
    if o.grid_points < 2 {
        return Err(Failure::usage("--grid-points must be at least 2"));
    }
    let k_max = o
        .grid_min_exp
        .checked_add(o.grid_points - 1)
        .ok_or_else(|| Failure::usage("grid too long"))?;
    let grid = EpsGrid64::dyadic(o.grid_min_exp, k_max)?;
    let defaults = Thresholds::default();
    let thresholds = Thresholds {
        p_max: o.pmax,
        n_max: o.nmax,
        m_max: o.mmax,
        seed: o.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let ctx = Context64::new(grid, thresholds);
    let domain = parse_box(&o.domain, o.dim)?;
    let expr = match (&o.expr, &o.expr_file) {
        (Some(e), _) => Some(e.clone()),
        (None, Some(path)) => Some(
            fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?
                .trim()
                .to_string(),
        ),
        (None, None) => None,
    };
    let config = RunConfig::new(cli, &ctx, &domain, expr.clone());
    Ok((ctx, config, domain, expr))
}

/// `whole`, `unit`, `half`, or comma separated `lo:hi` intervals (`inf` allowed).
pub(crate) fn parse_box(spec: &str, dim: usize) -> Result<OpenBox64, Failure> {
    match spec.trim() {
        "whole" => return Ok(OpenBox64::whole_space(dim)),
        "unit" => return Ok(OpenBox64::unit_cube(dim)),
        "half" => return Ok(OpenBox64::half_space(dim)),
        _ => {}
    }
    let bad = || {
        Failure::usage(format!(
            "invalid --box `{spec}`: expected whole, unit, half or lo:hi,..."
        ))
    };
    let intervals = spec
        .split(',')
        .map(|part| {
            let (lo, hi) = part.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            Ok(taunets::gpoint::Interval::new(lo, hi)?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    if intervals.len() != dim {
        return Err(Failure::usage(format!(
            "--box has {} intervals but --dim is {dim}",
            intervals.len()
        )));
    }
    Ok(OpenBox64::new(intervals)?)
}

/// Expected value of a check: the given expectation, or the observation itself.
pub(crate) fn expected_or_observed(id: &str, holds: bool, expected: Option<bool>) -> Check {
    Check::new(id, holds, expected.unwrap_or(holds))
}

pub(crate) fn report(suite: &str, checks: Vec<Check>) -> VerificationReport {
    VerificationReport::new(suite, checks)
}
