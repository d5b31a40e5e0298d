//! Report envelope and its JSON / CSV renderings.

use serde::Serialize;
use taunets::report::{Check, VerificationReport};
use taunets::{Context64, OpenBox64};

use crate::{Cli, Command, Expect, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the resolved run parameters. The output path is left out so that reports
/// written to different files stay byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub dim: usize,
    pub grid_min_exp: u32,
    pub grid_points: u32,
    pub j_max: u32,
    pub p_max: u32,
    pub n_max: u32,
    pub m_max: u32,
    pub seed: Option<u64>,
    pub perturbation_seed: u64,
    pub domain: String,
    pub expr: Option<String>,
    pub point: Option<String>,
    pub expect: Option<Expect>,
    pub format: Format,
}

impl RunConfig {
    pub(crate) fn new(
        cli: &Cli,
        ctx: &Context64,
        domain: &OpenBox64,
        expr: Option<String>,
    ) -> Self {
        let o = &cli.opts;
        RunConfig {
            command: cli.command.name(),
            dim: o.dim,
            grid_min_exp: o.grid_min_exp,
            grid_points: o.grid_points,
            j_max: o.jmax,
            p_max: ctx.thresholds.p_max,
            n_max: ctx.thresholds.n_max,
            m_max: ctx.thresholds.m_max,
            seed: o.seed,
            perturbation_seed: ctx.thresholds.seed,
            domain: domain.to_string(),
            expr,
            point: match &cli.command {
                Command::EvalPoint { point } => Some(point.clone()),
                _ => None,
            },
            expect: o.expect,
            format: o.format,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub suite: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub overall: bool,
    /// `None` unless timing was requested.
    pub wall_time_ms: Option<u64>,
}

impl Envelope {
    pub fn new(config: RunConfig, report: VerificationReport, wall_time_ms: Option<u64>) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            suite: report.suite,
            config,
            checks: report.checks,
            overall: report.overall,
            wall_time_ms,
        }
    }
}

pub fn render(env: &Envelope, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(env).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => render_csv(env).map_err(|e| e.to_string()),
    }
}

/// Columns: suite, id, holds, expected, pass, worst_margin, witness_eps, witness_x
/// (semicolon separated), note.
fn render_csv(env: &Envelope) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "suite",
        "id",
        "holds",
        "expected",
        "pass",
        "worst_margin",
        "witness_eps",
        "witness_x",
        "note",
    ])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for c in &env.checks {
        let (eps, x) = match &c.witness {
            Some(w) => (
                w.eps.to_string(),
                w.x.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
            ),
            None => (String::new(), String::new()),
        };
        w.write_record([
            env.suite.as_str(),
            c.id.as_str(),
            &c.holds.to_string(),
            &c.expected.to_string(),
            &c.pass.to_string(),
            &opt(c.worst_margin),
            &eps,
            &x,
            c.note.as_deref().unwrap_or(""),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}
