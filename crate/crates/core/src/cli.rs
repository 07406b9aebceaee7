//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::front::{analyze, AnalysisOptions, DEFAULT_INSET, DEFAULT_ONSET_LEVEL, DEFAULT_THRESHOLD, DEFAULT_WINDOW_FRACTION};
use crate::io::{read_fields_file, read_run_dir, write_polar_csv, write_portrait_csv, write_run_dir, OutputFormat, RunConfig};
use crate::kinetics::{integrate_ode, CartesianPoint, PolarPoint};
use crate::params::{Frame, SystemParams};
use crate::polar::{to_polar, DEFAULT_R_FLOOR};
use crate::sweep::{compare, regime_switch, run_sweep, write_csv, ComparisonSummary, SweepRow, SweepSpec, SwitchAnalysis};
use crate::theory::{general_speed, predict_all, Prediction, PredictionSet};

#[derive(Debug, Parser)]
#[command(name = "lambda-omega", version, about = "Fronts in a convective lambda-omega system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the PDE from a JSON run configuration and write snapshots.
    Simulate(SimulateArgs),
    /// Integrate the kinetics ODE and emit t, u, v, r, theta as CSV.
    PhasePortrait(PortraitArgs),
    /// Convert t, x, u, v snapshots to t, x, r, theta, theta_valid.
    Transform(TransformArgs),
    /// Measure front speeds and onset angles of a simulated run.
    Analyze(AnalyzeArgs),
    /// Print all theoretical speed estimates for a parameter set.
    Predict(PredictArgs),
    /// Run a (gamma, eps) sweep and compare against the estimates.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write one CSV file per snapshot.
    #[arg(long)]
    pub split: bool,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[arg(long, default_value_t = 0.1)]
    pub u0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub v0: f64,
    /// Start on the u axis at this radius (overrides --u0/--v0).
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 30.0)]
    pub t_end: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Snapshot CSV/JSON file, or a run directory.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_R_FLOOR)]
    pub r_floor: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Run directory written by `simulate`.
    pub dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Trailing fraction of the run used for the speed fits.
    #[arg(long, default_value_t = DEFAULT_WINDOW_FRACTION)]
    pub window: f64,
    #[arg(long, default_value_t = DEFAULT_INSET)]
    pub inset: f64,
    #[arg(long, default_value_t = DEFAULT_ONSET_LEVEL)]
    pub onset_level: f64,
    #[arg(long, default_value_t = DEFAULT_R_FLOOR)]
    pub r_floor: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Reduced-frame convection; shorthand for --p 0 --q GAMMA.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub eps1: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub eps2: f64,
    #[arg(long, default_value_t = Frame::Reduced)]
    pub frame: Frame,
    /// Also evaluate the general estimate at this angle.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Zero tolerance of the sign test.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep specification; the default grid when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub window: Option<f64>,
}

/// Runs a parsed command. Results go to files or stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::PhasePortrait(a) => cmd_phase_portrait(&a),
        Command::Transform(a) => cmd_transform(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

/// Machine-readable error document written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<&'static str>,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        let hint = match e {
            Error::InsufficientData(_) | Error::NoFront { .. } => {
                Some("increase t_end or decrease snapshot_every so the fronts are tracked over more snapshots")
            }
            Error::BoundaryContaminated { .. } => Some("enlarge the domain or shorten t_end"),
            _ => None,
        };
        Self { error: e.kind(), message: e.to_string(), exit_code: e.exit_code(), hint }
    }
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = std::io::BufWriter::new(fs::File::create(p).map_err(|e| Error::io(p, e))?);
            write(&mut f)?;
            f.flush().map_err(|e| Error::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w).map_err(|e| Error::io("<output>", e))
    })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let dir = a
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| Error::InvalidConfig("no output directory: pass --out or set `out`".into()))?;
    let format = a.format.or(cfg.format).unwrap_or_default();
    let split = a.split || cfg.split;
    if split && format == OutputFormat::Json {
        return Err(Error::InvalidConfig("split output is only available for csv".into()));
    }
    let states = cfg.run()?;
    write_run_dir(&dir, &cfg, &states, format, split)
}

pub fn cmd_phase_portrait(a: &PortraitArgs) -> Result<()> {
    let start = match a.r0 {
        Some(r) if !(r >= 0.0 && r.is_finite()) => {
            return Err(Error::InvalidParams(format!("r0 must be non-negative, got {r}")))
        }
        Some(r) => PolarPoint { r, theta: 0.0 }.to_cartesian(),
        None => CartesianPoint::new(a.u0, a.v0),
    };
    let traj = integrate_ode(start, a.dt, a.t_end)?;
    emit(a.out.as_deref(), |w| write_portrait_csv(&traj, w))
}

pub fn cmd_transform(a: &TransformArgs) -> Result<()> {
    if !(a.r_floor >= 0.0 && a.r_floor.is_finite()) {
        return Err(Error::InvalidParams(format!("r_floor must be non-negative, got {}", a.r_floor)));
    }
    let states = if a.input.is_dir() { read_run_dir(&a.input)?.1 } else { read_fields_file(&a.input)? };
    let polar: Vec<_> = states.iter().map(|s| to_polar(s, a.r_floor)).collect();
    emit(a.out.as_deref(), |w| write_polar_csv(&polar, w))
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let options = AnalysisOptions {
        threshold: a.threshold,
        window_fraction: a.window,
        inset: a.inset,
        onset_level: a.onset_level,
    };
    options.validate()?;
    let (cfg, states) = read_run_dir(&a.dir)?;
    let params = cfg.params()?;
    let polar: Vec<_> = states.iter().map(|s| to_polar(s, a.r_floor)).collect();
    let report = analyze(&polar, &params, &options)?;
    emit_json(a.out.as_deref(), &report)
}

#[derive(Debug, Serialize)]
pub struct PredictOutput {
    #[serde(flatten)]
    pub set: PredictionSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general: Option<Prediction>,
    pub params: SystemParams,
}

pub fn predict_params(a: &PredictArgs) -> Result<SystemParams> {
    let (p, q) = match a.gamma {
        Some(g) => (0.0, g),
        None => (a.p.unwrap_or(0.0), a.q.unwrap_or(0.0)),
    };
    SystemParams::new(a.eps1, a.eps2, p, q, a.frame)
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let params = predict_params(a)?;
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(Error::InvalidParams(format!("tol must be non-negative, got {}", a.tol)));
    }
    let out = PredictOutput {
        set: predict_all(&params, a.tol),
        general: a.theta.map(|th| general_speed(th, &params)),
        params,
    };
    emit_json(None, &out)
}

#[derive(Debug, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: ComparisonSummary,
    pub switches: Vec<SwitchAnalysis>,
}

pub fn load_sweep_spec(a: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text)?
        }
        None => SweepSpec::default(),
    };
    if let Some(t) = a.threshold {
        spec.template.threshold = t;
    }
    if let Some(w) = a.window {
        spec.template.window_fraction = w;
    }
    if a.jobs == 0 {
        return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    spec.validate()?;
    Ok(spec)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let spec = load_sweep_spec(a)?;
    let rows = run_sweep(&spec, a.jobs)?;
    match a.format {
        OutputFormat::Csv => emit(a.out.as_deref(), |w| write_csv(&rows, w)),
        OutputFormat::Json => {
            let summary = compare(&rows);
            let switches = spec.eps_ratio_values.iter().map(|&e| regime_switch(&summary, e)).collect();
            emit_json(a.out.as_deref(), &SweepOutput { rows, summary, switches })
        }
    }
}
