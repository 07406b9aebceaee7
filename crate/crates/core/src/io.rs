//! Run configuration and CSV/JSON snapshot files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kinetics::OdeTrajectory;
use crate::params::{Frame, SystemParams};
use crate::pde::{build_initial_state, simulate_from, DisturbanceSpec, FieldState};
use crate::polar::PolarField;

pub const CONFIG_FILE: &str = "config.json";
pub const SNAPSHOTS_CSV: &str = "snapshots.csv";
pub const SNAPSHOTS_JSON: &str = "snapshots.json";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub frame: Frame,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub t_end: f64,
    pub snapshot_every: f64,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// One CSV file per snapshot instead of a single file.
    #[serde(default)]
    pub split: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(self.eps1, self.eps2, self.p, self.q, self.frame)
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.x_min, self.x_max, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let grid = self.grid()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.snapshot_every > 0.0 && self.snapshot_every.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "snapshot_every must be positive, got {}",
                self.snapshot_every
            )));
        }
        let d = &self.disturbance;
        // a zero amplitude is allowed here and yields the trivial run
        if d.amplitude != 0.0 {
            d.validate()?;
        } else if !(d.width > 0.0 && d.width.is_finite()) {
            return Err(Error::InvalidDisturbance(format!("width must be positive, got {}", d.width)));
        }
        if !grid.contains(d.center) {
            return Err(Error::InvalidDisturbance(format!(
                "center {} lies outside [{}, {}]",
                d.center, self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<FieldState> {
        let grid = self.grid()?;
        if self.disturbance.amplitude == 0.0 {
            Ok(FieldState::zeros(grid))
        } else {
            build_initial_state(grid, self.disturbance)
        }
    }

    pub fn run(&self) -> Result<Vec<FieldState>> {
        self.validate()?;
        simulate_from(self.initial_state()?, &self.params()?, self.t_end, self.snapshot_every)
    }

    /// The configuration without output settings, as stored next to the snapshots.
    pub fn physics_only(&self) -> Self {
        Self { out: None, format: None, split: false, ..self.clone() }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    t: f64,
    x: f64,
    u: f64,
    v: f64,
}

#[derive(Debug, Serialize)]
struct PolarRow {
    t: f64,
    x: f64,
    r: f64,
    theta: f64,
    theta_valid: bool,
}

#[derive(Debug, Serialize)]
struct PortraitRow {
    t: f64,
    u: f64,
    v: f64,
    r: f64,
    theta: f64,
}

fn flush<W: std::io::Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_fields_csv<'a, W: std::io::Write>(
    states: impl IntoIterator<Item = &'a FieldState>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in states {
        for i in 0..s.grid.n() {
            w.serialize(FieldRow { t: s.t, x: s.grid.x(i), u: s.u[i], v: s.v[i] })?;
        }
    }
    flush(w)
}

pub fn write_polar_csv<'a, W: std::io::Write>(fields: impl IntoIterator<Item = &'a PolarField>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for pf in fields {
        for i in 0..pf.grid.n() {
            w.serialize(PolarRow {
                t: pf.t,
                x: pf.grid.x(i),
                r: pf.r[i],
                theta: pf.theta[i],
                theta_valid: pf.theta_valid[i],
            })?;
        }
    }
    flush(w)
}

pub fn write_portrait_csv<W: std::io::Write>(traj: &OdeTrajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for ((&t, p), th) in traj.times.iter().zip(&traj.points).zip(traj.phases()) {
        w.serialize(PortraitRow { t, u: p.u, v: p.v, r: p.radius(), theta: th })?;
    }
    flush(w)
}

/// Reads `t, x, u, v` rows; consecutive rows with equal `t` form one snapshot.
pub fn read_fields_csv<R: std::io::Read>(input: R) -> Result<Vec<FieldState>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut groups: Vec<(f64, Vec<FieldRow>)> = Vec::new();
    for rec in rdr.deserialize() {
        let row: FieldRow = rec?;
        match groups.last_mut() {
            Some((t, rows)) if *t == row.t => rows.push(row),
            _ => groups.push((row.t, vec![row])),
        }
    }
    groups.into_iter().map(|(t, rows)| state_from_rows(t, rows)).collect()
}

fn state_from_rows(t: f64, rows: Vec<FieldRow>) -> Result<FieldState> {
    let n = rows.len();
    let grid = Grid1D::new(rows[0].x, rows[n - 1].x, n)
        .map_err(|e| Error::InvalidGrid(format!("snapshot at t = {t}: {e}")))?;
    let tol = 1e-9 * grid.x_min().abs().max(grid.x_max().abs()).max(1.0);
    for (i, row) in rows.iter().enumerate() {
        if (row.x - grid.x(i)).abs() > tol {
            return Err(Error::InvalidGrid(format!(
                "snapshot at t = {t}: node {i} at x = {} is not on a uniform grid",
                row.x
            )));
        }
    }
    let (u, v) = rows.iter().map(|r| (r.u, r.v)).unzip();
    FieldState::new(grid, t, u, v)
}

pub fn read_fields_file(path: &Path) -> Result<Vec<FieldState>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let states: Vec<FieldState> = serde_json::from_str(&text)?;
        for s in &states {
            Grid1D::new(s.grid.x_min(), s.grid.x_max(), s.grid.n())?;
            s.validate()?;
        }
        return Ok(states);
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_fields_csv(file)
}

pub fn split_file_name(index: usize) -> String {
    format!("snapshot_{index:05}.csv")
}

/// Writes `config.json` and the snapshots into `dir`.
pub fn write_run_dir(dir: &Path, cfg: &RunConfig, states: &[FieldState], format: OutputFormat, split: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg_path = dir.join(CONFIG_FILE);
    let text = serde_json::to_string_pretty(&cfg.physics_only())?;
    fs::write(&cfg_path, text + "\n").map_err(|e| Error::io(&cfg_path, e))?;
    let create = |p: &Path| fs::File::create(p).map_err(|e| Error::io(p, e));
    match (format, split) {
        (OutputFormat::Json, _) => {
            let p = dir.join(SNAPSHOTS_JSON);
            serde_json::to_writer(std::io::BufWriter::new(create(&p)?), states)?;
        }
        (OutputFormat::Csv, false) => {
            let p = dir.join(SNAPSHOTS_CSV);
            write_fields_csv(states, std::io::BufWriter::new(create(&p)?))?;
        }
        (OutputFormat::Csv, true) => {
            for (k, s) in states.iter().enumerate() {
                let p = dir.join(split_file_name(k));
                write_fields_csv([s], std::io::BufWriter::new(create(&p)?))?;
            }
        }
    }
    Ok(())
}

/// Run directory contents: the stored configuration and snapshots in time order.
pub fn read_run_dir(dir: &Path) -> Result<(RunConfig, Vec<FieldState>)> {
    if !dir.is_dir() {
        return Err(Error::InsufficientData(format!("{} is not a run directory", dir.display())));
    }
    let cfg_path = dir.join(CONFIG_FILE);
    if !cfg_path.exists() {
        return Err(Error::InsufficientData(format!(
            "{} has no {CONFIG_FILE}; run `simulate` first",
            dir.display()
        )));
    }
    let cfg = RunConfig::load(&cfg_path)?;
    let states = read_snapshots(dir)?;
    if states.is_empty() {
        return Err(Error::InsufficientData(format!("no snapshots in {}", dir.display())));
    }
    Ok((cfg, states))
}

fn read_snapshots(dir: &Path) -> Result<Vec<FieldState>> {
    let json = dir.join(SNAPSHOTS_JSON);
    if json.exists() {
        return read_fields_file(&json);
    }
    let single = dir.join(SNAPSHOTS_CSV);
    if single.exists() {
        return read_fields_file(&single);
    }
    let mut parts: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snapshot_") && n.ends_with(".csv"))
        })
        .collect();
    parts.sort();
    let mut states = Vec::new();
    for p in parts {
        states.extend(read_fields_file(&p)?);
    }
    states.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(states)
}
