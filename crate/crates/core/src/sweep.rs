//! Parameter sweeps over (γ, ε) with ε₁ = 1, comparing measured front speeds
//! against the small- and large-parameter estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::{build_trace, estimate_speed, Side, SpeedEstimate, DEFAULT_THRESHOLD, DEFAULT_WINDOW_FRACTION};
use crate::grid::Grid1D;
use crate::params::SystemParams;
use crate::pde::{simulate, DisturbanceSpec};
use crate::polar::{to_polar, DEFAULT_R_FLOOR};
use crate::theory::{
    classify_instability, flow_centred_speeds, large_param_speed, regime, right_estimate_intersection,
    simple_speed, small_param_speed, Classification, Prediction, Regime,
};

/// Measured speeds this close to zero are not sign-tested.
pub const ZERO_SPEED_TOL: f64 = 0.05;
/// Error differences below this count as a tie (the estimates coincide at γ = 0, ε = 1).
pub const FIT_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunTemplate {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub disturbance: DisturbanceSpec,
    pub threshold: f64,
    pub window_fraction: f64,
    pub r_floor: f64,
}

impl Default for RunTemplate {
    fn default() -> Self {
        Self {
            x_min: -120.0,
            x_max: 300.0,
            n: 4201,
            t_end: 25.0,
            snapshot_every: 0.5,
            disturbance: DisturbanceSpec::default(),
            threshold: DEFAULT_THRESHOLD,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            r_floor: DEFAULT_R_FLOOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub gamma_values: Vec<f64>,
    /// ε = ε₂/ε₁ with ε₁ = 1.
    pub eps_ratio_values: Vec<f64>,
    #[serde(default)]
    pub template: RunTemplate,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            gamma_values: (0..=12).map(|k| 0.5 * k as f64).collect(),
            eps_ratio_values: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            template: RunTemplate::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_values.is_empty() {
            return Err(Error::InvalidConfig("gamma_values is empty".into()));
        }
        if self.eps_ratio_values.is_empty() {
            return Err(Error::InvalidConfig("eps_ratio_values is empty".into()));
        }
        if let Some(g) = self.gamma_values.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma value {g} is not finite")));
        }
        if let Some(e) = self.eps_ratio_values.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidConfig(format!("eps values must be positive, got {e}")));
        }
        let t = &self.template;
        Grid1D::new(t.x_min, t.x_max, t.n)?;
        t.disturbance.validate()?;
        if !(t.t_end > 0.0 && t.snapshot_every > 0.0) {
            return Err(Error::InvalidConfig("t_end and snapshot_every must be positive".into()));
        }
        if !(t.threshold > 0.0 && t.threshold < 1.0) {
            return Err(Error::InvalidConfig(format!("threshold must be in (0, 1), got {}", t.threshold)));
        }
        if !(t.window_fraction > 0.0 && t.window_fraction <= 1.0) {
            return Err(Error::InvalidConfig("window_fraction must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowPredictions {
    pub simple: Prediction,
    pub small_param: Prediction,
    pub large_param: Prediction,
    pub flow_centred: Prediction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub eps: f64,
    pub measured_left: Option<SpeedEstimate>,
    pub measured_right: Option<SpeedEstimate>,
    pub predicted: RowPredictions,
    pub regime: Regime,
    pub classification: Option<Classification>,
    /// The first attempt hit the boundary and was retried with half the run length.
    pub boundary_contaminated: bool,
    pub t_end_used: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_valid(&self) -> bool {
        self.measured_left.is_some() && self.measured_right.is_some()
    }
}

fn measure(params: &SystemParams, t: &RunTemplate, t_end: f64) -> Result<(SpeedEstimate, SpeedEstimate)> {
    let grid = Grid1D::new(t.x_min, t.x_max, t.n)?;
    let snaps = simulate(params, grid, t.disturbance, t_end, t.snapshot_every)?;
    let polar: Vec<_> = snaps.iter().map(|s| to_polar(s, t.r_floor)).collect();
    let trace = build_trace(&polar, t.threshold)?;
    Ok((
        estimate_speed(&trace, Side::Left, t.window_fraction)?,
        estimate_speed(&trace, Side::Right, t.window_fraction)?,
    ))
}

/// One (γ, ε) run in the reduced frame. Never fails: errors are recorded on the row.
pub fn run_point(gamma: f64, eps: f64, template: &RunTemplate) -> SweepRow {
    let params = match SystemParams::reduced(gamma, 1.0, eps) {
        Ok(p) => p,
        Err(e) => return failed_row(gamma, eps, template.t_end, e),
    };
    let mut row = SweepRow {
        gamma,
        eps,
        measured_left: None,
        measured_right: None,
        predicted: RowPredictions {
            simple: simple_speed(&params),
            small_param: small_param_speed(&params),
            large_param: large_param_speed(&params),
            flow_centred: flow_centred_speeds(&params),
        },
        regime: regime(&params),
        classification: None,
        boundary_contaminated: false,
        t_end_used: template.t_end,
        error: None,
    };

    let mut outcome = measure(&params, template, template.t_end);
    if matches!(outcome, Err(Error::BoundaryContaminated { .. })) {
        row.boundary_contaminated = true;
        row.t_end_used = 0.5 * template.t_end;
        outcome = measure(&params, template, row.t_end_used);
    }
    match outcome {
        Ok((left, right)) => {
            row.classification = Some(classify_instability(left.speed, right.speed, ZERO_SPEED_TOL));
            row.measured_left = Some(left);
            row.measured_right = Some(right);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn failed_row(gamma: f64, eps: f64, t_end: f64, e: Error) -> SweepRow {
    let nan = Prediction {
        left_speed: f64::NAN,
        right_speed: f64::NAN,
        estimate: crate::theory::Estimate::Simple,
        frame: crate::params::Frame::Reduced,
    };
    SweepRow {
        gamma,
        eps,
        measured_left: None,
        measured_right: None,
        predicted: RowPredictions { simple: nan, small_param: nan, large_param: nan, flow_centred: nan },
        regime: Regime::SmallParam,
        classification: None,
        boundary_contaminated: false,
        t_end_used: t_end,
        error: Some(e.to_string()),
    }
}

/// Runs every (γ, ε) pair on `jobs` worker threads. Row order follows
/// `eps_ratio_values` then `gamma_values`, independent of scheduling.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points: Vec<(f64, f64)> = spec
        .eps_ratio_values
        .iter()
        .flat_map(|&e| spec.gamma_values.iter().map(move |&g| (g, e)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|&(g, e)| run_point(g, e, &spec.template)).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowComparison {
    pub gamma: f64,
    pub eps: f64,
    pub regime: Regime,
    /// Relative error of each measured speed against the regime-selected estimate.
    pub left_rel_error: f64,
    pub right_rel_error: f64,
    pub small_right_error: f64,
    pub large_right_error: f64,
    /// Estimate closer to the measured right speed; ties go to the small one.
    pub better_fit: Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub rows: Vec<RowComparison>,
    pub valid_rows: usize,
    pub failed_rows: usize,
    pub no_valid_rows: bool,
    pub max_left_rel_error: f64,
    pub mean_left_rel_error: f64,
    pub max_right_rel_error: f64,
    pub mean_right_rel_error: f64,
}

/// `|measured − predicted| / |predicted|`, falling back to the absolute error
/// when the prediction is zero.
pub fn relative_error(measured: f64, predicted: f64) -> f64 {
    let diff = (measured - predicted).abs();
    if predicted.abs() > 1e-9 {
        diff / predicted.abs()
    } else {
        diff
    }
}

pub fn compare(rows: &[SweepRow]) -> ComparisonSummary {
    let mut out = Vec::new();
    for row in rows {
        let (Some(l), Some(r)) = (row.measured_left, row.measured_right) else { continue };
        let selected = match row.regime {
            Regime::SmallParam => row.predicted.small_param,
            Regime::LargeParam => row.predicted.large_param,
        };
        let small_right_error = (r.speed - row.predicted.small_param.right_speed).abs();
        let large_right_error = (r.speed - row.predicted.large_param.right_speed).abs();
        out.push(RowComparison {
            gamma: row.gamma,
            eps: row.eps,
            regime: row.regime,
            left_rel_error: relative_error(l.speed, selected.left_speed),
            right_rel_error: relative_error(r.speed, selected.right_speed),
            small_right_error,
            large_right_error,
            better_fit: if large_right_error < small_right_error - FIT_TIE_TOL {
                Regime::LargeParam
            } else {
                Regime::SmallParam
            },
        });
    }
    let n = out.len();
    let stat = |f: fn(&RowComparison) -> f64| {
        if n == 0 {
            return (0.0, 0.0);
        }
        let max = out.iter().map(f).fold(0.0, f64::max);
        (max, out.iter().map(f).sum::<f64>() / n as f64)
    };
    let (max_left, mean_left) = stat(|c| c.left_rel_error);
    let (max_right, mean_right) = stat(|c| c.right_rel_error);
    ComparisonSummary {
        valid_rows: n,
        failed_rows: rows.len() - n,
        no_valid_rows: n == 0,
        max_left_rel_error: max_left,
        mean_left_rel_error: mean_left,
        max_right_rel_error: max_right,
        mean_right_rel_error: mean_right,
        rows: out,
    }
}

/// Where the better-fitting estimate changes along γ at one ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchAnalysis {
    pub eps: f64,
    pub gammas: Vec<f64>,
    pub better_fit: Vec<Regime>,
    pub switch_count: usize,
    /// Midpoint between the last γ fitted better by the small estimate and the
    /// first fitted better by the large one (first switch only).
    pub switch_gamma: Option<f64>,
    /// γ where the two right-speed estimates cross.
    pub intersection: f64,
}

pub fn regime_switch(summary: &ComparisonSummary, eps: f64) -> SwitchAnalysis {
    let mut rows: Vec<&RowComparison> = summary.rows.iter().filter(|c| c.eps == eps).collect();
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    let gammas: Vec<f64> = rows.iter().map(|c| c.gamma).collect();
    let better_fit: Vec<Regime> = rows.iter().map(|c| c.better_fit).collect();
    let mut switch_count = 0;
    let mut switch_gamma = None;
    for i in 1..better_fit.len() {
        if better_fit[i] != better_fit[i - 1] {
            switch_count += 1;
            if switch_gamma.is_none() {
                switch_gamma = Some(0.5 * (gammas[i - 1] + gammas[i]));
            }
        }
    }
    SwitchAnalysis {
        eps,
        gammas,
        better_fit,
        switch_count,
        switch_gamma,
        intersection: right_estimate_intersection(1.0, eps),
    }
}

/// Flat record for CSV output.
#[derive(Debug, Serialize)]
pub struct SweepCsvRecord {
    pub gamma: f64,
    pub eps: f64,
    pub measured_left: Option<f64>,
    pub measured_left_stderr: Option<f64>,
    pub measured_right: Option<f64>,
    pub measured_right_stderr: Option<f64>,
    pub pred_small_left: f64,
    pub pred_small_right: f64,
    pub pred_large_left: f64,
    pub pred_large_right: f64,
    pub regime: Regime,
    pub classification: Option<Classification>,
    pub boundary_contaminated: bool,
    pub error: Option<String>,
}

impl From<&SweepRow> for SweepCsvRecord {
    fn from(r: &SweepRow) -> Self {
        Self {
            gamma: r.gamma,
            eps: r.eps,
            measured_left: r.measured_left.map(|e| e.speed),
            measured_left_stderr: r.measured_left.map(|e| e.stderr),
            measured_right: r.measured_right.map(|e| e.speed),
            measured_right_stderr: r.measured_right.map(|e| e.stderr),
            pred_small_left: r.predicted.small_param.left_speed,
            pred_small_right: r.predicted.small_param.right_speed,
            pred_large_left: r.predicted.large_param.left_speed,
            pred_large_right: r.predicted.large_param.right_speed,
            regime: r.regime,
            classification: r.classification,
            boundary_contaminated: r.boundary_contaminated,
            error: r.error.clone(),
        }
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(SweepCsvRecord::from(row))?;
    }
    w.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}
