//! Front detection and speed measurement on polar snapshots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::polar::{mod_pi, PolarField};
use crate::theory::{predict_all, PredictionSet};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
pub const DEFAULT_INSET: f64 = 2.0;
/// r-level marking the leading edge where the onset angle is read.
pub const DEFAULT_ONSET_LEVEL: f64 = 0.1;
pub const MIN_TRACE_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Outermost crossings of `r = threshold`, linearly interpolated.
pub fn detect_fronts(pf: &PolarField, threshold: f64) -> Result<(f64, f64)> {
    let first = pf.r.iter().position(|&r| r > threshold);
    let last = pf.r.iter().rposition(|&r| r > threshold);
    let (Some(i_left), Some(i_right)) = (first, last) else {
        return Err(Error::NoFront { threshold });
    };
    let g = &pf.grid;
    let h = g.h();
    let n = g.n();

    let right = if i_right + 1 == n {
        g.x(n - 1)
    } else {
        let (a, b) = (pf.r[i_right], pf.r[i_right + 1]);
        g.x(i_right) + (a - threshold) / (a - b) * h
    };
    let left = if i_left == 0 {
        g.x(0)
    } else {
        let (a, b) = (pf.r[i_left], pf.r[i_left - 1]);
        g.x(i_left) - (a - threshold) / (a - b) * h
    };
    Ok((left, right))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub left_pos: Vec<f64>,
    pub right_pos: Vec<f64>,
    pub threshold: f64,
    /// Snapshot times at which no front was found.
    pub skipped: Vec<f64>,
}

impl FrontTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn positions(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.left_pos,
            Side::Right => &self.right_pos,
        }
    }

    pub fn widths(&self) -> Vec<f64> {
        self.right_pos.iter().zip(&self.left_pos).map(|(r, l)| r - l).collect()
    }

    pub fn centres(&self) -> Vec<f64> {
        self.right_pos.iter().zip(&self.left_pos).map(|(r, l)| 0.5 * (r + l)).collect()
    }
}

pub fn build_trace(snapshots: &[PolarField], threshold: f64) -> Result<FrontTrace> {
    let mut trace = FrontTrace {
        times: Vec::new(),
        left_pos: Vec::new(),
        right_pos: Vec::new(),
        threshold,
        skipped: Vec::new(),
    };
    for pf in snapshots {
        match detect_fronts(pf, threshold) {
            Ok((l, r)) => {
                trace.times.push(pf.t);
                trace.left_pos.push(l);
                trace.right_pos.push(r);
            }
            Err(Error::NoFront { .. }) => trace.skipped.push(pf.t),
            Err(e) => return Err(e),
        }
    }
    if trace.len() < MIN_TRACE_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} of {} snapshots show a front at r = {threshold}; need {MIN_TRACE_POINTS} (increase t_end)",
            trace.len(),
            snapshots.len()
        )));
    }
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub stderr: f64,
    pub window: (f64, f64),
}

/// Ordinary least squares of `ys` on `ts`: slope and its standard error.
fn ols_slope(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        sxx += (t - t_mean) * (t - t_mean);
        sxy += (t - t_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let ssr: f64 = ts.iter().zip(ys).map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    let stderr = if ts.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, stderr)
}

/// Index of the first sample inside the trailing `window_fraction` of the time span.
fn window_start(times: &[f64], window_fraction: f64) -> usize {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let cut = t1 - window_fraction * (t1 - t0);
    // small slack so a cut landing on a sample keeps it
    let slack = 1e-9 * (t1 - t0).abs().max(1.0);
    times.iter().position(|&t| t >= cut - slack).unwrap_or(times.len())
}

fn fit_window(times: &[f64], ys: &[f64], window_fraction: f64) -> Result<SpeedEstimate> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParams(format!("window fraction must be in (0, 1], got {window_fraction}")));
    }
    if times.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let start = window_start(times, window_fraction);
    let (ts, ys) = (&times[start..], &ys[start..]);
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points in the fit window; need 3 (increase t_end or the window)",
            ts.len()
        )));
    }
    let (speed, stderr) = ols_slope(ts, ys);
    Ok(SpeedEstimate { speed, stderr, window: (ts[0], ts[ts.len() - 1]) })
}

pub fn estimate_speed(trace: &FrontTrace, side: Side, window_fraction: f64) -> Result<SpeedEstimate> {
    fit_window(&trace.times, trace.positions(side), window_fraction)
}

/// Drift of the midpoint between the two fronts.
pub fn centreline_speed(trace: &FrontTrace, window_fraction: f64) -> Result<SpeedEstimate> {
    fit_window(&trace.times, &trace.centres(), window_fraction)
}

/// θ mod π at the node nearest a point `inset` inside the pattern from `front`.
pub fn onset_angle(pf: &PolarField, front: f64, side: Side, inset: f64) -> Result<f64> {
    if !(inset > 0.0 && inset.is_finite()) {
        return Err(Error::InvalidInset(format!("inset must be positive, got {inset}")));
    }
    let x = match side {
        Side::Right => front - inset,
        Side::Left => front + inset,
    };
    angle_at(pf, x)
}

fn angle_at(pf: &PolarField, x: f64) -> Result<f64> {
    if !pf.grid.contains(x) {
        return Err(Error::InvalidInset(format!("sample point {x} outside the grid")));
    }
    let i = pf.grid.nearest(x);
    if !pf.theta_valid[i] {
        return Err(Error::InvalidInset(format!("θ undefined at x = {} (r = {:e})", pf.grid.x(i), pf.r[i])));
    }
    Ok(pf.theta_mod_pi(i))
}

/// θ mod π where r falls through `level` on the outward side of the pattern:
/// the phase with which new pattern is laid down.
pub fn leading_edge_angle(pf: &PolarField, side: Side, level: f64) -> Result<f64> {
    let x = match side {
        Side::Left => detect_fronts(pf, level)?.0,
        Side::Right => detect_fronts(pf, level)?.1,
    };
    angle_at(pf, x)
}

/// Axial (period-π) circular mean.
pub fn axial_mean(angles: &[f64]) -> f64 {
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| {
        let (sa, ca) = (2.0 * a).sin_cos();
        (s + sa, c + ca)
    });
    mod_pi(0.5 * s.atan2(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub threshold: f64,
    pub window_fraction: f64,
    pub inset: f64,
    pub onset_level: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            inset: DEFAULT_INSET,
            onset_level: DEFAULT_ONSET_LEVEL,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("threshold", self.threshold), ("onset_level", self.onset_level)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!("{name} must be in (0, 1), got {v}")));
            }
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "window fraction must be in (0, 1], got {}",
                self.window_fraction
            )));
        }
        if !(self.inset > 0.0 && self.inset.is_finite()) {
            return Err(Error::InvalidInset(format!("inset must be positive, got {}", self.inset)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeedReport {
    pub left: SpeedEstimate,
    pub right: SpeedEstimate,
    /// Axial mean over the fit window of the leading-edge angle, in `[0, π)`.
    pub left_onset_angle: f64,
    pub right_onset_angle: f64,
    /// θ mod π a fixed inset inside each front on the final snapshot, when defined.
    pub left_inset_angle: Option<f64>,
    pub right_inset_angle: Option<f64>,
    pub centreline_speed: SpeedEstimate,
    /// θ mod π at the pattern midpoint on the final snapshot (recorded only).
    pub centreline_angle: Option<f64>,
    pub params: SystemParams,
    pub options: AnalysisOptions,
    pub skipped_snapshots: usize,
    pub predictions: PredictionSet,
}

/// Full measurement pipeline on polar snapshots of one run.
pub fn analyze(snapshots: &[PolarField], params: &SystemParams, options: &AnalysisOptions) -> Result<SpeedReport> {
    options.validate()?;
    let trace = build_trace(snapshots, options.threshold)?;
    let left = estimate_speed(&trace, Side::Left, options.window_fraction)?;
    let right = estimate_speed(&trace, Side::Right, options.window_fraction)?;
    let centre = centreline_speed(&trace, options.window_fraction)?;

    let in_window: Vec<&PolarField> =
        snapshots.iter().filter(|pf| pf.t >= left.window.0 && pf.t <= left.window.1).collect();
    let onset = |side| -> Result<f64> {
        let angles: Vec<f64> = in_window
            .iter()
            .filter_map(|pf| leading_edge_angle(pf, side, options.onset_level).ok())
            .collect();
        if angles.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no leading edge at r = {} inside the fit window",
                options.onset_level
            )));
        }
        Ok(axial_mean(&angles))
    };
    let left_onset_angle = onset(Side::Left)?;
    let right_onset_angle = onset(Side::Right)?;

    let last = snapshots
        .iter()
        .rev()
        .find(|pf| detect_fronts(pf, options.threshold).is_ok())
        .expect("trace has detectable snapshots");
    let (lf, rf) = detect_fronts(last, options.threshold)?;

    Ok(SpeedReport {
        left,
        right,
        left_onset_angle,
        right_onset_angle,
        left_inset_angle: onset_angle(last, lf, Side::Left, options.inset).ok(),
        right_inset_angle: onset_angle(last, rf, Side::Right, options.inset).ok(),
        centreline_speed: centre,
        centreline_angle: angle_at(last, 0.5 * (lf + rf)).ok(),
        params: *params,
        options: *options,
        skipped_snapshots: trace.skipped.len(),
        predictions: predict_all(params, 1e-6),
    })
}
