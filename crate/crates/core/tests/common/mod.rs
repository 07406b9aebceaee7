#![allow(dead_code)]

use lambda_omega::front::{build_trace, estimate_speed, FrontTrace, Side, SpeedEstimate};
use lambda_omega::polar::{to_polar, PolarField, DEFAULT_R_FLOOR};
use lambda_omega::{simulate, DisturbanceSpec, FieldState, Frame, Grid1D, SystemParams};

pub struct Run {
    pub states: Vec<FieldState>,
    pub polar: Vec<PolarField>,
}

impl Run {
    pub fn trace(&self, threshold: f64) -> FrontTrace {
        build_trace(&self.polar, threshold).unwrap()
    }

    pub fn speeds(&self, threshold: f64) -> (SpeedEstimate, SpeedEstimate) {
        let trace = self.trace(threshold);
        (
            estimate_speed(&trace, Side::Left, 0.5).unwrap(),
            estimate_speed(&trace, Side::Right, 0.5).unwrap(),
        )
    }

    pub fn last(&self) -> &PolarField {
        self.polar.last().unwrap()
    }
}

pub fn run_with(params: &SystemParams, grid: Grid1D, d: DisturbanceSpec, t_end: f64) -> Run {
    let states = simulate(params, grid, d, t_end, 0.5).unwrap();
    let polar = states.iter().map(|s| to_polar(s, DEFAULT_R_FLOOR)).collect();
    Run { states, polar }
}

/// Reduced-frame run with the default disturbance and h = 0.1.
pub fn reduced_run(gamma: f64, eps2: f64, x_min: f64, x_max: f64, t_end: f64) -> Run {
    let params = SystemParams::reduced(gamma, 1.0, eps2).unwrap();
    run_with(&params, grid(x_min, x_max), DisturbanceSpec::default(), t_end)
}

pub fn grid(x_min: f64, x_max: f64) -> Grid1D {
    let n = ((x_max - x_min) / 0.1).round() as usize + 1;
    Grid1D::new(x_min, x_max, n).unwrap()
}

pub fn original(p: f64, q: f64) -> SystemParams {
    SystemParams::new(1.0, 1.0, p, q, Frame::Original).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
