//! Pointwise polar form `(r, θ)` of a field snapshot with θ unwrapped along x.

use serde::{Deserialize, Serialize};

use crate::grid::Grid1D;
use crate::kinetics::unwrap_near;
use crate::pde::FieldState;

pub const DEFAULT_R_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarField {
    pub grid: Grid1D,
    pub t: f64,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_valid: Vec<bool>,
}

impl PolarField {
    /// θ mod π at node `i`, in `[0, π)`.
    pub fn theta_mod_pi(&self, i: usize) -> f64 {
        mod_pi(self.theta[i])
    }

    pub fn max_r(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }
}

/// Reduces an angle into `[0, π)`.
pub fn mod_pi(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let m = theta.rem_euclid(pi);
    if m >= pi {
        0.0
    } else {
        m
    }
}

/// Distance between two angles on the circle of period π.
pub fn axial_distance(a: f64, b: f64) -> f64 {
    let d = mod_pi(a - b);
    d.min(std::f64::consts::PI - d)
}

/// Converts a snapshot to polar form.
///
/// Nodes with `r < r_floor` get `theta_valid = false`; their θ is the raw
/// two-argument arctangent and they never serve as unwrap anchors. Each run of
/// valid nodes is unwrapped left to right starting from its own first node.
pub fn to_polar(state: &FieldState, r_floor: f64) -> PolarField {
    let n = state.grid.n();
    let mut r = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut theta_valid = Vec::with_capacity(n);

    let mut anchor: Option<f64> = None;
    for (&u, &v) in state.u.iter().zip(&state.v) {
        let radius = u.hypot(v);
        let raw = v.atan2(u);
        r.push(radius);
        if radius >= r_floor {
            let th = anchor.map_or(raw, |prev| unwrap_near(raw, prev));
            anchor = Some(th);
            theta.push(th);
            theta_valid.push(true);
        } else {
            anchor = None;
            theta.push(raw);
            theta_valid.push(false);
        }
    }
    PolarField { grid: state.grid, t: state.t, r, theta, theta_valid }
}

pub fn from_polar(pf: &PolarField) -> FieldState {
    let (u, v) = pf
        .r
        .iter()
        .zip(&pf.theta)
        .map(|(&r, &th)| {
            let (s, c) = th.sin_cos();
            (r * c, r * s)
        })
        .unzip();
    FieldState { grid: pf.grid, t: pf.t, u, v }
}
