//! λ-ω reaction kinetics with λ(r) = 1 − r² and ω(r) = 1.
//!
//! In Cartesian form the rates are
//!
//! ```text
//! f(u, v) = −v + u(1 − u² − v²)
//! g(u, v) =  u + v(1 − u² − v²)
//! ```
//!
//! which in polar variables decouple into `ṙ = r(1 − r²)`, `θ̇ = 1`: the origin
//! is an unstable spiral and the unit circle a stable limit cycle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub u: f64,
    pub v: f64,
}

impl CartesianPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn radius(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Polar form with θ in (−π, π].
    pub fn to_polar(&self) -> PolarPoint {
        PolarPoint { r: self.radius(), theta: self.v.atan2(self.u) }
    }
}

/// Polar point; `theta` is not wrapped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn to_cartesian(&self) -> CartesianPoint {
        let (s, c) = self.theta.sin_cos();
        CartesianPoint { u: self.r * c, v: self.r * s }
    }
}

/// Reaction rates `(f, g)` at a point.
#[inline]
pub fn reaction_terms(p: CartesianPoint) -> (f64, f64) {
    let lambda = 1.0 - p.u * p.u - p.v * p.v;
    (-p.v + p.u * lambda, p.u + p.v * lambda)
}

/// Radial and angular rates of the polar reduction.
pub fn polar_rhs(p: PolarPoint) -> (f64, f64) {
    (p.r * (1.0 - p.r * p.r), 1.0)
}

/// Maps polar rates `(ṙ, θ̇)` at `p` back to Cartesian rates `(u̇, v̇)`.
pub fn polar_rates_to_cartesian(p: PolarPoint, dr_dt: f64, dtheta_dt: f64) -> (f64, f64) {
    let (s, c) = p.theta.sin_cos();
    (dr_dt * c - p.r * s * dtheta_dt, dr_dt * s + p.r * c * dtheta_dt)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<CartesianPoint>,
}

impl OdeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(CartesianPoint::radius).collect()
    }

    /// Phase along the trajectory, unwrapped in time. Undefined samples at the
    /// origin are reported as 0 and do not move the unwrap anchor.
    pub fn phases(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut prev: Option<f64> = None;
        for p in &self.points {
            if p.radius() == 0.0 {
                out.push(prev.unwrap_or(0.0));
                continue;
            }
            let raw = p.v.atan2(p.u);
            let theta = match prev {
                Some(last) => unwrap_near(raw, last),
                None => raw,
            };
            prev = Some(theta);
            out.push(theta);
        }
        out
    }

    pub fn last(&self) -> Option<(f64, CartesianPoint)> {
        Some((*self.times.last()?, *self.points.last()?))
    }
}

/// Shifts `raw` by a multiple of 2π so that it lies within π of `reference`.
pub(crate) fn unwrap_near(raw: f64, reference: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    raw + ((reference - raw) / tau).round() * tau
}

/// Classical RK4 on a two-component autonomous system.
pub(crate) fn rk4_step2(y: [f64; 2], dt: f64, f: impl Fn([f64; 2]) -> [f64; 2]) -> [f64; 2] {
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
    let k3 = f([y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
    let k4 = f([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Fixed-step RK4 integration of the well-mixed kinetics.
pub fn integrate_ode(start: CartesianPoint, dt: f64, t_end: f64) -> Result<OdeTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > dt && t_end.is_finite()) {
        return Err(Error::InvalidParams(format!("t_end must exceed dt, got {t_end}")));
    }
    if !(start.u.is_finite() && start.v.is_finite()) {
        return Err(Error::InvalidParams("start point must be finite".into()));
    }

    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(start);

    let rate = |y: [f64; 2]| {
        let (f, g) = reaction_terms(CartesianPoint::new(y[0], y[1]));
        [f, g]
    };
    let mut y = [start.u, start.v];
    for i in 1..=steps {
        y = rk4_step2(y, dt, rate);
        let t = i as f64 * dt;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::IntegrationDiverged { t });
        }
        times.push(t);
        points.push(CartesianPoint::new(y[0], y[1]));
    }
    Ok(OdeTrajectory { times, points })
}
