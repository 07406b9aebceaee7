//! Method-of-lines solver for the reaction–diffusion–convection system
//!
//! ```text
//! u_t = ε₁ u_xx − a_u u_x + f(u, v)
//! v_t = ε₂ v_xx − a_v v_x + g(u, v)
//! ```
//!
//! with `(a_u, a_v)` set by the coordinate frame (see [`Frame`](crate::params::Frame)). Space is
//! discretised by second-order central differences with zero-derivative
//! boundaries (ghost node mirrors its interior neighbour), time by classical RK4.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kinetics::{reaction_terms, CartesianPoint};
use crate::params::SystemParams;

/// Nodes on each side that are watched for boundary contamination.
pub const BOUNDARY_NODES: usize = 5;
/// Largest tolerated `|u|`, `|v|` near a boundary before the run stops
/// approximating an unbounded domain.
pub const BOUNDARY_LIMIT: f64 = 1e-3;

/// Safety factor applied to the step bounds in [`stable_dt`].
const DT_SAFETY: f64 = 0.4;
/// Step bound that resolves the O(1) reaction time scale.
const DT_REACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid1D,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, t: 0.0, u: vec![0.0; grid.n()], v: vec![0.0; grid.n()] }
    }

    pub fn new(grid: Grid1D, t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let state = Self { grid, t, u, v };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::InvalidConfig(format!(
                "field length mismatch: grid has {n} nodes, u has {}, v has {}",
                self.u.len(),
                self.v.len()
            )));
        }
        if let Some(i) = first_non_finite(&self.u, &self.v) {
            return Err(Error::InvalidConfig(format!("non-finite field value at node {i}")));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    UOnly,
    VOnly,
    #[default]
    Both,
}

/// Gaussian bump `amplitude · exp(−(x − center)² / (2 width²))` on the chosen species.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub center: f64,
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub species: Species,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self { center: 0.0, amplitude: 0.01, width: 1.0, species: Species::Both }
    }
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude != 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidDisturbance(format!(
                "amplitude must be non-zero and finite, got {}",
                self.amplitude
            )));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidDisturbance(format!("width must be positive, got {}", self.width)));
        }
        Ok(())
    }
}

pub fn build_initial_state(grid: Grid1D, d: DisturbanceSpec) -> Result<FieldState> {
    d.validate()?;
    if !grid.contains(d.center) {
        return Err(Error::InvalidDisturbance(format!(
            "center {} outside [{}, {}]",
            d.center,
            grid.x_min(),
            grid.x_max()
        )));
    }
    let mut state = FieldState::zeros(grid);
    let two_w2 = 2.0 * d.width * d.width;
    for i in 0..grid.n() {
        let dx = grid.x(i) - d.center;
        let bump = d.amplitude * (-dx * dx / two_w2).exp();
        if matches!(d.species, Species::UOnly | Species::Both) {
            state.u[i] = bump;
        }
        if matches!(d.species, Species::VOnly | Species::Both) {
            state.v[i] = bump;
        }
    }
    Ok(state)
}

/// Spatial discretisation plus kinetics, writing rates into `du`, `dv`.
fn rhs_into(grid: &Grid1D, params: &SystemParams, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]) {
    let n = grid.n();
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 0.5 / h;
    let (eps1, eps2) = (params.eps1(), params.eps2());
    let (au, av) = params.convection();

    let node = |i: usize, um: f64, up: f64, vm: f64, vp: f64| {
        let (f, g) = reaction_terms(CartesianPoint::new(u[i], v[i]));
        let lap_u = ((up + um) - 2.0 * u[i]) * inv_h2;
        let lap_v = ((vp + vm) - 2.0 * v[i]) * inv_h2;
        let grad_u = (up - um) * inv_2h;
        let grad_v = (vp - vm) * inv_2h;
        (eps1 * lap_u - au * grad_u + f, eps2 * lap_v - av * grad_v + g)
    };

    // Ghost nodes: w[-1] = w[1], w[n] = w[n-2].
    (du[0], dv[0]) = node(0, u[1], u[1], v[1], v[1]);
    for i in 1..n - 1 {
        (du[i], dv[i]) = node(i, u[i - 1], u[i + 1], v[i - 1], v[i + 1]);
    }
    (du[n - 1], dv[n - 1]) = node(n - 1, u[n - 2], u[n - 2], v[n - 2], v[n - 2]);
}

/// Time derivatives `(du/dt, dv/dt)` of every node.
pub fn rhs(state: &FieldState, params: &SystemParams) -> (Vec<f64>, Vec<f64>) {
    let n = state.grid.n();
    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    rhs_into(&state.grid, params, &state.u, &state.v, &mut du, &mut dv);
    (du, dv)
}

/// Forward-Euler update `y + dt·rhs(y)`: the building block of each RK stage.
pub fn euler_substep(state: &FieldState, params: &SystemParams, dt: f64) -> FieldState {
    let (du, dv) = rhs(state, params);
    let u = state.u.iter().zip(&du).map(|(y, k)| y + dt * k).collect();
    let v = state.v.iter().zip(&dv).map(|(y, k)| y + dt * k).collect();
    FieldState { grid: state.grid, t: state.t + dt, u, v }
}

/// Scratch buffers for repeated RK4 steps on one grid.
#[derive(Debug)]
pub struct Integrator {
    k: [Vec<f64>; 8],
    tmp_u: Vec<f64>,
    tmp_v: Vec<f64>,
}

impl Integrator {
    pub fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_u: vec![0.0; n],
            tmp_v: vec![0.0; n],
        }
    }

    /// Advances `state` in place by one RK4 step.
    pub fn advance(&mut self, state: &mut FieldState, params: &SystemParams, dt: f64) -> Result<()> {
        let grid = state.grid;
        let [k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v] = &mut self.k;
        let (tu, tv) = (&mut self.tmp_u, &mut self.tmp_v);
        let (u, v) = (&state.u, &state.v);

        rhs_into(&grid, params, u, v, k1u, k1v);
        stage(tu, tv, u, v, k1u, k1v, 0.5 * dt);
        rhs_into(&grid, params, tu, tv, k2u, k2v);
        stage(tu, tv, u, v, k2u, k2v, 0.5 * dt);
        rhs_into(&grid, params, tu, tv, k3u, k3v);
        stage(tu, tv, u, v, k3u, k3v, dt);
        rhs_into(&grid, params, tu, tv, k4u, k4v);

        let w = dt / 6.0;
        for i in 0..grid.n() {
            state.u[i] += w * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            state.v[i] += w * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        state.t += dt;

        if let Some(node) = first_non_finite(&state.u, &state.v) {
            return Err(Error::SolverDiverged { t: state.t, node });
        }
        Ok(())
    }
}

fn stage(tu: &mut [f64], tv: &mut [f64], u: &[f64], v: &[f64], ku: &[f64], kv: &[f64], c: f64) {
    for i in 0..u.len() {
        tu[i] = u[i] + c * ku[i];
        tv[i] = v[i] + c * kv[i];
    }
}

fn first_non_finite(u: &[f64], v: &[f64]) -> Option<usize> {
    u.iter().zip(v).position(|(a, b)| !(a.is_finite() && b.is_finite()))
}

/// One RK4 step; the input state is left untouched.
pub fn step(state: &FieldState, params: &SystemParams, dt: f64) -> Result<FieldState> {
    let mut next = state.clone();
    Integrator::new(state.grid.n()).advance(&mut next, params, dt)?;
    Ok(next)
}

/// Largest time step accepted by the explicit scheme:
/// `0.4 · min(h²/(2 max ε), h / max(|p|, |q|, |γ|), 0.1)`.
pub fn stable_dt(grid: &Grid1D, params: &SystemParams) -> f64 {
    let h = grid.h();
    let diffusive = h * h / (2.0 * params.eps1().max(params.eps2()));
    let advective = h / params.max_convection().max(1e-12);
    DT_SAFETY * diffusive.min(advective).min(DT_REACTION)
}

fn check_boundaries(state: &FieldState) -> Result<()> {
    let n = state.grid.n();
    let k = BOUNDARY_NODES.min(n);
    let worst = |range: std::ops::Range<usize>| {
        range.map(|i| state.u[i].abs().max(state.v[i].abs())).fold(0.0, f64::max)
    };
    for (side, value) in [("left", worst(0..k)), ("right", worst(n - k..n))] {
        if value > BOUNDARY_LIMIT {
            return Err(Error::BoundaryContaminated { t: state.t, side, value });
        }
    }
    Ok(())
}

/// Runs from a point disturbance; returns snapshots at `0, Δ, 2Δ, …` and at `t_end`.
pub fn simulate(
    params: &SystemParams,
    grid: Grid1D,
    d: DisturbanceSpec,
    t_end: f64,
    snapshot_every: f64,
) -> Result<Vec<FieldState>> {
    let initial = build_initial_state(grid, d)?;
    simulate_from(initial, params, t_end, snapshot_every)
}

/// As [`simulate`], starting from an arbitrary state (its `t` is taken as the start time).
pub fn simulate_from(
    initial: FieldState,
    params: &SystemParams,
    t_end: f64,
    snapshot_every: f64,
) -> Result<Vec<FieldState>> {
    params.validate()?;
    initial.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_end must be positive, got {t_end}")));
    }
    if !(snapshot_every > 0.0 && snapshot_every.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "snapshot_every must be positive, got {snapshot_every}"
        )));
    }

    let dt_max = stable_dt(&initial.grid, params);
    let t0 = initial.t;
    let t_stop = t0 + t_end;
    let segments = (t_end / snapshot_every - 1e-9).ceil().max(1.0) as usize;

    let mut integrator = Integrator::new(initial.grid.n());
    let mut state = initial;
    let mut snapshots = Vec::with_capacity(segments + 1);
    snapshots.push(state.clone());

    let mut seg_start = t0;
    for s in 1..=segments {
        let seg_end = if s == segments { t_stop } else { t0 + s as f64 * snapshot_every };
        let span = seg_end - seg_start;
        let steps = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            integrator.advance(&mut state, params, dt)?;
            check_boundaries(&state)?;
        }
        state.t = seg_end;
        snapshots.push(state.clone());
        seg_start = seg_end;
    }
    Ok(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Frame;

    fn grid5() -> Grid1D {
        Grid1D::new(0.0, 0.4, 5).unwrap()
    }

    fn params(gamma: f64, eps1: f64, eps2: f64) -> SystemParams {
        SystemParams::reduced(gamma, eps1, eps2).unwrap()
    }

    #[test]
    fn initial_state_peak_and_support() {
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let d = DisturbanceSpec { center: 0.0, amplitude: 0.5, width: g.h(), species: Species::UOnly };
        let s = build_initial_state(g, d).unwrap();
        let (imax, umax) = s
            .u
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert_eq!(imax, g.nearest(0.0));
        assert_eq!(umax, 0.5);
        assert!(s.v.iter().all(|&x| x == 0.0));
        assert_eq!(s.t, 0.0);
    }

    #[test]
    fn disturbance_validation() {
        let g = grid5();
        let zero = DisturbanceSpec { amplitude: 0.0, center: 0.2, ..Default::default() };
        assert!(matches!(build_initial_state(g, zero), Err(Error::InvalidDisturbance(_))));
        let outside = DisturbanceSpec { center: 3.0, ..Default::default() };
        assert!(matches!(build_initial_state(g, outside), Err(Error::InvalidDisturbance(_))));
        let narrow = DisturbanceSpec { center: 0.2, width: 0.0, ..Default::default() };
        assert!(build_initial_state(g, narrow).is_err());
    }

    #[test]
    fn zero_state_has_zero_rates() {
        let s = FieldState::zeros(grid5());
        let (du, dv) = rhs(&s, &params(3.0, 1.0, 2.0));
        assert!(du.iter().chain(&dv).all(|&x| x == 0.0));
        let next = step(&s, &params(3.0, 1.0, 2.0), 0.001).unwrap();
        assert!(next.u.iter().chain(&next.v).all(|&x| x == 0.0));
        assert_eq!(next.t, 0.001);
    }

    #[test]
    fn single_node_stencil() {
        let g = grid5();
        let h = g.h();
        let (a, eps1) = (0.3, 0.7);
        let mut s = FieldState::zeros(g);
        s.u[2] = a;
        let p = params(1.5, eps1, 1.1);
        let (du, dv) = rhs(&s, &p);
        let centre = eps1 * (-2.0 * a) / (h * h) + a * (1.0 - a * a);
        assert!((du[2] - centre).abs() < 1e-12 * centre.abs());
        assert!((du[1] - eps1 * a / (h * h)).abs() < 1e-12);
        assert!((du[3] - eps1 * a / (h * h)).abs() < 1e-12);
        assert_eq!(du[0], 0.0);
        assert_eq!(du[4], 0.0);
        // v only sees the reaction coupling g = u at the disturbed node.
        assert!((dv[2] - a).abs() < 1e-15);
        assert_eq!(dv[1], 0.0);
    }

    #[test]
    fn euler_substep_matches_hand_arithmetic() {
        let g = grid5();
        let h = g.h();
        let (a, eps1, dt) = (0.3, 0.7, 1e-3);
        let mut s = FieldState::zeros(g);
        s.u[2] = a;
        let next = euler_substep(&s, &params(1.5, eps1, 1.1), dt);
        let expect_centre = a + dt * (eps1 * (-2.0 * a) / (h * h) + a * (1.0 - a * a));
        let expect_side = dt * eps1 * a / (h * h);
        assert!((next.u[2] - expect_centre).abs() < 1e-14);
        assert!((next.u[1] - expect_side).abs() < 1e-14);
        assert!((next.v[2] - dt * a).abs() < 1e-16);
    }

    #[test]
    fn constant_state_feels_only_reaction() {
        let g = Grid1D::new(-1.0, 1.0, 9).unwrap();
        let (u0, v0) = (0.4, -0.2);
        let s = FieldState::new(g, 0.0, vec![u0; 9], vec![v0; 9]).unwrap();
        let p = SystemParams::new(0.5, 2.0, 1.0, -3.0, Frame::Original).unwrap();
        let (du, dv) = rhs(&s, &p);
        let (f, gr) = reaction_terms(CartesianPoint::new(u0, v0));
        for i in 0..9 {
            assert!((du[i] - f).abs() < 1e-13);
            assert!((dv[i] - gr).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_derivative_boundary_uses_mirror_ghost() {
        let g = grid5();
        let h = g.h();
        let mut s = FieldState::zeros(g);
        s.u[1] = 0.2;
        s.v[1] = 0.1;
        let p = params(2.0, 1.0, 1.0);
        let (du, dv) = rhs(&s, &p);
        // Ghost u[-1] = u[1]: lap at node 0 = 2 u[1] / h², no convection.
        assert!((du[0] - 2.0 * 0.2 / (h * h)).abs() < 1e-12);
        assert!((dv[0] - 2.0 * 0.1 / (h * h)).abs() < 1e-12);
    }

    #[test]
    fn stable_dt_examples() {
        let g = Grid1D::new(-100.0, 100.0, 2001).unwrap();
        let dt = stable_dt(&g, &params(0.0, 1.0, 1.0));
        assert!((dt - 0.002).abs() < 1e-15);

        let diffusive = |g: &Grid1D| g.h() * g.h() / 2.0;
        let fine = g.refined();
        assert!((diffusive(&g) / diffusive(&fine) - 4.0).abs() < 1e-9);
        assert!((stable_dt(&g, &params(0.0, 1.0, 1.0)) / stable_dt(&fine, &params(0.0, 1.0, 1.0)) - 4.0).abs() < 1e-9);

        let coarse = Grid1D::new(0.0, 10.0, 11).unwrap();
        let dt = stable_dt(&coarse, &params(5.0, 0.01, 0.01));
        assert!((dt - 0.04).abs() < 1e-15);
    }

    #[test]
    fn symmetric_disturbance_stays_symmetric() {
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        let s0 = build_initial_state(g, DisturbanceSpec { amplitude: 0.1, ..Default::default() }).unwrap();
        let p = params(0.0, 1.0, 2.0);
        let mut s = s0.clone();
        let mut integ = Integrator::new(g.n());
        for _ in 0..500 {
            integ.advance(&mut s, &p, stable_dt(&g, &p)).unwrap();
        }
        let n = g.n();
        for i in 0..n {
            assert!((s.u[i] - s.u[n - 1 - i]).abs() < 1e-10);
            assert!((s.v[i] - s.v[n - 1 - i]).abs() < 1e-10);
        }
        // input untouched by the functional form
        let _ = step(&s0, &p, 0.001).unwrap();
        assert_eq!(s0.t, 0.0);
    }

    #[test]
    fn step_reports_divergence() {
        let g = grid5();
        let mut s = FieldState::zeros(g);
        s.u[2] = 1e200;
        let err = step(&s, &params(0.0, 1.0, 1.0), 0.1).unwrap_err();
        assert!(matches!(err, Error::SolverDiverged { .. }));
    }

    #[test]
    fn snapshot_cadence_and_final_time() {
        let g = Grid1D::new(-20.0, 20.0, 201).unwrap();
        let snaps = simulate(&params(0.0, 1.0, 1.0), g, DisturbanceSpec::default(), 2.5, 1.0).unwrap();
        let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 2.5]);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let g = Grid1D::new(-20.0, 20.0, 201).unwrap();
        let snaps = simulate_from(FieldState::zeros(g), &params(1.0, 1.0, 1.0), 3.0, 1.0).unwrap();
        assert_eq!(snaps.len(), 4);
        assert!(snaps.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn boundary_contamination_detected() {
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let d = DisturbanceSpec { center: 9.0, amplitude: 0.1, ..Default::default() };
        let err = simulate(&params(0.0, 1.0, 1.0), g, d, 10.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::BoundaryContaminated { side: "right", .. }));
    }

    #[test]
    fn simulate_validates_inputs() {
        let g = grid5();
        let d = DisturbanceSpec { center: 0.2, ..Default::default() };
        assert!(simulate(&params(0.0, 1.0, 1.0), g, d, 0.0, 1.0).is_err());
        assert!(simulate(&params(0.0, 1.0, 1.0), g, d, 1.0, 0.0).is_err());
    }
}
