//! Closed-form front-speed estimates.
//!
//! Every estimate is first formed in the reduced frame (moving with `u`) and then
//! shifted into the frame carried by the [`SystemParams`], so predictions in
//! different frames differ exactly by the frame drift.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::rk4_step2;
use crate::params::{Frame, SystemParams};

/// Which estimate produced a [`Prediction`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimate {
    Simple,
    SmallParam,
    LargeParam,
    General { theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallParam,
    LargeParam,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SmallParam => "small_param",
            Regime::LargeParam => "large_param",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub left_speed: f64,
    pub right_speed: f64,
    pub estimate: Estimate,
    pub frame: Frame,
}

impl Prediction {
    /// Re-expresses the speeds in another frame of the same system.
    pub fn in_frame(&self, params: &SystemParams, frame: Frame) -> Prediction {
        let shift = params.frame_drift(self.frame) - params.frame_drift(frame);
        Prediction {
            left_speed: self.left_speed + shift,
            right_speed: self.right_speed + shift,
            frame,
            ..*self
        }
    }
}

fn from_reduced(params: &SystemParams, left: f64, right: f64, estimate: Estimate) -> Prediction {
    Prediction { left_speed: left, right_speed: right, estimate, frame: Frame::Reduced }
        .in_frame(params, params.frame())
}

/// Simple estimate: `±2√ε₁` about the `u` frame (`p ± 2√ε₁` in the original frame).
pub fn simple_speed(params: &SystemParams) -> Prediction {
    let c = 2.0 * params.eps1().sqrt();
    from_reduced(params, -c, c, Estimate::Simple)
}

/// Angle-dependent estimate `γ sin²θ ± 2√(ε₁cos²θ + ε₂sin²θ)`.
pub fn general_speed(theta: f64, params: &SystemParams) -> Prediction {
    let s2 = theta.sin().powi(2);
    let c2 = theta.cos().powi(2);
    let drift = params.gamma() * s2;
    let spread = 2.0 * (params.eps1() * c2 + params.eps2() * s2).sqrt();
    from_reduced(params, drift - spread, drift + spread, Estimate::General { theta })
}

/// Small-parameter estimate with `sin²θ` replaced by its mean: `γ/2 ± √2·√(ε₁ + ε₂)`.
pub fn small_param_speed(params: &SystemParams) -> Prediction {
    let drift = 0.5 * params.gamma();
    let spread = std::f64::consts::SQRT_2 * (params.eps1() + params.eps2()).sqrt();
    from_reduced(params, drift - spread, drift + spread, Estimate::SmallParam)
}

/// Large-parameter estimate: each front takes the extreme of its admissible
/// range. With `q > p` the left front is carried by `u` and the right by `v`;
/// with `p > q` the roles reverse.
pub fn large_param_speed(params: &SystemParams) -> Prediction {
    let gamma = params.gamma();
    let (s1, s2) = (2.0 * params.eps1().sqrt(), 2.0 * params.eps2().sqrt());
    let (left, right) = if gamma >= 0.0 { (-s1, gamma + s2) } else { (gamma - s2, s1) };
    from_reduced(params, left, right, Estimate::LargeParam)
}

/// Large-parameter behaviour once `|γ̄| = |γ|/√ε₁ > 2`; the boundary belongs to
/// the small regime.
pub fn regime(params: &SystemParams) -> Regime {
    if params.gamma_bar().abs() > 2.0 {
        Regime::LargeParam
    } else {
        Regime::SmallParam
    }
}

/// Estimate selected by [`regime`].
pub fn regime_speed(params: &SystemParams) -> Prediction {
    match regime(params) {
        Regime::SmallParam => small_param_speed(params),
        Regime::LargeParam => large_param_speed(params),
    }
}

/// Speeds in the frame moving at `(p + q)/2`.
pub fn flow_centred_speeds(params: &SystemParams) -> Prediction {
    let (s1, s2) = (2.0 * params.eps1().sqrt(), 2.0 * params.eps2().sqrt());
    let (left, right, estimate) = match regime(params) {
        Regime::SmallParam => {
            let c = std::f64::consts::SQRT_2 * (params.eps1() + params.eps2()).sqrt();
            (-c, c, Estimate::SmallParam)
        }
        Regime::LargeParam => {
            if params.q() > params.p() {
                let g = params.gamma_hat();
                (-(g + s1), g + s2, Estimate::LargeParam)
            } else {
                let g = 0.5 * (params.p() - params.q());
                (-(g + s2), g + s1, Estimate::LargeParam)
            }
        }
    };
    Prediction { left_speed: left, right_speed: right, estimate, frame: Frame::FlowCentred }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Absolute,
    Convective,
    /// A speed lies within the zero tolerance; the sign test does not apply.
    Indeterminate,
}

/// Absolute instability when the fronts move in opposite directions.
pub fn classify_instability(left: f64, right: f64, zero_tol: f64) -> Classification {
    if left.abs() <= zero_tol || right.abs() <= zero_tol || !left.is_finite() || !right.is_finite() {
        Classification::Indeterminate
    } else if left.signum() != right.signum() {
        Classification::Absolute
    } else {
        Classification::Convective
    }
}

/// Outcome of one convective-instability inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `lhs` and `rhs` agree to rounding: the strict inequality is undecided.
    pub borderline: bool,
}

impl Condition {
    fn greater(lhs: f64, rhs: f64) -> Self {
        let borderline = (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
        Self { lhs, rhs, holds: lhs > rhs && !borderline, borderline }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Absolute,
    Convective,
    Borderline,
}

impl Verdict {
    fn from_condition(c: &Condition) -> Self {
        if c.borderline {
            Verdict::Borderline
        } else if c.holds {
            Verdict::Convective
        } else {
            Verdict::Absolute
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvectiveReport {
    pub regime: Regime,
    /// `γ² > 8(ε₁ + ε₂)`: small regime, reduced frame.
    pub small_reduced: Condition,
    /// `(p + q)² > 8(ε₁ + ε₂)`: small regime, original frame.
    pub small_original: Condition,
    /// `q > p > 2√ε₁` or `p > q > 2√ε₂`: large regime, original frame.
    /// Encoded as `lhs = min(margins)`, `rhs = 0` for the branch that applies.
    pub large_original: Condition,
    pub reduced: Verdict,
    pub original: Verdict,
}

pub fn convective_conditions(params: &SystemParams) -> ConvectiveReport {
    let (e1, e2, p, q) = (params.eps1(), params.eps2(), params.p(), params.q());
    let diffusive = 8.0 * (e1 + e2);
    let small_reduced = Condition::greater(params.gamma().powi(2), diffusive);
    let small_original = Condition::greater((p + q).powi(2), diffusive);

    // q > p > 2√ε₁ ⇔ min(q − p, p − 2√ε₁) > 0, and symmetrically.
    let margin = if q >= p {
        (q - p).min(p - 2.0 * e1.sqrt())
    } else {
        (p - q).min(q - 2.0 * e2.sqrt())
    };
    let large_original = Condition::greater(margin, 0.0);

    let regime = regime(params);
    let (reduced, original) = match regime {
        Regime::SmallParam => (Verdict::from_condition(&small_reduced), Verdict::from_condition(&small_original)),
        // large-parameter speeds in the reduced frame always straddle zero
        Regime::LargeParam => (Verdict::Absolute, Verdict::from_condition(&large_original)),
    };
    ConvectiveReport { regime, small_reduced, small_original, large_original, reduced, original }
}

/// γ at which the small- and large-parameter right-speed estimates coincide,
/// on the `γ ≥ 0` branch: `γ/2 + √2√(ε₁+ε₂) = γ + 2√ε₂`.
pub fn right_estimate_intersection(eps1: f64, eps2: f64) -> f64 {
    2.0 * (std::f64::consts::SQRT_2 * (eps1 + eps2).sqrt() - 2.0 * eps2.sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictionSet {
    pub simple: Prediction,
    pub small_param: Prediction,
    pub large_param: Prediction,
    pub flow_centred: Prediction,
    pub regime: Regime,
    pub selected: Prediction,
    /// Sign test on the selected estimate in the reduced frame.
    pub classification: Classification,
    pub convective: ConvectiveReport,
    pub gamma: f64,
    pub gamma_bar: f64,
    pub eps_bar: f64,
    pub gamma_hat: f64,
}

pub fn predict_all(params: &SystemParams, zero_tol: f64) -> PredictionSet {
    let selected = regime_speed(params);
    let reduced = selected.in_frame(params, Frame::Reduced);
    PredictionSet {
        simple: simple_speed(params),
        small_param: small_param_speed(params),
        large_param: large_param_speed(params),
        flow_centred: flow_centred_speeds(params),
        regime: regime(params),
        selected,
        classification: classify_instability(reduced.left_speed, reduced.right_speed, zero_tol),
        convective: convective_conditions(params),
        gamma: params.gamma(),
        gamma_bar: params.gamma_bar(),
        eps_bar: params.eps_bar(),
        gamma_hat: params.gamma_hat(),
    }
}

/// Solution of `R'' + cR' + R(1 − R²) = 0` leaving the saddle `R = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveProfile {
    pub z: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub c: f64,
    /// `R > 0` at every sample.
    pub positive: bool,
}

impl WaveProfile {
    pub fn min_amplitude(&self) -> f64 {
        self.amplitude.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const PROFILE_DZ: f64 = 0.01;
const PROFILE_KICK: f64 = 1e-6;
const PROFILE_BLOWUP: f64 = 1e3;

/// Integrates the travelling-wave ODE from `R = 1`, displaced by 1e−6 along the
/// saddle's unstable eigenvector (eigenvalue `(−c + √(c² + 8))/2`) towards `R < 1`.
pub fn travelling_wave_profile(c: f64, z_max: f64) -> Result<WaveProfile> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidParams(format!("wave speed must be non-zero, got {c}")));
    }
    if !(z_max > 0.0 && z_max.is_finite()) {
        return Err(Error::InvalidParams(format!("z_max must be positive, got {z_max}")));
    }
    let unstable = 0.5 * (-c + (c * c + 8.0).sqrt());
    let mut y = [1.0 - PROFILE_KICK, -PROFILE_KICK * unstable];
    let rate = |y: [f64; 2]| [y[1], -c * y[1] - y[0] * (1.0 - y[0] * y[0])];

    let steps = (z_max / PROFILE_DZ).ceil() as usize;
    let mut z = Vec::with_capacity(steps + 1);
    let mut amplitude = Vec::with_capacity(steps + 1);
    z.push(0.0);
    amplitude.push(y[0]);
    for i in 1..=steps {
        y = rk4_step2(y, PROFILE_DZ, rate);
        let zi = i as f64 * PROFILE_DZ;
        if !(y[0].is_finite() && y[1].is_finite()) || y[0].abs().max(y[1].abs()) > PROFILE_BLOWUP {
            return Err(Error::ProfileDiverged { z: zi });
        }
        z.push(zi);
        amplitude.push(y[0]);
    }
    let positive = amplitude.iter().all(|&r| r > 0.0);
    Ok(WaveProfile { z, amplitude, c, positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn pair(p: Prediction) -> (f64, f64) {
        (p.left_speed, p.right_speed)
    }

    fn reduced(gamma: f64, e1: f64, e2: f64) -> SystemParams {
        SystemParams::reduced(gamma, e1, e2).unwrap()
    }

    fn original(p: f64, q: f64, e1: f64, e2: f64) -> SystemParams {
        SystemParams::new(e1, e2, p, q, Frame::Original).unwrap()
    }

    #[test]
    fn simple_speed_examples() {
        assert_eq!(pair(simple_speed(&original(0.0, 0.0, 1.0, 1.0))), (-2.0, 2.0));
        assert_eq!(pair(simple_speed(&original(1.0, 1.0, 4.0, 1.0))), (-3.0, 5.0));
        assert_eq!(pair(simple_speed(&original(5.0, 5.0, 1.0, 1.0))), (3.0, 7.0));
        assert_eq!(pair(simple_speed(&reduced(3.0, 4.0, 1.0))), (-4.0, 4.0));
    }

    #[test]
    fn general_speed_examples() {
        let p = reduced(1.7, 1.0, 3.0);
        let (l, r) = pair(general_speed(0.0, &p));
        assert!(close(l, -2.0) && close(r, 2.0));

        let (l, r) = pair(general_speed(FRAC_PI_2, &reduced(5.0, 1.0, 1.0)));
        assert!(close(l, 3.0) && close(r, 7.0));

        let (l, r) = pair(general_speed(FRAC_PI_4, &reduced(1.0, 1.0, 1.0)));
        assert!(close(l, -1.5) && close(r, 2.5));
    }

    #[test]
    fn general_speed_original_frame_weights_convection() {
        let p = original(1.0, 4.0, 1.0, 2.0);
        let theta = 0.6f64;
        let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
        let spread = 2.0 * (c2 + 2.0 * s2).sqrt();
        let (l, r) = pair(general_speed(theta, &p));
        assert!(close(l, c2 + 4.0 * s2 - spread));
        assert!(close(r, c2 + 4.0 * s2 + spread));
    }

    #[test]
    fn small_param_examples() {
        assert!(close(small_param_speed(&reduced(0.0, 1.0, 1.0)).right_speed, 2.0));
        let (l, r) = pair(small_param_speed(&reduced(1.0, 1.0, 1.0)));
        assert!(close(l, -1.5) && close(r, 2.5));
        let (l, r) = pair(small_param_speed(&reduced(2.0, 1.0, 1.0)));
        assert!(close(l, -1.0) && close(r, 3.0));
        // original frame centres on (p + q)/2
        let (l, r) = pair(small_param_speed(&original(1.0, 3.0, 1.0, 1.0)));
        assert!(close(l, 0.0) && close(r, 4.0));
    }

    #[test]
    fn large_param_examples() {
        assert_eq!(pair(large_param_speed(&reduced(5.0, 1.0, 1.0))), (-2.0, 7.0));
        assert_eq!(pair(large_param_speed(&original(0.0, 5.0, 1.0, 1.0))), (-2.0, 7.0));
        assert_eq!(pair(large_param_speed(&original(5.0, 0.0, 1.0, 1.0))), (-2.0, 7.0));
        // reversal uses the other diffusion coefficients
        assert_eq!(pair(large_param_speed(&original(6.0, 1.0, 4.0, 9.0))), (1.0 - 6.0, 6.0 + 4.0));
    }

    #[test]
    fn regime_boundary() {
        assert_eq!(regime(&reduced(1.0, 1.0, 1.0)), Regime::SmallParam);
        assert_eq!(regime(&reduced(5.0, 1.0, 1.0)), Regime::LargeParam);
        assert_eq!(regime(&reduced(2.0, 1.0, 1.0)), Regime::SmallParam);
        assert_eq!(regime(&reduced(-5.0, 1.0, 1.0)), Regime::LargeParam);
        assert_eq!(regime(&reduced(3.0, 4.0, 1.0)), Regime::SmallParam);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_instability(-2.0, 7.0, 1e-9), Classification::Absolute);
        assert_eq!(classify_instability(1.0, 3.0, 1e-9), Classification::Convective);
        assert_eq!(classify_instability(-3.0, -1.0, 1e-9), Classification::Convective);
        assert_eq!(classify_instability(-1e-12, 3.0, 1e-9), Classification::Indeterminate);
    }

    #[test]
    fn convective_condition_examples() {
        let r = convective_conditions(&reduced(0.0, 1.0, 1.0));
        assert!(!r.small_reduced.holds && !r.small_reduced.borderline);
        assert_eq!(r.reduced, Verdict::Absolute);

        // large regime in the original frame: 5 > 3 > 2
        let r = convective_conditions(&original(3.0, 5.0, 1.0, 1.0));
        assert!(r.large_original.holds);
        // γ = 2 stays in the small regime, where (p + q)² = 64 > 16 also holds
        assert_eq!(r.regime, Regime::SmallParam);
        assert_eq!(r.original, Verdict::Convective);

        let r = convective_conditions(&original(2.0, 2.0, 1.0, 1.0));
        assert!(r.small_original.borderline);
        assert!(!r.small_original.holds);
        assert_eq!(r.original, Verdict::Borderline);

        let r = convective_conditions(&original(3.0, 8.0, 1.0, 1.0));
        assert_eq!(r.regime, Regime::LargeParam);
        assert_eq!(r.reduced, Verdict::Absolute);
        assert_eq!(r.original, Verdict::Convective);

        let r = convective_conditions(&original(1.0, 8.0, 1.0, 1.0));
        assert_eq!(r.original, Verdict::Absolute);
    }

    #[test]
    fn flow_centred_examples() {
        let (l, r) = pair(flow_centred_speeds(&reduced(0.0, 1.0, 1.0)));
        assert!(close(l, -2.0) && close(r, 2.0));
        let p = original(0.0, 5.0, 1.0, 1.0);
        assert_eq!(p.gamma_hat(), 2.5);
        assert_eq!(pair(flow_centred_speeds(&p)), (-4.5, 4.5));
        let p = original(7.0, 1.0, 4.0, 1.0);
        // γ̃ = 3: (−(3 + 2√ε₂), 3 + 2√ε₁)
        assert_eq!(pair(flow_centred_speeds(&p)), (-5.0, 7.0));
    }

    #[test]
    fn flow_centred_plus_drift_is_original() {
        for (p, q) in [(0.0, 5.0), (7.0, 1.0), (1.0, 2.0), (-3.0, 4.0)] {
            let params = original(p, q, 1.5, 0.7);
            let flow = flow_centred_speeds(&params);
            let lab = regime_speed(&params);
            let drift = 0.5 * (p + q);
            assert!(close(flow.left_speed + drift, lab.left_speed));
            assert!(close(flow.right_speed + drift, lab.right_speed));
        }
    }

    #[test]
    fn frame_covariance() {
        let base = original(1.3, 4.1, 0.8, 2.2);
        for make in [simple_speed, small_param_speed, large_param_speed] {
            let lab = make(&base);
            let red = make(&base.with_frame(Frame::Reduced));
            let flow = make(&base.with_frame(Frame::FlowCentred));
            assert!(close(red.left_speed + base.p(), lab.left_speed));
            assert!(close(flow.right_speed + 0.5 * (base.p() + base.q()), lab.right_speed));
            assert_eq!(red.in_frame(&base, Frame::Original).right_speed, lab.right_speed);
        }
    }

    #[test]
    fn endpoint_identity() {
        let p = reduced(3.2, 1.3, 0.6);
        let lo = general_speed(0.0, &p);
        let hi = general_speed(FRAC_PI_2, &p);
        let large = large_param_speed(&p);
        assert!(close(lo.left_speed, large.left_speed));
        assert!(close(hi.right_speed, large.right_speed));
    }

    #[test]
    fn angle_average_matches_small_estimate_for_equal_diffusion() {
        // midpoint rule over a full period is spectrally accurate for trig polynomials
        let quad = |p: &SystemParams| {
            let m = 4000;
            let (mut l, mut r) = (0.0, 0.0);
            for k in 0..m {
                let th = (k as f64 + 0.5) * PI / m as f64;
                let g = general_speed(th, p);
                l += g.left_speed;
                r += g.right_speed;
            }
            (l / m as f64, r / m as f64)
        };
        let p = reduced(1.4, 2.0, 2.0);
        let (l, r) = quad(&p);
        let s = small_param_speed(&p);
        assert!((l - s.left_speed).abs() < 1e-9);
        assert!((r - s.right_speed).abs() < 1e-9);

        // unequal diffusion: substituting before the square root is not the average
        let p = reduced(1.4, 1.0, 4.0);
        let (_, r) = quad(&p);
        let gap = (r - small_param_speed(&p).right_speed).abs();
        assert!(gap > 1e-3, "gap {gap}");
    }

    #[test]
    fn intersection_against_bisection() {
        for eps in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let p = |g: f64| reduced(g, 1.0, eps);
            let diff = |g: f64| small_param_speed(&p(g)).right_speed - large_param_speed(&p(g)).right_speed;
            let formula = right_estimate_intersection(1.0, eps);
            if diff(0.0) <= 1e-12 {
                // the estimates do not cross on γ > 0
                assert!(formula <= 1e-9);
                continue;
            }
            let (mut a, mut b) = (0.0, 20.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if diff(a) * diff(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            assert!((0.5 * (a + b) - formula).abs() < 1e-9);
        }
        assert!(close(right_estimate_intersection(1.0, 1.0), 0.0));
    }

    #[test]
    fn left_never_exceeds_right() {
        for g in [0.0, 0.5, 2.0, 5.0] {
            for e2 in [0.1, 1.0, 5.0] {
                let p = reduced(g, 1.0, e2);
                for pr in [simple_speed(&p), small_param_speed(&p), large_param_speed(&p), general_speed(1.1, &p)] {
                    assert!(pr.left_speed <= pr.right_speed);
                }
            }
        }
    }

    #[test]
    fn profile_dichotomy() {
        let fisher = travelling_wave_profile(2.0, 60.0).unwrap();
        assert!(fisher.positive);
        assert!(*fisher.amplitude.last().unwrap() < 1e-3);
        assert!(fisher.amplitude.windows(2).all(|w| w[1] <= w[0]));
        assert!(travelling_wave_profile(3.0, 60.0).unwrap().positive);
        assert!(!travelling_wave_profile(1.0, 60.0).unwrap().positive);
    }

    #[test]
    fn profile_rejects_zero_speed() {
        assert!(travelling_wave_profile(0.0, 10.0).is_err());
        assert!(travelling_wave_profile(2.0, -1.0).is_err());
    }

    #[test]
    fn prediction_set_is_consistent() {
        let s = predict_all(&reduced(5.0, 1.0, 1.0), 1e-9);
        assert_eq!(s.regime, Regime::LargeParam);
        assert_eq!((s.selected.left_speed, s.selected.right_speed), (-2.0, 7.0));
        assert_eq!(s.classification, Classification::Absolute);
    }
}
