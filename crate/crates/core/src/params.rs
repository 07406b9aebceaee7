//! System coefficients and the three coordinate frames.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate frame in which the PDE is posed.
///
/// * `Original`: `u` convected at `p`, `v` at `q`.
/// * `Reduced`: moving with `u` (`x = ξ − pt`); only `v` is convected, at `γ = q − p`.
/// * `FlowCentred`: moving at `(p + q)/2`; `u` convected at `−γ̂`, `v` at `+γ̂`, `γ̂ = (q − p)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Original,
    #[default]
    Reduced,
    FlowCentred,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Original => "original",
            Frame::Reduced => "reduced",
            Frame::FlowCentred => "flow_centred",
        })
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Frame::Original),
            "reduced" => Ok(Frame::Reduced),
            "flow_centred" | "flow-centred" | "flow_centered" => Ok(Frame::FlowCentred),
            other => Err(Error::InvalidParams(format!("unknown frame '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    eps1: f64,
    eps2: f64,
    p: f64,
    q: f64,
    frame: Frame,
}

impl SystemParams {
    pub fn new(eps1: f64, eps2: f64, p: f64, q: f64, frame: Frame) -> Result<Self> {
        let params = Self { eps1, eps2, p, q, frame };
        params.validate()?;
        Ok(params)
    }

    /// Reduced-frame parameters with `p = 0`, `q = γ`.
    pub fn reduced(gamma: f64, eps1: f64, eps2: f64) -> Result<Self> {
        Self::new(eps1, eps2, 0.0, gamma, Frame::Reduced)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [("p", self.p), ("q", self.q)] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn with_frame(self, frame: Frame) -> Self {
        Self { frame, ..self }
    }

    /// γ = q − p
    pub fn gamma(&self) -> f64 {
        self.q - self.p
    }

    /// γ̄ = γ/√ε₁
    pub fn gamma_bar(&self) -> f64 {
        self.gamma() / self.eps1.sqrt()
    }

    /// ε̄ = ε₂/ε₁ − 1
    pub fn eps_bar(&self) -> f64 {
        self.eps2 / self.eps1 - 1.0
    }

    /// γ̂ = (q − p)/2
    pub fn gamma_hat(&self) -> f64 {
        0.5 * self.gamma()
    }

    /// Speed of `frame` relative to the original (lab) frame.
    pub fn frame_drift(&self, frame: Frame) -> f64 {
        match frame {
            Frame::Original => 0.0,
            Frame::Reduced => self.p,
            Frame::FlowCentred => 0.5 * (self.p + self.q),
        }
    }

    /// Convection velocities `(a_u, a_v)` in this frame: `w_t = ε w_xx − a w_x + ...`.
    pub fn convection(&self) -> (f64, f64) {
        match self.frame {
            Frame::Original => (self.p, self.q),
            Frame::Reduced => (0.0, self.gamma()),
            Frame::FlowCentred => (-self.gamma_hat(), self.gamma_hat()),
        }
    }

    /// Largest convection magnitude relevant for the advective step bound.
    pub fn max_convection(&self) -> f64 {
        self.p.abs().max(self.q.abs()).max(self.gamma().abs())
    }
}
