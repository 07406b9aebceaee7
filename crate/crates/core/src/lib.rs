//! Front propagation in a λ-ω reaction-diffusion system with convection.
//!
//! The crate integrates
//!
//! ```text
//! u_t = ε₁ u_xx − a_u u_x + f(u, v)
//! v_t = ε₂ v_xx − a_v v_x + g(u, v)
//! ```
//!
//! with `f = −v + u(1 − u² − v²)`, `g = u + v(1 − u² − v²)`, tracks the two
//! fronts of the pattern that grows from a small disturbance of the origin,
//! and compares their speeds with closed-form estimates.

pub mod cli;
pub mod error;
pub mod front;
pub mod grid;
pub mod io;
pub mod kinetics;
pub mod params;
pub mod pde;
pub mod polar;
pub mod sweep;
pub mod theory;

pub use error::{Error, Result};
pub use front::{analyze, build_trace, detect_fronts, estimate_speed, AnalysisOptions, FrontTrace, Side, SpeedEstimate, SpeedReport};
pub use grid::Grid1D;
pub use kinetics::{integrate_ode, CartesianPoint, OdeTrajectory, PolarPoint};
pub use params::{Frame, SystemParams};
pub use pde::{simulate, simulate_from, DisturbanceSpec, FieldState, Species};
pub use polar::{from_polar, to_polar, PolarField};
pub use theory::{predict_all, Classification, Prediction, PredictionSet, Regime};
