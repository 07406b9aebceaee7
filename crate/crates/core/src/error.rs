use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ODE integration diverged at t = {t}")]
    IntegrationDiverged { t: f64 },

    #[error("solver diverged at t = {t}, node {node}")]
    SolverDiverged { t: f64, node: usize },

    #[error("boundary contaminated at t = {t} near the {side} boundary (|value| = {value:e})")]
    BoundaryContaminated { t: f64, side: &'static str, value: f64 },

    #[error("travelling-wave profile diverged at z = {z}")]
    ProfileDiverged { z: f64 },

    #[error("no front: r never exceeds threshold {threshold}")]
    NoFront { threshold: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid inset: {0}")]
    InvalidInset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 validation, 3 numerical failure, 4 insufficient data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::InvalidGrid(_)
            | Error::InvalidDisturbance(_)
            | Error::InvalidConfig(_)
            | Error::InvalidInset(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Io { .. } => 2,
            Error::IntegrationDiverged { .. }
            | Error::SolverDiverged { .. }
            | Error::BoundaryContaminated { .. }
            | Error::ProfileDiverged { .. } => 3,
            Error::NoFront { .. } | Error::InsufficientData(_) => 4,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidDisturbance(_) => "invalid_disturbance",
            Error::InvalidConfig(_) => "invalid_config",
            Error::IntegrationDiverged { .. } => "integration_diverged",
            Error::SolverDiverged { .. } => "solver_diverged",
            Error::BoundaryContaminated { .. } => "boundary_contaminated",
            Error::ProfileDiverged { .. } => "profile_diverged",
            Error::NoFront { .. } => "no_front",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InvalidInset(_) => "invalid_inset",
            Error::Io { .. } => "io",
            Error::Json(_) => "parse_error",
            Error::Csv(_) => "csv_error",
        }
    }
}
