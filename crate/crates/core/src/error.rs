use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Chart;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid {chart} point: constraint residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    InvalidPoint {
        chart: Chart,
        residual: f64,
        tol: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("coefficient model produced a non-finite value at t = {t}")]
    ModelEvaluation { t: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hyperboloid chart is singular at tau = {tau:.3e} (< {tau_min:.1e}); integrate in the disk chart instead")]
    SingularChart { tau: f64, tau_min: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        last_state: Vec<f64>,
    },

    #[error("Riccati solution blows up at t = {time:.12}")]
    Singularity { time: f64 },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("grid coverage insufficient: {0}")]
    Coverage(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error(
        "closed form disagrees with the linear system at t = {t}: residual {residual:.3e} \
         (analytic Q = {analytic_q}, numeric Q = {numeric_q})"
    )]
    OracleMismatch {
        t: f64,
        residual: f64,
        analytic_q: Complex64,
        numeric_q: Complex64,
    },

    #[error("cannot convert a {from} trajectory to {to}")]
    UnsupportedConversion { from: Chart, to: Chart },

    #[error("malformed trajectory file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
