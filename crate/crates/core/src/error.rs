use thiserror::Error;

use crate::params::Regime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lambda = 0 reduces the equation of motion to second order")]
    ZeroLambda,
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("operation requires the {expected} regime, parameters are in the {found:?} regime")]
    RegimeMismatch { expected: &'static str, found: Regime },
    #[error("the normal-mode transformation is singular at equal frequencies")]
    SingularTransformation,
    #[error("radial momentum k must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("quadrature order {0} outside the supported range 2..=512")]
    QuadratureOrder(usize),
    #[error("quadrature did not converge with {nodes} nodes (relative change {change:.3e})")]
    QuadratureNonConvergence { nodes: usize, change: f64 },
    #[error("{what} = {value} exceeds the supported maximum {max}")]
    OutOfRange { what: &'static str, value: f64, max: f64 },
    #[error("floating-point overflow in {0}; use the log-scaled evaluation")]
    Overflow(&'static str),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
