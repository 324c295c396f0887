use thiserror::Error;

/// Failures raised by the geometric kernels.
///
/// Numerical payloads are carried as `f64` so the error type does not depend on
/// the scalar parameter of the computation that produced it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("radial coordinate {r} outside model domain [0, {max}]")]
    Domain { r: f64, max: f64 },
    #[error("time {tau} outside flow range [{lo}, {hi}]")]
    TimeRange { tau: f64, lo: f64, hi: f64 },
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("metric degenerated during evolution at tau = {tau}")]
    Degeneration { tau: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    Stiffness { t: f64, h: f64 },
    #[error("finite-difference stencil needs {needed} samples, only {available} available")]
    Stencil { needed: usize, available: usize },
    #[error("curve left the flow domain at sigma = {sigma}")]
    Escape { sigma: f64 },
    #[error("no shooting bracket reaches target r = {target} at tau = {tau}")]
    UnreachedTarget { target: f64, tau: f64 },
    #[error("breather identity not certified: residual {residual:e} > tolerance {tolerance:e}")]
    Uncertified { residual: f64, tolerance: f64 },
    #[error("spliced flow horizon too short: need tau_max >= {needed}, have {available}")]
    Horizon { needed: f64, available: f64 },
    #[error("quadrature truncation: {0}")]
    Truncation(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
