use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical instability at step {step} (t = {time})")]
    NumericalInstability { step: usize, time: f64 },
    #[error("relative mass drift {drift:e} exceeds tolerance {tol:e} at t = {time}")]
    MassDrift { drift: f64, tol: f64, time: f64 },
    #[error("caustic flag raised at t = {time}: max |D²φ| = {hessian:e}")]
    Caustic { time: f64, hessian: f64 },
    #[error("symmetrizer lost positivity: min f' = {min_fprime:e}")]
    Symmetrizer { min_fprime: f64 },
    #[error("velocity is not curl-free: curl norm {curl:e} > {tol:e}")]
    Curl { curl: f64, tol: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trajectory time grid does not match the requested step")]
    TrajectoryMismatch,
    #[error("field mass outside the mapped box is {fraction:e} of the total")]
    BoundaryMass { fraction: f64 },
    #[error("resampling would alias: relative spectral tail {tail:e}")]
    Resampling { tail: f64 },
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
