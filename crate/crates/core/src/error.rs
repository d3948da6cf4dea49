use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point outside the field domain (|p| = {norm:.3e} > {radius:.3e})")]
    OutOfDomain { norm: f64, radius: f64 },
    #[error("|gamma| = {value:.3e} below threshold {min:.1e} at {at}")]
    GammaThreshold { value: f64, min: f64, at: String },
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("form precondition violated: {0}")]
    FormPrecondition(String),
    #[error("surface is not Lagrangian: closedness residual {residual:.3e} > {bound:.3e}")]
    NotLagrangian { residual: f64, bound: f64 },
    #[error("smallness precondition violated: {measured:.3e} > threshold {threshold:.3e}")]
    Smallness { measured: f64, threshold: f64 },
    #[error("contraction failure at iteration {iteration}: ratios {ratios:?}")]
    Contraction { iteration: usize, ratios: Vec<f64> },
    #[error("no convergence after {iterations} iterations (last increment {increment:.3e})")]
    MaxIterations { iterations: usize, increment: f64 },
    #[error("no intersection found: {0}")]
    NoIntersection(String),
    #[error("range violation: {0}")]
    Range(String),
    #[error("not graph-like: {0}")]
    NotGraphLike(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("dilation search failed after {halvings} halvings (last r = {r:.3e}, measured {measured:.3e} vs threshold {threshold:.3e})")]
    Dilation { halvings: usize, r: f64, measured: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
