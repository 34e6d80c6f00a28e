use thiserror::Error;

/// Errors raised by grid construction, the scheme, quadrature and the studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field does not match grid: {0}")]
    Mismatch(String),

    #[error("input data error: {0}")]
    InputData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("flux splitting failed: {0}")]
    Splitting(String),

    #[error("numerical blow-up at cell {index:?} (t = {time})")]
    Blowup { index: Vec<usize>, time: f64 },

    #[error("implicit solve did not converge after {iterations} iterations; residual history {history:?}")]
    Integrator { iterations: usize, history: Vec<f64> },

    #[error("monitor {name} failed hard at t = {time}: value {value:e} exceeds bound {bound:e}")]
    MonitorFailure {
        name: String,
        time: f64,
        value: f64,
        bound: f64,
        snapshot: Box<crate::grid::Field>,
    },

    #[error("rate fit needs at least two usable points, got {0}")]
    Fit(usize),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
