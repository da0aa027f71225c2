use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("velocity {v} outside the interval [{min}, {max}]")]
    Domain { v: f64, min: f64, max: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("lemma inapplicable: {0}")]
    LemmaInapplicable(String),

    #[error("time step {requested} violates the stability bound; required dt <= {required}")]
    Cfl { requested: f64, required: f64 },

    #[error("insufficient resolution: {usable} usable bands, need at least {needed}")]
    InsufficientResolution { usable: usize, needed: usize },

    #[error("no convergence after {iterations} iterations (last residual {last_residual:e})")]
    NoConvergence {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
