use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("constraint has no periodic solution: |mean| = {mean:e} exceeds {tolerance:e}")]
    UnsolvableConstraint { mean: f64, tolerance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input is not resolved on this grid: {0}")]
    Unresolved(String),
    #[error("gauge function is not holomorphic: max |dbar f| = {0:e}")]
    NotHolomorphic(f64),
    #[error("one-forms are not closed: max residual {0:e}")]
    NotClosed(f64),
    #[error("degenerate immersion: {0}")]
    Degenerate(String),
    #[error("invalid reduction: {0}")]
    InvalidReduction(String),
    #[error("auxiliary fields missing: {0}")]
    MissingAux(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("evolution blew up at t = {t}: max |field| = {max:e}")]
    BlowUp { t: f64, max: f64 },
    #[error("evolution diverged at step {step} (t = {t}): max |field| = {max:e}")]
    Diverged { step: usize, t: f64, max: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
