use alloc::string::String;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("lattice diverged at t={t} (dt={dt}); reduce dt or the coupling strengths")]
    Divergence { t: f64, dt: f64 },
    #[error("fixation set for {0} is empty")]
    EmptyFixations(String),
    #[error("shuffled AUC needs a non-empty pool of other images")]
    EmptyPool,
    #[error("could not place {placed} of {requested} items without overlap")]
    PlacementFailed { placed: usize, requested: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
