use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite: pivot {pivot} at index {index}")]
    NotSpd { index: usize, pivot: f64 },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("complementarity failure: gap residual {gap:e}, multiplier {lambda:e}")]
    Complementarity { gap: f64, lambda: f64 },

    #[error("no consistent sign branch for the contact nonlinearity at t = {t}")]
    DegenerateBranch { t: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
