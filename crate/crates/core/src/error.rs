//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by kernel evaluation, model assembly, inference and prediction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("derivative order {requested} exceeds the supported maximum {max} per axis")]
    DerivativeOrder { requested: usize, max: usize },

    #[error("location ({x}, {y}) lies outside the plate domain [0, {span_x}] x [0, {span_y}]")]
    OutOfDomain {
        x: f64,
        y: f64,
        span_x: f64,
        span_y: f64,
    },

    #[error("noiseless boundary observations are only valid for w, r_x, r_y; got {quantity}")]
    InvalidBoundaryQuantity { quantity: &'static str },

    #[error("no noise variance supplied for observed noisy quantity {quantity}")]
    MissingNoiseVariance { quantity: &'static str },

    #[error(
        "covariance factorization failed after jitter escalation to {jitter:e} \
         for hyperparameters {theta}"
    )]
    Factorization { jitter: f64, theta: String },

    #[error("dataset contains no observations")]
    EmptyDataset,

    #[error("trace contains no retained draws")]
    EmptyTrace,

    #[error("no proposal accepted within {window} consecutive steps; proposal scale too wide")]
    McmcStalled { window: usize },

    #[error("initial hyperparameters have non-finite log posterior")]
    NonFiniteStart,

    #[error("linear system is singular: {context}")]
    SingularSystem { context: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
