//! Physics-informed Gaussian process inference for thin-plate bending.
//!
//! A zero-mean GP prior with a squared-exponential ARD kernel is placed on
//! the plate deflection field; the linear operators of classical thin-plate
//! theory propagate that prior to rotations, curvatures, load, shear forces
//! and bending moments, producing a multi-output GP whose cross-covariances
//! are closed-form kernel derivatives. Flexural rigidity and per-quantity
//! noise variances enter the covariance as hyperparameters, learned from
//! heterogeneous noisy observations by marginal-likelihood maximization or
//! Metropolis-Hastings sampling; any quantity can then be predicted with
//! uncertainty at unobserved locations.
//!
//! All numerics are generic over the scalar type (see [`scalar::Scalar`]);
//! [`Real`] is the concrete alias used by the command-line tools.

pub mod data;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod oracles;
pub mod prediction;
pub mod scalar;

/// Default concrete scalar type.
pub type Real = f64;

pub use data::{Dataset, NoiseClass, Observation};
pub use error::{Error, Result};
pub use geometry::{PlateGeometry, Point};
pub use inference::{
    chain_diagnostics, derived_seed, mcmc_mean, mh_sample, mle_optimize, sample_log_target,
    ChainDiagnostics, Histogram, McmcConfig, McmcTrace, MleResult, MleSettings, ParamBounds,
};
pub use kernel::{
    base_kernel, gaussian_derivative_1d, mixed_partial, mixed_partial_param_gradient,
    DerivativeOrder, KernelParams, ParamGradient, PolyGaussian, MAX_DERIVATIVE_ORDER,
};
pub use model::{
    assemble_covariance, assemble_noise, factor_system, log_marginal_likelihood,
    log_marginal_likelihood_with_jitter, lml_gradient, ExtendedHyperparams, FactorizedSystem,
    JitterPolicy, NoiseModel,
};
pub use operators::{
    cross_covariance, cross_covariance_d_gradient, operator_for, DiffOperator, NuPoly,
    OperatorTerm, PlateConstants, QuantityKind,
};
pub use oracles::{
    navier_field, ritz_field, ritz_solve, LoadSpec, RitzSolution, SupportKind, TruthModel,
};
pub use prediction::{mc_predictive, predictive_posterior, PredictiveSummary, Target};
