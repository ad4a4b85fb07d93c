//! Hand-differentiated desk-scale models: a decomposition-based linear
//! forecaster, linear and MLP imputer backbones, and the Adam optimizer.
//! Every analytic gradient is validated against the finite-difference
//! oracle in `numerics`.

mod adam;
mod checkpoint;
mod dlinear;
mod imputer;

pub use adam::{AdamConfig, AdamState, ParamBlock};
pub use checkpoint::{
    forecaster_from_json, imputer_from_json, load_forecaster, load_imputer, save_forecaster,
    save_imputer, MAGIC,
};
pub use dlinear::{moving_average_decompose, DLinearForecaster};
pub use imputer::{Imputer, LinearImputer, MlpImputer};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },
    #[error("non-finite gradient in parameter block {0}")]
    NonFiniteGradient(String),
    #[error("checkpoint error at {path}: {message}")]
    Checkpoint { path: String, message: String },
}

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
pub(crate) fn init_weights(values: &mut [f64], fan_in: usize, rng: &mut crate::numerics::Rng) {
    let bound = 1.0 / (fan_in as f64).sqrt();
    for v in values {
        *v = (2.0 * rng.sample_uniform() - 1.0) * bound;
    }
}
