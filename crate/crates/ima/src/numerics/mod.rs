//! Deterministic randomness, distribution samplers, dense tensor
//! primitives, and a finite-difference gradient oracle.

mod gradcheck;
mod rng;
mod tensor;

pub use gradcheck::finite_diff_grad;
pub use rng::Rng;
pub use tensor::{Matrix, Tensor3};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite evaluation: {0}")]
    NonFinite(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },
}
