//! Imputation-based mixup augmentation for long-sequence time-series
//! forecasting.
//!
//! The library is organized around a two-phase training scheme. First an
//! imputer is pretrained by self-supervised reconstruction of masked
//! windows. The pretrained imputer is then used as a training-time
//! augmentation for a forecaster: batches are stochastically replaced by
//! their imputed reconstructions (IA) and optionally interpolated with
//! mixup (IMA). Eight classical augmentations are included as baselines,
//! and the `bench` harness reports per-strategy MSE/MAE deltas against an
//! unaugmented baseline.

pub mod augment;
pub mod config;
pub mod data;
pub mod experiment;
pub mod models;
pub mod numerics;
pub mod pipeline;
pub mod report;

mod error;

pub use error::ImaError;
