//! The two-phase training pipeline: masked self-supervised
//! reconstruction (SSR) for the imputer, then forecaster training under
//! one of the eleven augmentation strategies, including the gated
//! imputed-data augmentation (IA) and its mixup combination (IMA).
//!
//! Every stochastic consumer (batch shuffle, mask, gate, mixup,
//! augmentation noise, parameter init) owns a dedicated derived RNG
//! stream, so disabling one consumer never shifts the draws of another.
//! That is what makes the degeneracy invariants (IA at rate 0 equals
//! baseline, IMA at rate 0 equals mixup) hold bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{
    self, AugStrategy, AugmentError, BackboneTag, MixupDraw,
};
use crate::data::{batch_iter, Batch, DataError, WindowDataset};
use crate::models::{AdamConfig, AdamState, DLinearForecaster, Imputer, ModelError};
use crate::numerics::{NumericsError, Rng, Tensor3};

/// Stream ids for the draw-alignment rule. Fixed across strategies so
/// that runs differing only in strategy share every other draw.
pub mod streams {
    pub const FORECASTER_INIT: u64 = 1;
    pub const IMPUTER_INIT: u64 = 2;
    pub const BATCH_SHUFFLE: u64 = 3;
    pub const GATE: u64 = 4;
    pub const MASK: u64 = 5;
    pub const MIXUP: u64 = 6;
    pub const AUG_NOISE: u64 = 7;
    pub const SYNTHETIC: u64 = 8;
    pub const SSR_SHUFFLE: u64 = 9;
    pub const SSR_MASK: u64 = 10;
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("in run ({strategy}, seed {seed}): {source}")]
    Run {
        strategy: String,
        seed: u64,
        #[source]
        source: Box<TrainError>,
    },
}

impl TrainError {
    /// Annotates an error with the (strategy, seed) run it came from.
    pub fn in_run(self, strategy: &str, seed: u64) -> TrainError {
        TrainError::Run {
            strategy: strategy.to_string(),
            seed,
            source: Box::new(self),
        }
    }
}

/// Binary mask congruent to an input tensor; 0 = masked, 1 = observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(Tensor3);

impl Mask {
    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    pub fn all_ones(b: usize, t: usize, n: usize) -> Self {
        let mut m = Tensor3::zeros(b, t, n);
        m.values_mut().iter_mut().for_each(|v| *v = 1.0);
        Mask(m)
    }

    /// Wraps a tensor after checking it is exactly binary.
    pub fn from_tensor(t: Tensor3) -> Result<Self, TrainError> {
        if t.values().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(TrainError::Configuration(
                "mask entries must be exactly 0 or 1".into(),
            ));
        }
        Ok(Mask(t))
    }

    pub fn masked_count(&self) -> usize {
        self.0.values().iter().filter(|&&v| v == 0.0).count()
    }
}

/// Independent per element: 0 with probability `mask_rate`, else 1.
pub fn gen_mask(
    shape: (usize, usize, usize),
    mask_rate: f64,
    rng: &mut Rng,
) -> Result<Mask, TrainError> {
    if !(0.0..=1.0).contains(&mask_rate) {
        return Err(TrainError::Configuration(format!(
            "mask_rate must be in [0,1], got {mask_rate}"
        )));
    }
    let (b, t, n) = shape;
    let mut m = Tensor3::zeros(b, t, n);
    for v in m.values_mut() {
        *v = if rng.sample_uniform() < mask_rate { 0.0 } else { 1.0 };
    }
    Ok(Mask(m))
}

/// Elementwise product `x (.) m`; masked entries come out exactly zero.
pub fn apply_mask(x: &Tensor3, mask: &Mask) -> Result<Tensor3, TrainError> {
    if !x.same_shape(mask.tensor()) {
        return Err(TrainError::Configuration(format!(
            "mask shape {:?} does not match input {:?}",
            mask.tensor().shape(),
            x.shape()
        )));
    }
    let mut out = x.clone();
    for (v, &m) in out.values_mut().iter_mut().zip(mask.tensor().values()) {
        if m == 0.0 {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Normalization of the masked reconstruction loss. The literal form
/// divides the masked squared error by the batch size only; the
/// alternative divides by the number of masked entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsrNormalization {
    PerBatch,
    PerMaskedCount,
}

/// Masked reconstruction loss: the squared error summed over masked
/// positions (time and feature axes), normalized per
/// [`SsrNormalization`]. Observed positions contribute nothing.
pub fn masked_sse(
    x: &Tensor3,
    x_imp: &Tensor3,
    mask: &Mask,
    norm: SsrNormalization,
) -> Result<f64, TrainError> {
    if !x.same_shape(x_imp) || !x.same_shape(mask.tensor()) {
        return Err(TrainError::Configuration(format!(
            "masked_sse shapes differ: x {:?}, x_imp {:?}, mask {:?}",
            x.shape(),
            x_imp.shape(),
            mask.tensor().shape()
        )));
    }
    let mut acc = 0.0;
    for ((&a, &b), &m) in x
        .values()
        .iter()
        .zip(x_imp.values())
        .zip(mask.tensor().values())
    {
        if m == 0.0 {
            let d = a - b;
            acc += d * d;
        }
    }
    let denom = match norm {
        SsrNormalization::PerBatch => x.batch() as f64,
        SsrNormalization::PerMaskedCount => mask.masked_count().max(1) as f64,
    };
    Ok(acc / denom)
}

/// One uniform draw per batch: 1 if it falls below `imputation_rate`.
pub fn gated(imputation_rate: f64, rng: &mut Rng) -> bool {
    rng.sample_uniform() < imputation_rate
}

/// Mean squared error over every element.
pub fn forecast_mse(y_hat: &Tensor3, y: &Tensor3) -> Result<f64, TrainError> {
    check_congruent(y_hat, y)?;
    let acc: f64 = y_hat
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(acc / y.len() as f64)
}

/// Mean absolute error over every element.
pub fn forecast_mae(y_hat: &Tensor3, y: &Tensor3) -> Result<f64, TrainError> {
    check_congruent(y_hat, y)?;
    let acc: f64 = y_hat
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(acc / y.len() as f64)
}

fn check_congruent(a: &Tensor3, b: &Tensor3) -> Result<(), TrainError> {
    if !a.same_shape(b) {
        return Err(TrainError::Configuration(format!(
            "shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// SSR pretraining settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsrConfig {
    pub mask_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub normalization: SsrNormalization,
}

impl Default for SsrConfig {
    fn default() -> Self {
        SsrConfig {
            mask_rate: 0.375,
            epochs: 30,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            normalization: SsrNormalization::PerBatch,
        }
    }
}

impl SsrConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.mask_rate) {
            return Err(TrainError::Configuration(format!(
                "ssr mask_rate must be in [0,1], got {}",
                self.mask_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(TrainError::Configuration("ssr batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trains the imputer to reconstruct masked windows. Returns the
/// per-epoch mean masked loss.
pub fn ssr_train(
    f: &mut Imputer,
    ds: &WindowDataset,
    cfg: &SsrConfig,
) -> Result<Vec<f64>, TrainError> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(TrainError::Configuration("ssr dataset has no windows".into()));
    }
    let mut opt = AdamState::new(cfg.adam, &f.param_block_sizes())?;
    let mut shuffle_rng = Rng::derive(cfg.seed, streams::SSR_SHUFFLE);
    let mut mask_rng = Rng::derive(cfg.seed, streams::SSR_MASK);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for (bi, batch) in batch_iter(ds, cfg.batch_size, true, &mut shuffle_rng)?.enumerate() {
            let x = &batch.x;
            let mask = gen_mask(x.shape(), cfg.mask_rate, &mut mask_rng)?;
            let x_m = apply_mask(x, &mask)?;
            let x_imp = f.forward(&x_m)?;
            let loss = masked_sse(x, &x_imp, &mask, cfg.normalization)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFinite { epoch, batch: bi });
            }
            let denom = match cfg.normalization {
                SsrNormalization::PerBatch => x.batch() as f64,
                SsrNormalization::PerMaskedCount => mask.masked_count().max(1) as f64,
            };
            let mut upstream = Tensor3::zeros(x.batch(), x.time(), x.channels());
            for ((u, (&xi, &ii)), &m) in upstream
                .values_mut()
                .iter_mut()
                .zip(x.values().iter().zip(x_imp.values()))
                .zip(mask.tensor().values())
            {
                if m == 0.0 {
                    *u = 2.0 * (ii - xi) / denom;
                }
            }
            f.zero_grads();
            f.backward(&x_m, &upstream)?;
            opt.step(&mut f.param_blocks())?;
            epoch_loss += loss;
            n_batches += 1;
        }
        history.push(epoch_loss / n_batches as f64);
    }
    Ok(history)
}

/// Replaces a batch's inputs by imputer reconstructions under a fresh
/// mask. With `recompose`, observed coordinates keep their original
/// values exactly; otherwise the full reconstruction is taken.
pub fn impute_batch(
    f: &Imputer,
    batch: &Batch,
    mask_rate: f64,
    recompose: bool,
    rng: &mut Rng,
) -> Result<Batch, TrainError> {
    let x = &batch.x;
    let mask = gen_mask(x.shape(), mask_rate, rng)?;
    let x_m = apply_mask(x, &mask)?;
    let x_imp = f.forward(&x_m)?;
    let x_out = if recompose {
        let mut out = x.clone();
        for ((v, &imp), &m) in out
            .values_mut()
            .iter_mut()
            .zip(x_imp.values())
            .zip(mask.tensor().values())
        {
            if m == 0.0 {
                *v = imp;
            }
        }
        out
    } else {
        x_imp
    };
    Ok(Batch {
        x: x_out,
        y: batch.y.clone(),
        indices: batch.indices.clone(),
    })
}

/// IA/IMA hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImaConfig {
    pub imputation_rate: f64,
    pub mask_rate: f64,
    pub alpha: f64,
    pub recompose: bool,
    pub per_sample_lambda: bool,
    pub backbone: BackboneTag,
}

impl Default for ImaConfig {
    fn default() -> Self {
        ImaConfig {
            imputation_rate: 0.125,
            mask_rate: 0.375,
            alpha: 0.2,
            recompose: true,
            per_sample_lambda: false,
            backbone: BackboneTag::Mlp,
        }
    }
}

impl ImaConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        for (name, rate) in [
            ("imputation_rate", self.imputation_rate),
            ("mask_rate", self.mask_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(TrainError::Configuration(format!(
                    "{name} must be in [0,1], got {rate}"
                )));
            }
        }
        if !(self.alpha > 0.0) {
            return Err(TrainError::Configuration(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-consumer RNG streams for one forecaster training run.
pub struct TrainStreams {
    pub shuffle: Rng,
    pub gate: Rng,
    pub mask: Rng,
    pub mixup: Rng,
    pub aug: Rng,
}

impl TrainStreams {
    pub fn new(seed: u64) -> Self {
        TrainStreams {
            shuffle: Rng::derive(seed, streams::BATCH_SHUFFLE),
            gate: Rng::derive(seed, streams::GATE),
            mask: Rng::derive(seed, streams::MASK),
            mixup: Rng::derive(seed, streams::MIXUP),
            aug: Rng::derive(seed, streams::AUG_NOISE),
        }
    }
}

fn plain_step(
    g: &mut DLinearForecaster,
    opt: &mut AdamState,
    x: &Tensor3,
    y: &Tensor3,
) -> Result<f64, TrainError> {
    let y_hat = g.forward(x)?;
    let loss = forecast_mse(&y_hat, y)?;
    let scale = 2.0 / y.len() as f64;
    let mut upstream = Tensor3::zeros(y.batch(), y.time(), y.channels());
    for (u, (&h, &t)) in upstream
        .values_mut()
        .iter_mut()
        .zip(y_hat.values().iter().zip(y.values()))
    {
        *u = scale * (h - t);
    }
    g.zero_grads();
    g.backward(x, &upstream)?;
    opt.step(&mut g.param_blocks())?;
    Ok(loss)
}

/// Mixup step on an already (possibly) imputed input tensor: forward
/// once on the mixed batch, weight the two target losses by lambda, and
/// update the forecaster.
fn mixed_step(
    g: &mut DLinearForecaster,
    opt: &mut AdamState,
    x: &Tensor3,
    y: &Tensor3,
    draw: &MixupDraw,
) -> Result<f64, TrainError> {
    let x_mix = augment::mixup_apply(x, draw);
    let y_hat = g.forward(&x_mix)?;
    let (b, ty, n) = y.shape();
    let total = (b * ty * n) as f64;
    let mut loss = 0.0;
    let mut upstream = Tensor3::zeros(b, ty, n);
    for i in 0..b {
        let lambda = draw.lambda_for(i);
        let j = draw.pairing[i];
        for t in 0..ty {
            for c in 0..n {
                let h = y_hat.get(i, t, c);
                let di = h - y.get(i, t, c);
                let dj = h - y.get(j, t, c);
                loss += lambda * di * di + (1.0 - lambda) * dj * dj;
                upstream.set(i, t, c, 2.0 * (lambda * di + (1.0 - lambda) * dj) / total);
            }
        }
    }
    loss /= total;
    g.zero_grads();
    g.backward(&x_mix, &upstream)?;
    opt.step(&mut g.param_blocks())?;
    Ok(loss)
}

/// One IMA training step with the gate and mixup draw forced, for
/// deterministic-path tests. The imputer is read-only throughout.
pub fn ima_step_with(
    g: &mut DLinearForecaster,
    f: &Imputer,
    opt: &mut AdamState,
    batch: &Batch,
    cfg: &ImaConfig,
    gate: bool,
    draw: &MixupDraw,
    mask_rng: &mut Rng,
) -> Result<f64, TrainError> {
    let effective;
    let x = if gate {
        effective = impute_batch(f, batch, cfg.mask_rate, cfg.recompose, mask_rng)?;
        &effective.x
    } else {
        &batch.x
    };
    mixed_step(g, opt, x, &batch.y, draw)
}

/// One full IMA step: draw the gate, impute when it fires, draw the
/// mixup pairing and coefficient, and update the forecaster.
pub fn ima_step(
    g: &mut DLinearForecaster,
    f: &Imputer,
    opt: &mut AdamState,
    batch: &Batch,
    cfg: &ImaConfig,
    rngs: &mut TrainStreams,
) -> Result<f64, TrainError> {
    cfg.validate()?;
    let gate = gated(cfg.imputation_rate, &mut rngs.gate);
    let draw = augment::sample_mixup_draw(
        batch.x.batch(),
        cfg.alpha,
        cfg.per_sample_lambda,
        &mut rngs.mixup,
    )?;
    ima_step_with(g, f, opt, batch, cfg, gate, &draw, &mut rngs.mask)
}

/// Forecaster training settings shared by all strategies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            patience: 3,
            seed: 0,
        }
    }
}

/// Per-epoch record of the loss-history file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mse: f64,
    pub val_mae: f64,
}

/// Trains `g` under `strategy`, early-stopping on validation MSE, and
/// leaves `g` at the best-validation snapshot. The imputer, when
/// present, is frozen: it is only ever read.
pub fn train_forecaster(
    g: &mut DLinearForecaster,
    f: Option<&Imputer>,
    ds_train: &WindowDataset,
    ds_val: &WindowDataset,
    strategy: &AugStrategy,
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>, TrainError> {
    strategy.validate()?;
    if strategy.needs_imputer() != f.is_some() {
        return Err(TrainError::Configuration(format!(
            "strategy {:?} {} an imputer",
            strategy.tag(),
            if strategy.needs_imputer() {
                "requires"
            } else {
                "does not take"
            }
        )));
    }
    if cfg.batch_size < 1 {
        return Err(TrainError::Configuration("batch_size must be >= 1".into()));
    }
    let mut opt = AdamState::new(cfg.adam, &g.param_block_sizes())?;
    let mut rngs = TrainStreams::new(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, DLinearForecaster)> = None;
    let mut since_best = 0usize;

    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for (bi, batch) in batch_iter(ds_train, cfg.batch_size, true, &mut rngs.shuffle)?.enumerate()
        {
            let loss = match strategy {
                AugStrategy::Baseline => plain_step(g, &mut opt, &batch.x, &batch.y)?,
                AugStrategy::Jitter { sigma } => {
                    let x = augment::jitter(&batch.x, *sigma, &mut rngs.aug)?;
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::HFlip => {
                    let x = augment::hflip(&batch.x);
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::VFlip => {
                    let x = augment::vflip(&batch.x);
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::Scaling { sigma } => {
                    let x = augment::scaling(&batch.x, *sigma, &mut rngs.aug)?;
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::WindowWarp {
                    ratio,
                    scale_choices,
                } => {
                    let x =
                        augment::window_warp(&batch.x, *ratio, scale_choices, &mut rngs.aug)?;
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::WindowSlide { ratio } => {
                    let x = augment::window_slide(&batch.x, *ratio, &mut rngs.aug)?;
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::Permutation { max_segments } => {
                    let x = augment::permutation(&batch.x, *max_segments, &mut rngs.aug)?;
                    plain_step(g, &mut opt, &x, &batch.y)?
                }
                AugStrategy::Mixup {
                    alpha,
                    per_sample_lambda,
                } => {
                    let draw = augment::sample_mixup_draw(
                        batch.x.batch(),
                        *alpha,
                        *per_sample_lambda,
                        &mut rngs.mixup,
                    )?;
                    mixed_step(g, &mut opt, &batch.x, &batch.y, &draw)?
                }
                AugStrategy::Ia {
                    imputation_rate,
                    mask_rate,
                    recompose,
                    ..
                } => {
                    let imputer = f.expect("checked above");
                    if gated(*imputation_rate, &mut rngs.gate) {
                        let imputed = impute_batch(
                            imputer,
                            &batch,
                            *mask_rate,
                            *recompose,
                            &mut rngs.mask,
                        )?;
                        plain_step(g, &mut opt, &imputed.x, &imputed.y)?
                    } else {
                        plain_step(g, &mut opt, &batch.x, &batch.y)?
                    }
                }
                AugStrategy::Ima {
                    imputation_rate,
                    mask_rate,
                    alpha,
                    recompose,
                    per_sample_lambda,
                    backbone,
                } => {
                    let imputer = f.expect("checked above");
                    let cfg_ima = ImaConfig {
                        imputation_rate: *imputation_rate,
                        mask_rate: *mask_rate,
                        alpha: *alpha,
                        recompose: *recompose,
                        per_sample_lambda: *per_sample_lambda,
                        backbone: *backbone,
                    };
                    ima_step(g, imputer, &mut opt, &batch, &cfg_ima, &mut rngs)?
                }
            };
            if !loss.is_finite() {
                return Err(TrainError::NonFinite { epoch, batch: bi });
            }
            epoch_loss += loss;
            n_batches += 1;
        }
        let (val_mse, val_mae) = evaluate(g, ds_val, cfg.batch_size, None)?;
        history.push(EpochStats {
            epoch,
            train_loss: epoch_loss / n_batches as f64,
            val_mse,
            val_mae,
        });
        let improved = best.as_ref().map(|(b, _)| val_mse < *b).unwrap_or(true);
        if improved {
            best = Some((val_mse, g.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if let Some((_, snapshot)) = best {
        *g = snapshot;
    }
    Ok(history)
}

/// Test metrics over every window: no augmentation, no shuffle. With a
/// target channel set, only that channel enters the means.
pub fn evaluate(
    g: &DLinearForecaster,
    ds: &WindowDataset,
    batch_size: usize,
    target_channel: Option<usize>,
) -> Result<(f64, f64), TrainError> {
    if ds.is_empty() {
        return Err(TrainError::Configuration("evaluation dataset is empty".into()));
    }
    let mut throwaway = Rng::new(0);
    let mut se = 0.0;
    let mut ae = 0.0;
    let mut count = 0usize;
    for batch in batch_iter(ds, batch_size, false, &mut throwaway)? {
        let y_hat = g.forward(&batch.x)?;
        let (b, t, n) = batch.y.shape();
        if let Some(ch) = target_channel {
            if ch >= n {
                return Err(TrainError::Configuration(format!(
                    "target channel {ch} out of range for {n} channels"
                )));
            }
        }
        for i in 0..b {
            for tt in 0..t {
                for c in 0..n {
                    if let Some(ch) = target_channel {
                        if c != ch {
                            continue;
                        }
                    }
                    let d = y_hat.get(i, tt, c) - batch.y.get(i, tt, c);
                    se += d * d;
                    ae += d.abs();
                    count += 1;
                }
            }
        }
    }
    Ok((se / count as f64, ae / count as f64))
}

/// Writes the loss-history file: a header then one
/// `epoch,train_loss,val_mse,val_mae` line per epoch.
pub fn write_history(history: &[EpochStats], path: &Path) -> Result<(), TrainError> {
    let mut out = String::from("epoch,train_loss,val_mse,val_mae\n");
    for e in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.epoch, e.train_loss, e.val_mse, e.val_mae
        ));
    }
    std::fs::write(path, out).map_err(|source| TrainError::Io {
        path: path.display().to_string(),
        source,
    })
}
