//! Classical batch augmentations and mixup interpolation.
//!
//! Every transform acts on the input tensor `X` of a batch only; targets
//! pass through unchanged. Transforms are pure functions of the input,
//! the hyperparameters, and the rng stream they are handed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{NumericsError, Rng, Tensor3};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Imputer backbone used by the IA/IMA strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackboneTag {
    Linear,
    Mlp,
}

impl BackboneTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackboneTag::Linear => "linear",
            BackboneTag::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for BackboneTag {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, AugmentError> {
        match s {
            "linear" => Ok(BackboneTag::Linear),
            "mlp" => Ok(BackboneTag::Mlp),
            other => Err(AugmentError::InvalidArgument(format!(
                "unknown backbone {other:?}; valid backbones: linear, mlp"
            ))),
        }
    }
}

/// One of the eleven training-time strategies with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum AugStrategy {
    Baseline,
    Jitter {
        sigma: f64,
    },
    HFlip,
    VFlip,
    Scaling {
        sigma: f64,
    },
    WindowWarp {
        ratio: f64,
        scale_choices: Vec<f64>,
    },
    WindowSlide {
        ratio: f64,
    },
    Permutation {
        max_segments: usize,
    },
    Mixup {
        alpha: f64,
        per_sample_lambda: bool,
    },
    Ia {
        backbone: BackboneTag,
        imputation_rate: f64,
        mask_rate: f64,
        recompose: bool,
    },
    Ima {
        backbone: BackboneTag,
        imputation_rate: f64,
        mask_rate: f64,
        alpha: f64,
        recompose: bool,
        per_sample_lambda: bool,
    },
}

/// Strategy tags accepted in configs and on the command line.
pub const STRATEGY_TAGS: [&str; 11] = [
    "baseline",
    "jitter",
    "hflip",
    "vflip",
    "scaling",
    "window_warp",
    "window_slide",
    "permutation",
    "mixup",
    "ia",
    "ima",
];

impl AugStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            AugStrategy::Baseline => "baseline",
            AugStrategy::Jitter { .. } => "jitter",
            AugStrategy::HFlip => "hflip",
            AugStrategy::VFlip => "vflip",
            AugStrategy::Scaling { .. } => "scaling",
            AugStrategy::WindowWarp { .. } => "window_warp",
            AugStrategy::WindowSlide { .. } => "window_slide",
            AugStrategy::Permutation { .. } => "permutation",
            AugStrategy::Mixup { .. } => "mixup",
            AugStrategy::Ia { .. } => "ia",
            AugStrategy::Ima { .. } => "ima",
        }
    }

    pub fn needs_imputer(&self) -> bool {
        matches!(self, AugStrategy::Ia { .. } | AugStrategy::Ima { .. })
    }

    pub fn backbone(&self) -> Option<BackboneTag> {
        match self {
            AugStrategy::Ia { backbone, .. } | AugStrategy::Ima { backbone, .. } => {
                Some(*backbone)
            }
            _ => None,
        }
    }

    /// Row name used in reports; IA/IMA rows carry their backbone.
    pub fn row_name(&self) -> String {
        match self.backbone() {
            Some(b) => format!("{}_{}", self.tag(), b.as_str()),
            None => self.tag().to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |msg: String| Err(AugmentError::InvalidArgument(msg));
        match self {
            AugStrategy::Jitter { sigma } | AugStrategy::Scaling { sigma } => {
                if !(*sigma >= 0.0) {
                    return bad(format!("sigma must be >= 0, got {sigma}"));
                }
            }
            AugStrategy::WindowWarp {
                ratio,
                scale_choices,
            } => {
                if !(*ratio > 0.0 && *ratio <= 1.0) {
                    return bad(format!("warp ratio must be in (0,1], got {ratio}"));
                }
                if scale_choices.is_empty() || scale_choices.iter().any(|&s| !(s > 0.0)) {
                    return bad("scale_choices must be nonempty positive scalars".into());
                }
            }
            AugStrategy::WindowSlide { ratio } => {
                if !(*ratio > 0.0 && *ratio <= 1.0) {
                    return bad(format!("slide ratio must be in (0,1], got {ratio}"));
                }
            }
            AugStrategy::Permutation { max_segments } => {
                if *max_segments < 1 {
                    return bad("max_segments must be >= 1".into());
                }
            }
            AugStrategy::Mixup { alpha, .. } => {
                if !(*alpha > 0.0) {
                    return bad(format!("mixup alpha must be > 0, got {alpha}"));
                }
            }
            AugStrategy::Ia {
                imputation_rate,
                mask_rate,
                ..
            } => {
                validate_rate("imputation_rate", *imputation_rate)?;
                validate_rate("mask_rate", *mask_rate)?;
            }
            AugStrategy::Ima {
                imputation_rate,
                mask_rate,
                alpha,
                ..
            } => {
                validate_rate("imputation_rate", *imputation_rate)?;
                validate_rate("mask_rate", *mask_rate)?;
                if !(*alpha > 0.0) {
                    return bad(format!("mixup alpha must be > 0, got {alpha}"));
                }
            }
            AugStrategy::Baseline | AugStrategy::HFlip | AugStrategy::VFlip => {}
        }
        Ok(())
    }
}

fn validate_rate(name: &str, rate: f64) -> Result<(), AugmentError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(AugmentError::InvalidArgument(format!(
            "{name} must be in [0,1], got {rate}"
        )));
    }
    Ok(())
}

/// Adds elementwise Gaussian(0, sigma^2) noise.
pub fn jitter(x: &Tensor3, sigma: f64, rng: &mut Rng) -> Result<Tensor3, AugmentError> {
    if !(sigma >= 0.0) {
        return Err(AugmentError::InvalidArgument(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut out = x.clone();
    for v in out.values_mut() {
        *v += rng.sample_gaussian(0.0, sigma)?;
    }
    Ok(out)
}

/// Reverses the time axis of every sample.
pub fn hflip(x: &Tensor3) -> Tensor3 {
    let (b, t, n) = x.shape();
    let mut out = Tensor3::zeros(b, t, n);
    for i in 0..b {
        for tt in 0..t {
            for c in 0..n {
                out.set(i, tt, c, x.get(i, t - 1 - tt, c));
            }
        }
    }
    out
}

/// Elementwise negation; inputs are standardized, so this mirrors the
/// series around its (approximately zero) mean.
pub fn vflip(x: &Tensor3) -> Tensor3 {
    let mut out = x.clone();
    for v in out.values_mut() {
        *v = -*v;
    }
    out
}

/// Multiplies each (sample, channel) series by a factor drawn from
/// Gaussian(1, sigma^2).
pub fn scaling(x: &Tensor3, sigma: f64, rng: &mut Rng) -> Result<Tensor3, AugmentError> {
    if !(sigma >= 0.0) {
        return Err(AugmentError::InvalidArgument(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let (b, t, n) = x.shape();
    let mut out = x.clone();
    for i in 0..b {
        for c in 0..n {
            let f = rng.sample_gaussian(1.0, sigma)?;
            for tt in 0..t {
                out.set(i, tt, c, f * x.get(i, tt, c));
            }
        }
    }
    Ok(out)
}

/// Linear resample of `src` to `dst_len` points, endpoints fixed.
pub fn resample_linear(src: &[f64], dst_len: usize) -> Vec<f64> {
    debug_assert!(!src.is_empty() && dst_len >= 1);
    if src.len() == 1 {
        return vec![src[0]; dst_len];
    }
    if dst_len == 1 {
        return vec![src[0]];
    }
    let step = (src.len() - 1) as f64 / (dst_len - 1) as f64;
    (0..dst_len)
        .map(|i| {
            let pos = i as f64 * step;
            let lo = (pos.floor() as usize).min(src.len() - 2);
            let frac = pos - lo as f64;
            src[lo] + frac * (src[lo + 1] - src[lo])
        })
        .collect()
}

/// Deterministic core of [`window_warp`]: stretch the segment
/// `[seg_start, seg_start + seg_len)` by `scale`, splice, and resample
/// the spliced series back to the original length.
pub fn warp_series(series: &[f64], seg_start: usize, seg_len: usize, scale: f64) -> Vec<f64> {
    let t = series.len();
    let warped_len = ((seg_len as f64 * scale).round() as usize).max(1);
    let segment = resample_linear(&series[seg_start..seg_start + seg_len], warped_len);
    let mut spliced = Vec::with_capacity(seg_start + warped_len + (t - seg_start - seg_len));
    spliced.extend_from_slice(&series[..seg_start]);
    spliced.extend_from_slice(&segment);
    spliced.extend_from_slice(&series[seg_start + seg_len..]);
    resample_linear(&spliced, t)
}

/// Per sample: stretch or compress a random contiguous segment of length
/// `round(ratio * T)` by a scale drawn from `scale_choices`, then resample
/// back to length `T`. All channels of a sample share the segment and
/// scale.
pub fn window_warp(
    x: &Tensor3,
    ratio: f64,
    scale_choices: &[f64],
    rng: &mut Rng,
) -> Result<Tensor3, AugmentError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(AugmentError::InvalidArgument(format!(
            "warp ratio must be in (0,1], got {ratio}"
        )));
    }
    if scale_choices.is_empty() || scale_choices.iter().any(|&s| !(s > 0.0)) {
        return Err(AugmentError::InvalidArgument(
            "scale_choices must be nonempty positive scalars".into(),
        ));
    }
    let (b, t, n) = x.shape();
    let seg_len = (ratio * t as f64).round() as usize;
    if seg_len == 0 {
        return Err(AugmentError::InvalidArgument(format!(
            "warp segment rounds to 0 for ratio {ratio} and T {t}"
        )));
    }
    let mut out = x.clone();
    let mut series = vec![0.0; t];
    for i in 0..b {
        let seg_start = rng.sample_index(t - seg_len + 1);
        let scale = scale_choices[rng.sample_index(scale_choices.len())];
        for c in 0..n {
            x.read_series(i, c, &mut series);
            let warped = warp_series(&series, seg_start, seg_len, scale);
            out.write_series(i, c, &warped);
        }
    }
    Ok(out)
}

/// Deterministic core of [`window_slide`]: crop `[start, start + len)`
/// and stretch it back to the original length.
pub fn slide_series(series: &[f64], crop_start: usize, crop_len: usize) -> Vec<f64> {
    resample_linear(&series[crop_start..crop_start + crop_len], series.len())
}

/// Per sample: crop a random contiguous window of length
/// `round(ratio * T)` and linearly stretch it back to length `T`.
pub fn window_slide(x: &Tensor3, ratio: f64, rng: &mut Rng) -> Result<Tensor3, AugmentError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(AugmentError::InvalidArgument(format!(
            "slide ratio must be in (0,1], got {ratio}"
        )));
    }
    if ratio == 1.0 {
        return Ok(x.clone());
    }
    let (b, t, n) = x.shape();
    let crop_len = (ratio * t as f64).round() as usize;
    if crop_len < 2 {
        return Err(AugmentError::InvalidArgument(format!(
            "slide crop rounds to {crop_len} for ratio {ratio} and T {t}; need >= 2"
        )));
    }
    let mut out = x.clone();
    let mut series = vec![0.0; t];
    for i in 0..b {
        let crop_start = rng.sample_index(t - crop_len + 1);
        for c in 0..n {
            x.read_series(i, c, &mut series);
            let slid = slide_series(&series, crop_start, crop_len);
            out.write_series(i, c, &slid);
        }
    }
    Ok(out)
}

/// Deterministic core of [`permutation`]: split the time axis into
/// `order.len()` near-equal segments and emit them in `order`.
pub fn permute_series(series: &[f64], order: &[usize]) -> Vec<f64> {
    let t = series.len();
    let k = order.len();
    let bound = |i: usize| (i * t + k / 2) / k;
    let mut out = Vec::with_capacity(t);
    for &seg in order {
        out.extend_from_slice(&series[bound(seg)..bound(seg + 1)]);
    }
    out
}

/// Per sample: draw `k` uniform in `[1, max_segments]`, split the time
/// axis into `k` near-equal segments, and emit them in a random order.
/// All channels of a sample move together.
pub fn permutation(
    x: &Tensor3,
    max_segments: usize,
    rng: &mut Rng,
) -> Result<Tensor3, AugmentError> {
    let (b, t, n) = x.shape();
    if max_segments < 1 {
        return Err(AugmentError::InvalidArgument(
            "max_segments must be >= 1".into(),
        ));
    }
    if max_segments > t {
        return Err(AugmentError::InvalidArgument(format!(
            "max_segments {max_segments} exceeds window length {t}"
        )));
    }
    if max_segments == 1 {
        return Ok(x.clone());
    }
    let mut out = x.clone();
    let mut series = vec![0.0; t];
    for i in 0..b {
        let k = 1 + rng.sample_index(max_segments);
        let order = rng.permutation(k);
        for c in 0..n {
            x.read_series(i, c, &mut series);
            let permuted = permute_series(&series, &order);
            out.write_series(i, c, &permuted);
        }
    }
    Ok(out)
}

/// Mixing coefficients and sample pairing for one mixup application.
/// `lambdas` holds a single batch-wide coefficient or one per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MixupDraw {
    pub lambdas: Vec<f64>,
    pub pairing: Vec<usize>,
}

impl MixupDraw {
    pub fn lambda_for(&self, i: usize) -> f64 {
        if self.lambdas.len() == 1 {
            self.lambdas[0]
        } else {
            self.lambdas[i]
        }
    }

    /// The degenerate draw that leaves a batch untouched.
    pub fn identity(batch: usize) -> Self {
        MixupDraw {
            lambdas: vec![1.0],
            pairing: (0..batch).collect(),
        }
    }
}

/// Samples a [`MixupDraw`]: pairing first (a full-batch shuffle), then
/// the Beta(alpha, alpha) coefficient(s). Self-pairs are permitted when
/// the shuffle fixes a point.
pub fn sample_mixup_draw(
    batch: usize,
    alpha: f64,
    per_sample_lambda: bool,
    rng: &mut Rng,
) -> Result<MixupDraw, AugmentError> {
    if !(alpha > 0.0) {
        return Err(AugmentError::InvalidArgument(format!(
            "mixup alpha must be > 0, got {alpha}"
        )));
    }
    let pairing = rng.permutation(batch);
    let n_lambdas = if per_sample_lambda { batch } else { 1 };
    let lambdas = (0..n_lambdas)
        .map(|_| rng.sample_beta_symmetric(alpha))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(MixupDraw { lambdas, pairing })
}

/// `x_mix[i] = lambda_i * x[i] + (1 - lambda_i) * x[pairing[i]]`.
pub fn mixup_apply(x: &Tensor3, draw: &MixupDraw) -> Tensor3 {
    let (b, t, n) = x.shape();
    debug_assert_eq!(draw.pairing.len(), b);
    let mut out = Tensor3::zeros(b, t, n);
    for i in 0..b {
        let lambda = draw.lambda_for(i);
        let j = draw.pairing[i];
        for tt in 0..t {
            for c in 0..n {
                out.set(
                    i,
                    tt,
                    c,
                    lambda * x.get(i, tt, c) + (1.0 - lambda) * x.get(j, tt, c),
                );
            }
        }
    }
    out
}

/// Samples a draw and applies it in one step.
pub fn mixup_pair(
    x: &Tensor3,
    alpha: f64,
    per_sample_lambda: bool,
    rng: &mut Rng,
) -> Result<(Tensor3, MixupDraw), AugmentError> {
    let draw = sample_mixup_draw(x.batch(), alpha, per_sample_lambda, rng)?;
    Ok((mixup_apply(x, &draw), draw))
}
