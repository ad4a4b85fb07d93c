//! JSON experiment configuration: schema, defaults, and validation.
//!
//! Every container rejects unknown keys, so typos surface as parse
//! errors rather than silently-ignored settings. Unset keys take the
//! documented defaults; the IA/IMA mask rate falls back to the SSR mask
//! rate when not given separately.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{AugStrategy, BackboneTag, STRATEGY_TAGS};
use crate::data::SyntheticSpec;
use crate::models::AdamConfig;
use crate::pipeline::{SsrConfig, SsrNormalization, TrainConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config value for {key}: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown strategy tag {tag:?}; valid tags: {}", STRATEGY_TAGS.join(", "))]
    UnknownStrategy { tag: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Where the series comes from: a CSV file on disk or the generator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: String,
    },
    Synthetic {
        #[serde(default)]
        spec: SyntheticSpec,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            spec: SyntheticSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Md,
    Json,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Md => "md",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" => Ok(ReportFormat::Md),
            "json" => Ok(ReportFormat::Json),
            other => Err(invalid(
                "report_format",
                format!("unknown format {other:?}; valid formats: csv, md, json"),
            )),
        }
    }
}

fn default_lr() -> f64 {
    1e-3
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

/// Optimizer settings with per-key defaults, so configs may override
/// just the learning rate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AdamSettings {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Default for AdamSettings {
    fn default() -> Self {
        AdamSettings {
            lr: default_lr(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

impl AdamSettings {
    pub fn to_adam(self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        self.to_adam()
            .validate()
            .map_err(|e| invalid(key, e.to_string()))
    }
}

fn default_train_epochs() -> usize {
    10
}
fn default_batch_size() -> usize {
    32
}
fn default_patience() -> usize {
    3
}

/// Forecaster training budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainSettings {
    #[serde(default = "default_train_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub adam: AdamSettings,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            epochs: default_train_epochs(),
            batch_size: default_batch_size(),
            adam: AdamSettings::default(),
            patience: default_patience(),
        }
    }
}

impl TrainSettings {
    pub fn to_train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: self.adam.to_adam(),
            patience: self.patience,
            seed,
        }
    }
}

fn default_ssr_mask_rate() -> f64 {
    0.375
}
fn default_ssr_epochs() -> usize {
    30
}
fn default_normalization() -> SsrNormalization {
    SsrNormalization::PerBatch
}

/// Imputer pretraining budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SsrSettings {
    #[serde(default = "default_ssr_mask_rate")]
    pub mask_rate: f64,
    #[serde(default = "default_ssr_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub adam: AdamSettings,
    #[serde(default = "default_normalization")]
    pub normalization: SsrNormalization,
}

impl Default for SsrSettings {
    fn default() -> Self {
        SsrSettings {
            mask_rate: default_ssr_mask_rate(),
            epochs: default_ssr_epochs(),
            batch_size: default_batch_size(),
            adam: AdamSettings::default(),
            normalization: default_normalization(),
        }
    }
}

impl SsrSettings {
    pub fn to_ssr_config(&self, seed: u64) -> SsrConfig {
        SsrConfig {
            mask_rate: self.mask_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: self.adam.to_adam(),
            seed,
            normalization: self.normalization,
        }
    }
}

fn default_jitter_sigma() -> f64 {
    0.03
}
fn default_scaling_sigma() -> f64 {
    0.1
}
fn default_warp_ratio() -> f64 {
    0.1
}
fn default_warp_scales() -> Vec<f64> {
    vec![0.5, 2.0]
}
fn default_slide_ratio() -> f64 {
    0.9
}
fn default_max_segments() -> usize {
    5
}
fn default_mixup_alpha() -> f64 {
    0.2
}
fn default_imputation_rate() -> f64 {
    0.125
}
fn default_recompose() -> bool {
    true
}

/// Per-strategy hyperparameters used when a strategy is named by tag.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AugSettings {
    #[serde(default = "default_jitter_sigma")]
    pub jitter_sigma: f64,
    #[serde(default = "default_scaling_sigma")]
    pub scaling_sigma: f64,
    #[serde(default = "default_warp_ratio")]
    pub warp_ratio: f64,
    #[serde(default = "default_warp_scales")]
    pub warp_scales: Vec<f64>,
    #[serde(default = "default_slide_ratio")]
    pub slide_ratio: f64,
    #[serde(default = "default_max_segments")]
    pub max_segments: usize,
    #[serde(default = "default_mixup_alpha")]
    pub mixup_alpha: f64,
    #[serde(default)]
    pub per_sample_lambda: bool,
    #[serde(default = "default_imputation_rate")]
    pub imputation_rate: f64,
    /// IA/IMA mask rate; falls back to `ssr.mask_rate` when absent.
    #[serde(default)]
    pub mask_rate: Option<f64>,
    #[serde(default = "default_recompose")]
    pub recompose: bool,
}

impl Default for AugSettings {
    fn default() -> Self {
        AugSettings {
            jitter_sigma: default_jitter_sigma(),
            scaling_sigma: default_scaling_sigma(),
            warp_ratio: default_warp_ratio(),
            warp_scales: default_warp_scales(),
            slide_ratio: default_slide_ratio(),
            max_segments: default_max_segments(),
            mixup_alpha: default_mixup_alpha(),
            per_sample_lambda: false,
            imputation_rate: default_imputation_rate(),
            mask_rate: None,
            recompose: default_recompose(),
        }
    }
}

fn default_seq_len() -> usize {
    96
}
fn default_pred_len() -> usize {
    96
}
fn default_stride() -> usize {
    1
}
fn default_split() -> (f64, f64, f64) {
    (0.7, 0.1, 0.2)
}
fn default_kernel_size() -> usize {
    25
}
fn default_strategies() -> Vec<String> {
    STRATEGY_TAGS.iter().map(|s| s.to_string()).collect()
}
fn default_backbones() -> Vec<String> {
    vec!["linear".to_string(), "mlp".to_string()]
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_out_dir() -> String {
    "out".to_string()
}

/// The full experiment description: data source, window geometry,
/// strategy menu, budgets, and output settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: DatasetSource,
    #[serde(default = "default_seq_len")]
    pub seq_len: usize,
    #[serde(default = "default_pred_len")]
    pub pred_len: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_kernel_size")]
    pub kernel_size: usize,
    #[serde(default = "default_split")]
    pub split: (f64, f64, f64),
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_backbones")]
    pub backbones: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub ssr: SsrSettings,
    #[serde(default)]
    pub aug: AugSettings,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub report_format: ReportFormat,
    #[serde(default)]
    pub target_channel: Option<usize>,
    /// Base seed for the synthetic generator and SSR pretraining.
    #[serde(default)]
    pub data_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are total")
    }
}

impl ExperimentConfig {
    /// The IA/IMA mask rate after the SSR fallback.
    pub fn effective_mask_rate(&self) -> f64 {
        self.aug.mask_rate.unwrap_or(self.ssr.mask_rate)
    }

    /// Parsed backbone tags, in declaration order.
    pub fn backbone_tags(&self) -> Result<Vec<BackboneTag>, ConfigError> {
        self.backbones
            .iter()
            .map(|b| {
                BackboneTag::from_str(b).map_err(|e| invalid("backbones", e.to_string()))
            })
            .collect()
    }

    /// Builds the concrete strategy for a tag, using the `aug` defaults.
    /// The backbone only matters for `ia`/`ima`.
    pub fn strategy_for(
        &self,
        tag: &str,
        backbone: BackboneTag,
    ) -> Result<AugStrategy, ConfigError> {
        let aug = &self.aug;
        let mask_rate = self.effective_mask_rate();
        let strategy = match tag {
            "baseline" => AugStrategy::Baseline,
            "jitter" => AugStrategy::Jitter {
                sigma: aug.jitter_sigma,
            },
            "hflip" => AugStrategy::HFlip,
            "vflip" => AugStrategy::VFlip,
            "scaling" => AugStrategy::Scaling {
                sigma: aug.scaling_sigma,
            },
            "window_warp" => AugStrategy::WindowWarp {
                ratio: aug.warp_ratio,
                scale_choices: aug.warp_scales.clone(),
            },
            "window_slide" => AugStrategy::WindowSlide {
                ratio: aug.slide_ratio,
            },
            "permutation" => AugStrategy::Permutation {
                max_segments: aug.max_segments,
            },
            "mixup" => AugStrategy::Mixup {
                alpha: aug.mixup_alpha,
                per_sample_lambda: aug.per_sample_lambda,
            },
            "ia" => AugStrategy::Ia {
                backbone,
                imputation_rate: aug.imputation_rate,
                mask_rate,
                recompose: aug.recompose,
            },
            "ima" => AugStrategy::Ima {
                backbone,
                imputation_rate: aug.imputation_rate,
                mask_rate,
                alpha: aug.mixup_alpha,
                recompose: aug.recompose,
                per_sample_lambda: aug.per_sample_lambda,
            },
            other => {
                return Err(ConfigError::UnknownStrategy {
                    tag: other.to_string(),
                })
            }
        };
        Ok(strategy)
    }

    /// Expands the strategy list into report rows: backbone-free
    /// strategies appear once; `ia`/`ima` appear once per backbone.
    pub fn expand_strategies(&self) -> Result<Vec<(String, AugStrategy)>, ConfigError> {
        let backbones = self.backbone_tags()?;
        let mut rows = Vec::new();
        for tag in &self.strategies {
            if tag == "ia" || tag == "ima" {
                for &b in &backbones {
                    let s = self.strategy_for(tag, b)?;
                    rows.push((s.row_name(), s));
                }
            } else {
                let s = self.strategy_for(tag, BackboneTag::Linear)?;
                rows.push((s.row_name(), s));
            }
        }
        Ok(rows)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let DatasetSource::Csv { path } = &self.dataset {
            if !Path::new(path).is_file() {
                return Err(invalid("dataset.path", format!("file not found: {path}")));
            }
        }
        if let DatasetSource::Synthetic { spec } = &self.dataset {
            if spec.n_channels < 1 || spec.length < 2 {
                return Err(invalid(
                    "dataset.spec",
                    "need n_channels >= 1 and length >= 2",
                ));
            }
            if spec.periods.len() != spec.n_channels || spec.slopes.len() != spec.n_channels {
                return Err(invalid(
                    "dataset.spec",
                    "periods and slopes must have one entry per channel",
                ));
            }
            if !(spec.noise_sigma >= 0.0) {
                return Err(invalid("dataset.spec.noise_sigma", "must be >= 0"));
            }
        }
        if self.seq_len < 1 || self.pred_len < 1 {
            return Err(invalid("seq_len/pred_len", "must be >= 1"));
        }
        if self.stride < 1 {
            return Err(invalid("stride", "must be >= 1"));
        }
        if self.kernel_size < 1 || self.kernel_size % 2 == 0 {
            return Err(invalid("kernel_size", "must be odd and >= 1"));
        }
        let (a, b, c) = self.split;
        if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "split",
                format!("ratios must be positive and sum to 1, got ({a}, {b}, {c})"),
            ));
        }
        if self.strategies.is_empty() {
            return Err(invalid("strategies", "need at least one strategy"));
        }
        for tag in &self.strategies {
            if !STRATEGY_TAGS.contains(&tag.as_str()) {
                return Err(ConfigError::UnknownStrategy { tag: tag.clone() });
            }
        }
        if self.backbones.is_empty() {
            return Err(invalid("backbones", "need at least one backbone"));
        }
        self.backbone_tags()?;
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "need at least one seed"));
        }
        if self.train.batch_size < 1 {
            return Err(invalid("train.batch_size", "must be >= 1"));
        }
        if self.ssr.batch_size < 1 {
            return Err(invalid("ssr.batch_size", "must be >= 1"));
        }
        self.train.adam.validate("train.adam")?;
        self.ssr.adam.validate("ssr.adam")?;

        let aug = &self.aug;
        for (key, rate) in [
            ("ssr.mask_rate", self.ssr.mask_rate),
            ("aug.imputation_rate", aug.imputation_rate),
            ("aug.mask_rate", self.effective_mask_rate()),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(invalid(key, format!("must be in [0,1], got {rate}")));
            }
        }
        if !(aug.jitter_sigma >= 0.0) {
            return Err(invalid("aug.jitter_sigma", "must be >= 0"));
        }
        if !(aug.scaling_sigma >= 0.0) {
            return Err(invalid("aug.scaling_sigma", "must be >= 0"));
        }
        if !(aug.warp_ratio > 0.0 && aug.warp_ratio <= 1.0) {
            return Err(invalid("aug.warp_ratio", "must be in (0,1]"));
        }
        if aug.warp_scales.is_empty() || aug.warp_scales.iter().any(|&s| !(s > 0.0)) {
            return Err(invalid("aug.warp_scales", "need positive scales"));
        }
        if !(aug.slide_ratio > 0.0 && aug.slide_ratio <= 1.0) {
            return Err(invalid("aug.slide_ratio", "must be in (0,1]"));
        }
        if aug.max_segments < 1 {
            return Err(invalid("aug.max_segments", "must be >= 1"));
        }
        if !(aug.mixup_alpha > 0.0) {
            return Err(invalid("aug.mixup_alpha", "must be > 0"));
        }
        Ok(())
    }
}

/// Parses and validates a config from JSON text. Used directly by the
/// fuzz harness.
pub fn config_from_json(json: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(json).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses, and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    config_from_json(&text)
}
