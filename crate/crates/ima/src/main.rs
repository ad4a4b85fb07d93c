//! Command-line front end: synthetic data generation, SSR pretraining,
//! single training runs, evaluation, the full bench sweep, and grid
//! search. Flags mirror config keys and override them.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 training error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ima::augment::BackboneTag;
use ima::config::{parse_config, DatasetSource, ExperimentConfig, ReportFormat};
use ima::data::{gen_synthetic, write_csv, SyntheticSpec};
use ima::experiment::{
    grid_search, prepare_data, pretrain_imputers, run_experiment, DEFAULT_GRID,
};
use ima::models::{
    load_forecaster, load_imputer, save_forecaster, DLinearForecaster, Imputer,
};
use ima::numerics::Rng;
use ima::pipeline::{
    evaluate, ssr_train, streams, train_forecaster, write_history, TrainError,
};
use ima::ImaError;

#[derive(Parser)]
#[command(name = "ima", about = "Imputation-based mixup augmentation benchmark", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the experiment-driven subcommands. Unset flags fall
/// back to the config file, which falls back to the documented defaults.
#[derive(Args)]
struct CommonOpts {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV path (overrides the config's dataset).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seq_len: Option<usize>,
    #[arg(long)]
    pred_len: Option<usize>,
    /// Forecaster training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// SSR pretraining epochs.
    #[arg(long)]
    ssr_epochs: Option<usize>,
    /// Comma-separated strategy tags.
    #[arg(long)]
    strategies: Option<String>,
    /// Comma-separated imputer backbones (linear, mlp).
    #[arg(long)]
    backbones: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Report format: csv, md, or json.
    #[arg(long)]
    format: Option<String>,
    /// IA/IMA mask rate (also used by SSR).
    #[arg(long)]
    mask_rate: Option<f64>,
    /// IA/IMA per-batch gate probability.
    #[arg(long)]
    imputation_rate: Option<f64>,
    /// Mixup Beta(alpha, alpha) concentration.
    #[arg(long)]
    alpha: Option<f64>,
}

impl CommonOpts {
    fn build_config(&self) -> Result<ExperimentConfig, ImaError> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(csv) = &self.csv {
            cfg.dataset = DatasetSource::Csv {
                path: csv.display().to_string(),
            };
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.display().to_string();
        }
        if let Some(v) = self.seq_len {
            cfg.seq_len = v;
        }
        if let Some(v) = self.pred_len {
            cfg.pred_len = v;
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.ssr_epochs {
            cfg.ssr.epochs = v;
        }
        if let Some(s) = &self.strategies {
            cfg.strategies = s.split(',').map(|t| t.trim().to_string()).collect();
        }
        if let Some(s) = &self.backbones {
            cfg.backbones = s.split(',').map(|t| t.trim().to_string()).collect();
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = s
                .split(',')
                .map(|t| {
                    t.trim().parse::<u64>().map_err(|e| {
                        ImaError::Config(ima::config::ConfigError::Invalid {
                            key: "seeds".to_string(),
                            message: e.to_string(),
                        })
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(f) = &self.format {
            cfg.report_format = ReportFormat::from_str(f)?;
        }
        if let Some(v) = self.mask_rate {
            cfg.ssr.mask_rate = v;
            cfg.aug.mask_rate = Some(v);
        }
        if let Some(v) = self.imputation_rate {
            cfg.aug.imputation_rate = v;
        }
        if let Some(v) = self.alpha {
            cfg.aug.mixup_alpha = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multivariate series as an ETT-format CSV.
    Synth {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        channels: usize,
        #[arg(long, default_value_t = 2000)]
        length: usize,
        /// Comma-separated per-channel periods; recycled if shorter.
        #[arg(long)]
        periods: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// SSR-pretrain the imputer(s) and write checkpoints.
    SsrTrain(CommonOpts),
    /// Train one forecaster under one strategy and report val metrics.
    Train {
        #[command(flatten)]
        common: CommonOpts,
        /// Strategy tag (baseline, jitter, ..., ia, ima).
        #[arg(long, default_value = "baseline")]
        strategy: String,
        /// Imputer backbone for ia/ima.
        #[arg(long, default_value = "mlp")]
        backbone: String,
        /// Reuse an existing imputer checkpoint instead of pretraining.
        #[arg(long)]
        imputer: Option<PathBuf>,
    },
    /// Evaluate a forecaster checkpoint on the test split.
    Eval {
        #[command(flatten)]
        common: CommonOpts,
        /// Forecaster checkpoint path.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run the full strategy sweep and emit the delta report.
    Bench(CommonOpts),
    /// Grid-search (mask_rate, imputation_rate) for IMA per backbone.
    Grid {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated mask rates; defaults to the standard grid.
        #[arg(long)]
        mask_rates: Option<String>,
        /// Comma-separated imputation rates; defaults likewise.
        #[arg(long)]
        imputation_rates: Option<String>,
    },
}

fn parse_rates(s: &str, key: &str) -> Result<Vec<f64>, ImaError> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| {
                ImaError::Config(ima::config::ConfigError::Invalid {
                    key: key.to_string(),
                    message: e.to_string(),
                })
            })
        })
        .collect()
}

fn ensure_dir(path: &Path) -> Result<(), ImaError> {
    std::fs::create_dir_all(path).map_err(|source| ImaError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_synth(
    out: &Path,
    channels: usize,
    length: usize,
    periods: Option<&str>,
    noise: f64,
    seed: u64,
) -> Result<(), ImaError> {
    let base = SyntheticSpec::default();
    let periods = match periods {
        Some(s) => parse_rates(s, "periods")?,
        None => base.periods.clone(),
    };
    let spec = SyntheticSpec {
        n_channels: channels,
        length,
        periods: (0..channels).map(|c| periods[c % periods.len()]).collect(),
        slopes: (0..channels).map(|c| base.slopes[c % base.slopes.len()]).collect(),
        noise_sigma: noise,
    };
    let raw = gen_synthetic(&spec, &mut Rng::derive(seed, streams::SYNTHETIC))?;
    write_csv(&raw, out)?;
    println!("wrote {} rows x {} channels to {}", length, channels, out.display());
    Ok(())
}

fn cmd_ssr_train(common: &CommonOpts) -> Result<(), ImaError> {
    let cfg = common.build_config()?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;
    let data = prepare_data(&cfg)?;
    for (backbone, _) in pretrain_imputers(&cfg, &data, &out_dir)? {
        println!(
            "wrote {}",
            out_dir
                .join(format!("checkpoint_{}.bin", backbone.as_str()))
                .display()
        );
    }
    Ok(())
}

fn cmd_train(
    common: &CommonOpts,
    strategy_tag: &str,
    backbone: &str,
    imputer_path: Option<&Path>,
) -> Result<(), ImaError> {
    let cfg = common.build_config()?;
    let backbone = BackboneTag::from_str(backbone)
        .map_err(|e| TrainError::Configuration(e.to_string()))?;
    let strategy = cfg.strategy_for(strategy_tag, backbone)?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;
    let data = prepare_data(&cfg)?;

    let imputer: Option<Imputer> = if strategy.needs_imputer() {
        Some(match imputer_path {
            Some(p) => load_imputer(p).map_err(TrainError::from)?,
            None => {
                let mut init_rng = Rng::derive(cfg.data_seed, streams::IMPUTER_INIT);
                let mut imp = Imputer::new(backbone, cfg.seq_len, &mut init_rng)
                    .map_err(TrainError::from)?;
                ssr_train(&mut imp, &data.train, &cfg.ssr.to_ssr_config(cfg.data_seed))?;
                imp
            }
        })
    } else {
        None
    };

    let seed = cfg.seeds[0];
    let mut g = DLinearForecaster::new(
        cfg.seq_len,
        cfg.pred_len,
        cfg.kernel_size,
        &mut Rng::derive(seed, streams::FORECASTER_INIT),
    )
    .map_err(TrainError::from)?;
    let history = train_forecaster(
        &mut g,
        imputer.as_ref(),
        &data.train,
        &data.val,
        &strategy,
        &cfg.train.to_train_config(seed),
    )?;
    let row = strategy.row_name();
    write_history(&history, &out_dir.join(format!("history_{row}_{seed}.csv")))?;
    let ckpt = out_dir.join("forecaster.bin");
    save_forecaster(&g, &ckpt).map_err(TrainError::from)?;
    let (val_mse, val_mae) =
        evaluate(&g, &data.val, cfg.train.batch_size, cfg.target_channel)?;
    println!("strategy={row} seed={seed} val_mse={val_mse} val_mae={val_mae}");
    println!("wrote {}", ckpt.display());
    Ok(())
}

fn cmd_eval(common: &CommonOpts, checkpoint: &Path) -> Result<(), ImaError> {
    let cfg = common.build_config()?;
    let data = prepare_data(&cfg)?;
    let g = load_forecaster(checkpoint).map_err(TrainError::from)?;
    let (mse, mae) = evaluate(&g, &data.test, cfg.train.batch_size, cfg.target_channel)?;
    println!("test_mse={mse} test_mae={mae}");
    Ok(())
}

fn cmd_bench(common: &CommonOpts) -> Result<(), ImaError> {
    let cfg = common.build_config()?;
    let table = run_experiment(&cfg)?;
    let path = PathBuf::from(&cfg.out_dir)
        .join(format!("report.{}", cfg.report_format.extension()));
    println!(
        "baseline mse={} mae={} ({} strategy rows)",
        table.baseline_mse,
        table.baseline_mae,
        table.rows.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_grid(
    common: &CommonOpts,
    mask_rates: Option<&str>,
    imputation_rates: Option<&str>,
) -> Result<(), ImaError> {
    let cfg = common.build_config()?;
    let mask_rates = match mask_rates {
        Some(s) => parse_rates(s, "mask_rates")?,
        None => DEFAULT_GRID.to_vec(),
    };
    let imputation_rates = match imputation_rates {
        Some(s) => parse_rates(s, "imputation_rates")?,
        None => DEFAULT_GRID.to_vec(),
    };
    let (selections, cells) = grid_search(&cfg, &mask_rates, &imputation_rates)?;
    for s in &selections {
        println!(
            "backbone={} best mask_rate={} imputation_rate={} val_mse={}",
            s.backbone.as_str(),
            s.mask_rate,
            s.imputation_rate,
            s.val_mse
        );
    }
    println!(
        "wrote {} ({} cells)",
        PathBuf::from(&cfg.out_dir).join("grid.csv").display(),
        cells.len()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), ImaError> {
    match &cli.command {
        Command::Synth {
            out,
            channels,
            length,
            periods,
            noise,
            seed,
        } => cmd_synth(out, *channels, *length, periods.as_deref(), *noise, *seed),
        Command::SsrTrain(common) => cmd_ssr_train(common),
        Command::Train {
            common,
            strategy,
            backbone,
            imputer,
        } => cmd_train(common, strategy, backbone, imputer.as_deref()),
        Command::Eval { common, checkpoint } => cmd_eval(common, checkpoint),
        Command::Bench(common) => cmd_bench(common),
        Command::Grid {
            common,
            mask_rates,
            imputation_rates,
        } => cmd_grid(common, mask_rates.as_deref(), imputation_rates.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
