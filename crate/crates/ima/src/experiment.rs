//! Experiment orchestration: data preparation, SSR pretraining per
//! backbone, the (strategy, seed) sweep behind `bench`, and grid search
//! over (mask_rate, imputation_rate).
//!
//! Runs are deterministic: every consumer draws from a seed-derived
//! stream, workers write into preallocated slots, and report assembly
//! follows config declaration order, so reruns reproduce report files
//! byte for byte. `IMA_BENCH_THREADS` caps the worker count.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::augment::{AugStrategy, BackboneTag};
use crate::config::{DatasetSource, ExperimentConfig};
use crate::data::{
    apply_scaler, fit_scaler, gen_synthetic, load_csv, make_windows, split, WindowDataset,
};
use crate::models::{save_imputer, DLinearForecaster, Imputer};
use crate::pipeline::{
    evaluate, ssr_train, streams, train_forecaster, write_history, TrainError,
};
use crate::report::{emit_report, DeltaRow, ResultTable};
use crate::{numerics::Rng, ImaError};

/// Standardized sliding-window splits plus a label for the report.
pub struct PreparedData {
    pub label: String,
    pub train: WindowDataset,
    pub val: WindowDataset,
    pub test: WindowDataset,
}

/// Loads or generates the raw series, splits it, fits the scaler on the
/// training split only, and cuts windows per split.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData, ImaError> {
    let (label, raw) = match &cfg.dataset {
        DatasetSource::Csv { path } => {
            let raw = load_csv(Path::new(path))?;
            (path.clone(), raw)
        }
        DatasetSource::Synthetic { spec } => {
            let mut rng = Rng::derive(cfg.data_seed, streams::SYNTHETIC);
            ("synthetic".to_string(), gen_synthetic(spec, &mut rng)?)
        }
    };
    let (train_raw, val_raw, test_raw) = split(&raw, cfg.split)?;
    let scaler = fit_scaler(&train_raw)?;
    let cut = |raw| -> Result<WindowDataset, ImaError> {
        let std = apply_scaler(&scaler, raw)?;
        Ok(make_windows(std, cfg.seq_len, cfg.pred_len, cfg.stride)?)
    };
    Ok(PreparedData {
        label,
        train: cut(&train_raw)?,
        val: cut(&val_raw)?,
        test: cut(&test_raw)?,
    })
}

fn worker_count() -> usize {
    std::env::var("IMA_BENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn ensure_dir(path: &Path) -> Result<(), ImaError> {
    std::fs::create_dir_all(path).map_err(|source| ImaError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// SSR-trains one imputer per configured backbone on the training
/// windows and checkpoints each as `checkpoint_<backbone>.bin`.
pub fn pretrain_imputers(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    out_dir: &Path,
) -> Result<Vec<(BackboneTag, Imputer)>, ImaError> {
    let mut imputers = Vec::new();
    for backbone in cfg.backbone_tags()? {
        let mut init_rng = Rng::derive(cfg.data_seed, streams::IMPUTER_INIT);
        let mut imputer = Imputer::new(backbone, cfg.seq_len, &mut init_rng)
            .map_err(TrainError::from)?;
        let ssr_cfg = cfg.ssr.to_ssr_config(cfg.data_seed);
        ssr_train(&mut imputer, &data.train, &ssr_cfg)?;
        let path = out_dir.join(format!("checkpoint_{}.bin", backbone.as_str()));
        save_imputer(&imputer, &path)?;
        imputers.push((backbone, imputer));
    }
    Ok(imputers)
}

struct RunResult {
    test_mse: f64,
    test_mae: f64,
    best_val_mse: f64,
}

/// One (strategy, seed) run: fresh forecaster, train, evaluate on
/// `eval_ds`, write the loss history next to the report.
fn run_one(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    strategy: &AugStrategy,
    imputer: Option<&Imputer>,
    seed: u64,
    row_name: &str,
    out_dir: Option<&Path>,
) -> Result<RunResult, TrainError> {
    let mut g = DLinearForecaster::new(
        cfg.seq_len,
        cfg.pred_len,
        cfg.kernel_size,
        &mut Rng::derive(seed, streams::FORECASTER_INIT),
    )?;
    let train_cfg = cfg.train.to_train_config(seed);
    let history = train_forecaster(&mut g, imputer, &data.train, &data.val, strategy, &train_cfg)?;
    if let Some(dir) = out_dir {
        write_history(&history, &dir.join(format!("history_{row_name}_{seed}.csv")))?;
    }
    let best_val_mse = history
        .iter()
        .map(|e| e.val_mse)
        .fold(f64::INFINITY, f64::min);
    let (test_mse, test_mae) =
        evaluate(&g, &data.test, train_cfg.batch_size, cfg.target_channel)?;
    Ok(RunResult {
        test_mse,
        test_mae,
        best_val_mse,
    })
}

struct Job {
    row_name: String,
    strategy: AugStrategy,
    seed: u64,
}

/// Runs independent jobs on up to `IMA_BENCH_THREADS` workers, keeping
/// results in job order.
fn run_jobs(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    imputers: &[(BackboneTag, Imputer)],
    jobs: &[Job],
    out_dir: Option<&Path>,
) -> Result<Vec<RunResult>, TrainError> {
    let imputer_for = |s: &AugStrategy| -> Option<&Imputer> {
        s.backbone().and_then(|b| {
            imputers
                .iter()
                .find(|(tag, _)| *tag == b)
                .map(|(_, imp)| imp)
        })
    };
    let workers = worker_count().min(jobs.len().max(1));
    if workers <= 1 {
        let mut results = Vec::with_capacity(jobs.len());
        for job in jobs {
            let r = run_one(
                cfg,
                data,
                &job.strategy,
                imputer_for(&job.strategy),
                job.seed,
                &job.row_name,
                out_dir,
            )
            .map_err(|e| e.in_run(&job.row_name, job.seed))?;
            results.push(r);
        }
        return Ok(results);
    }

    let slots: Mutex<Vec<Option<Result<RunResult, TrainError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next: Mutex<usize> = Mutex::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut n = next.lock().unwrap();
                    if *n >= jobs.len() {
                        return;
                    }
                    let i = *n;
                    *n += 1;
                    i
                };
                let job = &jobs[idx];
                let r = run_one(
                    cfg,
                    data,
                    &job.strategy,
                    imputer_for(&job.strategy),
                    job.seed,
                    &job.row_name,
                    out_dir,
                )
                .map_err(|e| e.in_run(&job.row_name, job.seed));
                slots.lock().unwrap()[idx] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job filled its slot"))
        .collect()
}

/// The full bench: SSR pretraining, the (strategy, seed) sweep, mean
/// aggregation over seeds, deltas against this run's own baseline, and
/// all artifacts (checkpoints, histories, per-seed sidecar, report)
/// under the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable, ImaError> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;
    let data = prepare_data(cfg)?;
    let rows = cfg.expand_strategies()?;
    let needs_imputer = rows.iter().any(|(_, s)| s.needs_imputer());
    let imputers = if needs_imputer {
        pretrain_imputers(cfg, &data, &out_dir)?
    } else {
        Vec::new()
    };

    // The baseline always runs: deltas are taken against it even when
    // it is not listed as a strategy.
    let mut jobs = Vec::new();
    for seed in &cfg.seeds {
        jobs.push(Job {
            row_name: "baseline".to_string(),
            strategy: AugStrategy::Baseline,
            seed: *seed,
        });
    }
    for (row_name, strategy) in &rows {
        if *strategy == AugStrategy::Baseline {
            continue; // already queued
        }
        for seed in &cfg.seeds {
            jobs.push(Job {
                row_name: row_name.clone(),
                strategy: strategy.clone(),
                seed: *seed,
            });
        }
    }

    let results = run_jobs(cfg, &data, &imputers, &jobs, Some(&out_dir))?;

    // Per-seed sidecar, in job order.
    let mut sidecar = String::from("row,seed,mse,mae\n");
    for (job, r) in jobs.iter().zip(&results) {
        sidecar.push_str(&format!(
            "{},{},{},{}\n",
            job.row_name, job.seed, r.test_mse, r.test_mae
        ));
    }
    let sidecar_path = out_dir.join("per_seed.csv");
    std::fs::write(&sidecar_path, sidecar).map_err(|source| ImaError::Io {
        path: sidecar_path.display().to_string(),
        source,
    })?;

    let n_seeds = cfg.seeds.len() as f64;
    let mean_for = |row: &str| -> (f64, f64) {
        let (mut mse, mut mae) = (0.0, 0.0);
        for (job, r) in jobs.iter().zip(&results) {
            if job.row_name == row {
                mse += r.test_mse;
                mae += r.test_mae;
            }
        }
        (mse / n_seeds, mae / n_seeds)
    };

    let (baseline_mse, baseline_mae) = mean_for("baseline");
    let mut table = ResultTable {
        dataset: data.label.clone(),
        baseline_mse,
        baseline_mae,
        rows: Vec::new(),
    };
    // A configured baseline strategy still gets its row: a self-delta
    // of exactly zero, reusing the single baseline run.
    for (row_name, strategy) in &rows {
        if *strategy == AugStrategy::Baseline {
            table.rows.push(DeltaRow {
                name: row_name.clone(),
                delta_mse: 0.0,
                delta_mae: 0.0,
            });
            continue;
        }
        let (mse, mae) = mean_for(row_name);
        table.rows.push(DeltaRow {
            name: row_name.clone(),
            delta_mse: mse - baseline_mse,
            delta_mae: mae - baseline_mae,
        });
    }

    let report_path = out_dir.join(format!("report.{}", cfg.report_format.extension()));
    emit_report(&table, cfg.report_format, &report_path)?;
    Ok(table)
}

/// One grid-search cell result.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub backbone: BackboneTag,
    pub mask_rate: f64,
    pub imputation_rate: f64,
    pub val_mse: f64,
}

/// The winning cell per backbone.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSelection {
    pub backbone: BackboneTag,
    pub mask_rate: f64,
    pub imputation_rate: f64,
    pub val_mse: f64,
}

pub const DEFAULT_GRID: [f64; 4] = [0.125, 0.25, 0.375, 0.5];

/// Exhaustive IMA grid search. The imputer is SSR-retrained per cell
/// (its mask rate is part of the cell); model and optimizer state are
/// never reused across cells. Selection minimizes the mean best
/// validation MSE over the configured seeds; ties break toward the
/// smaller mask_rate, then the smaller imputation_rate. The full grid
/// lands in `grid.csv`.
pub fn grid_search(
    cfg: &ExperimentConfig,
    mask_rates: &[f64],
    imputation_rates: &[f64],
) -> Result<(Vec<GridSelection>, Vec<GridCell>), ImaError> {
    cfg.validate()?;
    if mask_rates.is_empty() || imputation_rates.is_empty() {
        return Err(ImaError::Config(crate::config::ConfigError::Invalid {
            key: "grid".to_string(),
            message: "mask_rates and imputation_rates must be nonempty".to_string(),
        }));
    }
    for &r in mask_rates.iter().chain(imputation_rates) {
        if !(0.0..=1.0).contains(&r) {
            return Err(ImaError::Config(crate::config::ConfigError::Invalid {
                key: "grid".to_string(),
                message: format!("grid values must be in [0,1], got {r}"),
            }));
        }
    }
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;
    let data = prepare_data(cfg)?;

    let mut cells = Vec::new();
    let mut selections = Vec::new();
    for backbone in cfg.backbone_tags()? {
        let mut best: Option<GridCell> = None;
        for &mask_rate in mask_rates {
            // The imputer depends on the cell's mask rate: retrain SSR.
            let mut init_rng = Rng::derive(cfg.data_seed, streams::IMPUTER_INIT);
            let mut imputer = Imputer::new(backbone, cfg.seq_len, &mut init_rng)
                .map_err(TrainError::from)?;
            let mut ssr_cfg = cfg.ssr.to_ssr_config(cfg.data_seed);
            ssr_cfg.mask_rate = mask_rate;
            ssr_train(&mut imputer, &data.train, &ssr_cfg)?;
            let imputers = vec![(backbone, imputer)];

            for &imputation_rate in imputation_rates {
                let strategy = AugStrategy::Ima {
                    backbone,
                    imputation_rate,
                    mask_rate,
                    alpha: cfg.aug.mixup_alpha,
                    recompose: cfg.aug.recompose,
                    per_sample_lambda: cfg.aug.per_sample_lambda,
                };
                let row_name = format!(
                    "grid_{}_{mask_rate}_{imputation_rate}",
                    backbone.as_str()
                );
                let jobs: Vec<Job> = cfg
                    .seeds
                    .iter()
                    .map(|&seed| Job {
                        row_name: row_name.clone(),
                        strategy: strategy.clone(),
                        seed,
                    })
                    .collect();
                let results = run_jobs(cfg, &data, &imputers, &jobs, None)?;
                let val_mse = results.iter().map(|r| r.best_val_mse).sum::<f64>()
                    / cfg.seeds.len() as f64;
                let cell = GridCell {
                    backbone,
                    mask_rate,
                    imputation_rate,
                    val_mse,
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        cell.val_mse < b.val_mse
                            || (cell.val_mse == b.val_mse
                                && (cell.mask_rate, cell.imputation_rate)
                                    < (b.mask_rate, b.imputation_rate))
                    }
                };
                if better {
                    best = Some(cell.clone());
                }
                cells.push(cell);
            }
        }
        let b = best.expect("nonempty grid");
        selections.push(GridSelection {
            backbone: b.backbone,
            mask_rate: b.mask_rate,
            imputation_rate: b.imputation_rate,
            val_mse: b.val_mse,
        });
    }

    let mut csv = String::from("backbone,mask_rate,imputation_rate,val_mse\n");
    for c in &cells {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            c.backbone.as_str(),
            c.mask_rate,
            c.imputation_rate,
            c.val_mse
        ));
    }
    let grid_path = out_dir.join("grid.csv");
    std::fs::write(&grid_path, csv).map_err(|source| ImaError::Io {
        path: grid_path.display().to_string(),
        source,
    })?;
    Ok((selections, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::config_from_json;

    fn tiny_config(dir: &Path, strategies: &str) -> ExperimentConfig {
        let json = format!(
            r#"{{
              "dataset": {{"kind": "synthetic", "spec": {{
                "n_channels": 2, "length": 400,
                "periods": [12.0, 20.0], "slopes": [0.0, 0.0],
                "noise_sigma": 0.02
              }}}},
              "seq_len": 16, "pred_len": 4, "stride": 2, "kernel_size": 5,
              "strategies": {strategies},
              "backbones": ["linear"],
              "seeds": [0],
              "train": {{"epochs": 2, "batch_size": 16}},
              "ssr": {{"epochs": 2, "batch_size": 16}},
              "out_dir": "{}"
            }}"#,
            dir.display()
        );
        config_from_json(&json).unwrap()
    }

    #[test]
    fn baseline_only_report_has_a_zero_delta_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), r#"["baseline"]"#);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].name, "baseline");
        assert_eq!(table.rows[0].delta_mse, 0.0);
        assert_eq!(table.rows[0].delta_mae, 0.0);
        assert!(table.baseline_mse.is_finite());
        assert!(dir.path().join("report.csv").is_file());
        assert!(dir.path().join("per_seed.csv").is_file());
        assert!(dir.path().join("history_baseline_0.csv").is_file());
    }

    #[test]
    fn deltas_match_per_row_metrics_and_baseline_is_implicit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), r#"["jitter", "ia"]"#);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].name, "jitter");
        assert_eq!(table.rows[1].name, "ia_linear");
        for row in &table.rows {
            assert!(row.delta_mse.is_finite());
            assert!(row.delta_mae.is_finite());
        }
        assert!(dir.path().join("checkpoint_linear.bin").is_file());
    }

    #[test]
    fn reruns_reproduce_the_report_byte_identically() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), r#"["mixup"]"#);
        run_experiment(&cfg).unwrap();
        let first = std::fs::read(dir.path().join("report.csv")).unwrap();
        run_experiment(&cfg).unwrap();
        let second = std::fs::read(dir.path().join("report.csv")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn two_seeds_mean_matches_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path(), r#"["vflip"]"#);
        cfg.seeds = vec![0, 1];
        let table = run_experiment(&cfg).unwrap();
        let sidecar = std::fs::read_to_string(dir.path().join("per_seed.csv")).unwrap();
        let mut base = Vec::new();
        let mut vflip = Vec::new();
        for line in sidecar.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let mse: f64 = f[2].parse().unwrap();
            match f[0] {
                "baseline" => base.push(mse),
                "vflip" => vflip.push(mse),
                other => panic!("unexpected row {other}"),
            }
        }
        assert_eq!(base.len(), 2);
        assert_eq!(vflip.len(), 2);
        let delta = vflip.iter().sum::<f64>() / 2.0 - base.iter().sum::<f64>() / 2.0;
        assert!((table.rows[0].delta_mse - delta).abs() <= 1e-12);
    }

    #[test]
    fn single_cell_grid_returns_that_cell() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), r#"["ima"]"#);
        let (selections, cells) = grid_search(&cfg, &[0.375], &[0.125]).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(selections.len(), 1);
        assert_eq!(selections[0].mask_rate, 0.375);
        assert_eq!(selections[0].imputation_rate, 0.125);
        let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        assert_eq!(grid.lines().count(), 2);
    }

    #[test]
    fn grid_tie_break_prefers_smaller_rates() {
        // With zero training epochs every cell has an empty history, so
        // val MSE is +inf everywhere: a deliberate all-way tie.
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path(), r#"["ima"]"#);
        cfg.train.epochs = 0;
        let (selections, cells) =
            grid_search(&cfg, &[0.5, 0.25], &[0.375, 0.125]).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(selections[0].mask_rate, 0.25);
        assert_eq!(selections[0].imputation_rate, 0.125);
    }

    #[test]
    fn empty_grid_is_an_argument_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), r#"["ima"]"#);
        let err = grid_search(&cfg, &[], &[0.1]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
