//! Dataset ingestion, standardization, and sliding-window batching.
//!
//! Sources are either ETT-format CSV files (`date` header column followed
//! by numeric feature columns) or a seeded synthetic sine+trend+noise
//! generator. Series are split chronologically, standardized with
//! train-split statistics only, and cut into contiguous (X, Y) windows.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Matrix, NumericsError, Rng, Tensor3};

/// Floor applied to per-feature standard deviations so constant columns
/// standardize to zero instead of dividing by zero.
pub const EPSILON_STD: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A raw multivariate series: one timestamp per row, `N` feature columns.
#[derive(Debug, Clone)]
pub struct RawSeries {
    pub timestamps: Vec<String>,
    pub values: Matrix,
    pub feature_names: Vec<String>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn n_features(&self) -> usize {
        self.values.cols()
    }
}

/// Parses ETT-format CSV text. First header cell must be `date`, the
/// remaining header cells name numeric columns; no quoting, no missing
/// cells.
pub fn parse_csv(text: &str) -> Result<RawSeries, DataError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| DataError::Parse {
        row: 0,
        col: 0,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols[0] != "date" {
        return Err(DataError::Parse {
            row: 0,
            col: 0,
            message: format!("first header cell must be \"date\", got {:?}", cols[0]),
        });
    }
    if cols.len() < 2 {
        return Err(DataError::Parse {
            row: 0,
            col: 1,
            message: "header has no feature columns".into(),
        });
    }
    let n = cols.len() - 1;
    let feature_names: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n + 1 {
            return Err(DataError::Parse {
                row,
                col: cells.len(),
                message: format!("expected {} cells, got {}", n + 1, cells.len()),
            });
        }
        timestamps.push(cells[0].to_string());
        for (j, cell) in cells[1..].iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| DataError::Parse {
                row,
                col: j + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    row,
                    col: j + 1,
                    message: format!("non-finite cell {cell:?}"),
                });
            }
            values.push(v);
        }
    }
    let t_total = timestamps.len();
    if t_total < 2 {
        return Err(DataError::Shape(format!(
            "need at least 2 data rows, got {t_total}"
        )));
    }
    Ok(RawSeries {
        timestamps,
        values: Matrix::from_vec(t_total, n, values)?,
        feature_names,
    })
}

pub fn load_csv(path: &Path) -> Result<RawSeries, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text)
}

/// Serializes a series back to the CSV format accepted by [`parse_csv`].
pub fn to_csv(series: &RawSeries) -> String {
    let mut out = String::new();
    out.push_str("date");
    for name in &series.feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (r, ts) in series.timestamps.iter().enumerate() {
        out.push_str(ts);
        for c in 0..series.n_features() {
            let _ = write!(out, ",{}", series.values.get(r, c));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(series: &RawSeries, path: &Path) -> Result<(), DataError> {
    std::fs::write(path, to_csv(series)).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parameters for the synthetic sine+trend+noise generator. Periods and
/// slopes cycle if shorter than `n_channels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_channels: usize,
    pub length: usize,
    pub periods: Vec<f64>,
    pub slopes: Vec<f64>,
    pub noise_sigma: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_channels: 4,
            length: 2000,
            periods: vec![24.0, 48.0, 96.0, 36.0],
            slopes: vec![0.0, 1e-4, -1e-4, 5e-5],
            noise_sigma: 0.05,
        }
    }
}

/// Channel `c` at step `t` is `sin(2 pi t / period_c) + slope_c * t`
/// plus Gaussian noise. Deterministic given the rng.
pub fn gen_synthetic(spec: &SyntheticSpec, rng: &mut Rng) -> Result<RawSeries, DataError> {
    if spec.length < 2 {
        return Err(DataError::InvalidArgument(format!(
            "length must be >= 2, got {}",
            spec.length
        )));
    }
    if spec.n_channels < 1 {
        return Err(DataError::InvalidArgument("n_channels must be >= 1".into()));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(DataError::InvalidArgument(format!(
            "noise_sigma must be >= 0, got {}",
            spec.noise_sigma
        )));
    }
    if spec.periods.is_empty() {
        return Err(DataError::InvalidArgument("periods must be nonempty".into()));
    }
    for &p in &spec.periods {
        if !(p > 0.0) {
            return Err(DataError::InvalidArgument(format!(
                "periods must be positive, got {p}"
            )));
        }
    }
    let slopes = if spec.slopes.is_empty() {
        vec![0.0]
    } else {
        spec.slopes.clone()
    };
    let mut values = Vec::with_capacity(spec.length * spec.n_channels);
    for t in 0..spec.length {
        for c in 0..spec.n_channels {
            let period = spec.periods[c % spec.periods.len()];
            let slope = slopes[c % slopes.len()];
            let mut v = (2.0 * std::f64::consts::PI * t as f64 / period).sin()
                + slope * t as f64;
            if spec.noise_sigma > 0.0 {
                v += rng.sample_gaussian(0.0, spec.noise_sigma)?;
            }
            values.push(v);
        }
    }
    let timestamps = (0..spec.length).map(synthetic_timestamp).collect();
    let feature_names = (0..spec.n_channels).map(|c| format!("ch{c}")).collect();
    Ok(RawSeries {
        timestamps,
        values: Matrix::from_vec(spec.length, spec.n_channels, values)?,
        feature_names,
    })
}

/// Hourly timestamps starting 2020-01-01, formatted like the ETT files.
fn synthetic_timestamp(step: usize) -> String {
    const DAYS_IN_MONTH: [u64; 12] = [31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let hours = step as u64;
    let hour = hours % 24;
    let mut days = hours / 24;
    let mut year = 2020u64;
    let mut month = 0usize;
    loop {
        let leap = year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
        let dim = if month == 1 && !leap {
            28
        } else {
            DAYS_IN_MONTH[month]
        };
        if days < dim {
            break;
        }
        days -= dim;
        month += 1;
        if month == 12 {
            month = 0;
            year += 1;
        }
    }
    format!(
        "{year:04}-{:02}-{:02} {hour:02}:00:00",
        month + 1,
        days + 1
    )
}

/// Chronological train/val/test split with boundaries at the floor of the
/// cumulative ratios.
pub fn split(
    raw: &RawSeries,
    ratios: (f64, f64, f64),
) -> Result<(RawSeries, RawSeries, RawSeries), DataError> {
    let (a, b, c) = ratios;
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(DataError::InvalidArgument(format!(
            "split ratios must all be positive, got ({a}, {b}, {c})"
        )));
    }
    if ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(DataError::InvalidArgument(format!(
            "split ratios must sum to 1, got {}",
            a + b + c
        )));
    }
    let t = raw.len();
    // The epsilon keeps boundaries stable when t * ratio is an integer
    // up to floating-point noise (e.g. 10 * 0.7).
    let end_train = (t as f64 * a + 1e-9).floor() as usize;
    let end_val = (t as f64 * (a + b) + 1e-9).floor() as usize;
    let take = |lo: usize, hi: usize| -> RawSeries {
        let n = raw.n_features();
        let mut values = Vec::with_capacity((hi - lo) * n);
        for r in lo..hi {
            values.extend_from_slice(raw.values.row(r));
        }
        RawSeries {
            timestamps: raw.timestamps[lo..hi].to_vec(),
            values: Matrix::from_vec(hi - lo, n, values).expect("sliced shape"),
            feature_names: raw.feature_names.clone(),
        }
    };
    Ok((take(0, end_train), take(end_train, end_val), take(end_val, t)))
}

/// Per-feature standardization statistics, fitted on the training split
/// only. Uses the population (1/T) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_scaler(train: &RawSeries) -> Result<Scaler, DataError> {
    let t = train.len();
    if t == 0 {
        return Err(DataError::Shape("cannot fit scaler on empty series".into()));
    }
    let n = train.n_features();
    let mut mean = vec![0.0; n];
    for r in 0..t {
        for (c, m) in mean.iter_mut().enumerate() {
            *m += train.values.get(r, c);
        }
    }
    mean.iter_mut().for_each(|m| *m /= t as f64);
    let mut var = vec![0.0; n];
    for r in 0..t {
        for (c, v) in var.iter_mut().enumerate() {
            let d = train.values.get(r, c) - mean[c];
            *v += d * d;
        }
    }
    let std = var
        .into_iter()
        .map(|v| (v / t as f64).sqrt().max(EPSILON_STD))
        .collect();
    Ok(Scaler { mean, std })
}

pub fn apply_scaler(scaler: &Scaler, raw: &RawSeries) -> Result<Matrix, DataError> {
    let n = raw.n_features();
    if scaler.mean.len() != n {
        return Err(DataError::Shape(format!(
            "scaler fitted on {} features, series has {n}",
            scaler.mean.len()
        )));
    }
    let t = raw.len();
    let mut out = Matrix::zeros(t, n);
    for r in 0..t {
        for c in 0..n {
            out.set(r, c, (raw.values.get(r, c) - scaler.mean[c]) / scaler.std[c]);
        }
    }
    Ok(out)
}

impl Scaler {
    /// Inverse of [`apply_scaler`] for a single standardized value.
    pub fn destandardize(&self, channel: usize, value: f64) -> f64 {
        value * self.std[channel] + self.mean[channel]
    }
}

/// Sliding windows over a standardized series. Window `s` pairs
/// `X = rows [s, s+seq_len)` with `Y = rows [s+seq_len, s+seq_len+pred_len)`.
#[derive(Debug, Clone)]
pub struct WindowDataset {
    pub source: Matrix,
    pub seq_len: usize,
    pub pred_len: usize,
    pub start_indices: Vec<usize>,
}

pub fn make_windows(
    source: Matrix,
    seq_len: usize,
    pred_len: usize,
    stride: usize,
) -> Result<WindowDataset, DataError> {
    if seq_len < 1 || pred_len < 1 || stride < 1 {
        return Err(DataError::InvalidArgument(format!(
            "seq_len, pred_len, stride must all be >= 1, got ({seq_len}, {pred_len}, {stride})"
        )));
    }
    let t_total = source.rows();
    if seq_len + pred_len > t_total {
        return Err(DataError::Shape(format!(
            "window seq_len {seq_len} + pred_len {pred_len} exceeds series length {t_total}"
        )));
    }
    let count = (t_total - seq_len - pred_len) / stride + 1;
    let start_indices = (0..count).map(|i| i * stride).collect();
    Ok(WindowDataset {
        source,
        seq_len,
        pred_len,
        start_indices,
    })
}

impl WindowDataset {
    pub fn len(&self) -> usize {
        self.start_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_indices.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.source.cols()
    }

    /// Materializes the windows at `ids` into a batch.
    pub fn gather(&self, ids: &[usize]) -> Batch {
        let n = self.n_channels();
        let b = ids.len();
        let mut x = Tensor3::zeros(b, self.seq_len, n);
        let mut y = Tensor3::zeros(b, self.pred_len, n);
        for (i, &id) in ids.iter().enumerate() {
            let s = self.start_indices[id];
            for t in 0..self.seq_len {
                for c in 0..n {
                    x.set(i, t, c, self.source.get(s + t, c));
                }
            }
            for t in 0..self.pred_len {
                for c in 0..n {
                    y.set(i, t, c, self.source.get(s + self.seq_len + t, c));
                }
            }
        }
        Batch {
            x,
            y,
            indices: ids.to_vec(),
        }
    }
}

/// One training batch: inputs `X`, targets `Y`, and the window ids they
/// were cut from.
#[derive(Debug, Clone)]
pub struct Batch {
    pub x: Tensor3,
    pub y: Tensor3,
    pub indices: Vec<usize>,
}

/// Iterator over one epoch of batches. Every window appears exactly once;
/// the final short batch is emitted rather than dropped.
pub struct BatchIter<'a> {
    ds: &'a WindowDataset,
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

pub fn batch_iter<'a>(
    ds: &'a WindowDataset,
    batch_size: usize,
    shuffle: bool,
    rng: &mut Rng,
) -> Result<BatchIter<'a>, DataError> {
    if batch_size < 1 {
        return Err(DataError::InvalidArgument("batch_size must be >= 1".into()));
    }
    if ds.is_empty() {
        return Err(DataError::Shape("dataset has no windows".into()));
    }
    let order = if shuffle {
        rng.permutation(ds.len())
    } else {
        (0..ds.len()).collect()
    };
    Ok(BatchIter {
        ds,
        order,
        batch_size,
        pos: 0,
    })
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = self.ds.gather(&self.order[self.pos..end]);
        self.pos = end;
        Some(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rows: &[&str]) -> String {
        let mut s = String::from("date,a,b\n");
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn parse_csv_shape_passthrough() {
        let text = series(&[
            "2020-01-01 00:00:00,1.0,2.0",
            "2020-01-01 01:00:00,3.0,4.0",
            "2020-01-01 02:00:00,5.0,6.0",
        ]);
        let raw = parse_csv(&text).unwrap();
        assert_eq!(raw.len(), 3);
        assert_eq!(raw.n_features(), 2);
        assert_eq!(raw.values.get(2, 1), 6.0);
        assert_eq!(raw.feature_names, vec!["a", "b"]);
    }

    #[test]
    fn parse_csv_requires_date_header() {
        let err = parse_csv("time,a\n1,2\n2,3\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { row: 0, .. }));
    }

    #[test]
    fn parse_csv_ett_width() {
        let mut text = String::from("date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n");
        text.push_str("2016-07-01 00:00:00,1,2,3,4,5,6,7\n");
        text.push_str("2016-07-01 01:00:00,1,2,3,4,5,6,7\n");
        let raw = parse_csv(&text).unwrap();
        assert_eq!(raw.n_features(), 7);
    }

    #[test]
    fn parse_csv_reports_bad_cell_location() {
        let text = series(&["2020-01-01 00:00:00,1.0,oops", "2020-01-01 01:00:00,1,2"]);
        match parse_csv(&text).unwrap_err() {
            DataError::Parse { row, col, .. } => {
                assert_eq!((row, col), (1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_csv_rejects_ragged_rows() {
        let text = series(&["2020-01-01 00:00:00,1.0", "2020-01-01 01:00:00,1,2"]);
        assert!(matches!(
            parse_csv(&text).unwrap_err(),
            DataError::Parse { row: 1, .. }
        ));
    }

    #[test]
    fn parse_csv_rejects_single_row() {
        let text = series(&["2020-01-01 00:00:00,1.0,2.0"]);
        assert!(matches!(parse_csv(&text).unwrap_err(), DataError::Shape(_)));
    }

    #[test]
    fn csv_round_trip() {
        let text = series(&["2020-01-01 00:00:00,1,2", "2020-01-01 01:00:00,3.5,-4"]);
        let raw = parse_csv(&text).unwrap();
        let again = parse_csv(&to_csv(&raw)).unwrap();
        assert_eq!(raw.values, again.values);
        assert_eq!(raw.timestamps, again.timestamps);
    }

    #[test]
    fn synthetic_exact_sine_when_noise_free() {
        let spec = SyntheticSpec {
            n_channels: 1,
            length: 4,
            periods: vec![4.0],
            slopes: vec![0.0],
            noise_sigma: 0.0,
        };
        let raw = gen_synthetic(&spec, &mut Rng::new(0)).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0];
        for (t, e) in expect.iter().enumerate() {
            assert!((raw.values.get(t, 0) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::default();
        let a = gen_synthetic(&spec, &mut Rng::new(5)).unwrap();
        let b = gen_synthetic(&spec, &mut Rng::new(5)).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn synthetic_noise_std_matches_sigma() {
        let spec = SyntheticSpec {
            n_channels: 1,
            length: 100_000,
            periods: vec![48.0],
            slopes: vec![2e-5],
            noise_sigma: 0.1,
        };
        let raw = gen_synthetic(&spec, &mut Rng::new(21)).unwrap();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in 0..spec.length {
            let clean = (2.0 * std::f64::consts::PI * t as f64 / 48.0).sin() + 2e-5 * t as f64;
            let r = raw.values.get(t, 0) - clean;
            sum += r;
            sumsq += r * r;
        }
        let n = spec.length as f64;
        let mean = sum / n;
        let std = (sumsq / n - mean * mean).sqrt();
        assert!((std - 0.1).abs() < 0.01, "std {std}");
    }

    #[test]
    fn synthetic_rejects_bad_period() {
        let spec = SyntheticSpec {
            periods: vec![0.0],
            ..SyntheticSpec::default()
        };
        assert!(gen_synthetic(&spec, &mut Rng::new(0)).is_err());
    }

    fn ramp_series(len: usize) -> RawSeries {
        let values: Vec<f64> = (0..len).map(|t| t as f64).collect();
        RawSeries {
            timestamps: (0..len).map(synthetic_timestamp).collect(),
            values: Matrix::from_vec(len, 1, values).unwrap(),
            feature_names: vec!["a".into()],
        }
    }

    #[test]
    fn split_lengths() {
        let raw = ramp_series(10);
        let (tr, va, te) = split(&raw, (0.7, 0.1, 0.2)).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (7, 1, 2));
        assert_eq!(tr.values.get(0, 0), 0.0);
        assert_eq!(te.values.get(1, 0), 9.0);
    }

    #[test]
    fn split_train_rows_are_prefix() {
        let raw = ramp_series(100);
        let (tr, _, _) = split(&raw, (0.7, 0.1, 0.2)).unwrap();
        assert_eq!(tr.len(), 70);
        assert_eq!(tr.values.get(69, 0), 69.0);
    }

    #[test]
    fn split_rejects_zero_ratio() {
        let raw = ramp_series(10);
        assert!(split(&raw, (1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn scaler_two_point_column() {
        let raw = RawSeries {
            timestamps: vec!["a".into(), "b".into()],
            values: Matrix::from_vec(2, 1, vec![1.0, 3.0]).unwrap(),
            feature_names: vec!["x".into()],
        };
        let s = fit_scaler(&raw).unwrap();
        assert_eq!(s.mean[0], 2.0);
        assert_eq!(s.std[0], 1.0);
        let m = apply_scaler(&s, &raw).unwrap();
        assert_eq!(m.get(0, 0), -1.0);
        assert_eq!(m.get(1, 0), 1.0);
    }

    #[test]
    fn scaler_constant_column_standardizes_to_zero() {
        let raw = RawSeries {
            timestamps: vec!["a".into(), "b".into(), "c".into()],
            values: Matrix::from_vec(3, 1, vec![5.0, 5.0, 5.0]).unwrap(),
            feature_names: vec!["x".into()],
        };
        let s = fit_scaler(&raw).unwrap();
        let m = apply_scaler(&s, &raw).unwrap();
        for r in 0..3 {
            assert_eq!(m.get(r, 0), 0.0);
        }
    }

    #[test]
    fn scaler_no_refit_on_test() {
        let train = ramp_series(50);
        let s = fit_scaler(&train).unwrap();
        let test = RawSeries {
            timestamps: vec!["a".into(), "b".into()],
            values: Matrix::from_vec(2, 1, vec![100.0, 101.0]).unwrap(),
            feature_names: vec!["a".into()],
        };
        let m = apply_scaler(&s, &test).unwrap();
        // Test mean is far from zero under train statistics.
        assert!(m.get(0, 0) > 1.0);
    }

    #[test]
    fn scaler_round_trip() {
        let raw = ramp_series(10);
        let s = fit_scaler(&raw).unwrap();
        let m = apply_scaler(&s, &raw).unwrap();
        for r in 0..10 {
            let back = s.destandardize(0, m.get(r, 0));
            assert!((back - r as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn window_count_formula() {
        let src = Matrix::from_vec(10, 1, (0..10).map(|t| t as f64).collect()).unwrap();
        let ds = make_windows(src, 3, 2, 1).unwrap();
        assert_eq!(ds.len(), 6);
    }

    #[test]
    fn single_window_case() {
        let src = Matrix::from_vec(5, 1, (0..5).map(|t| t as f64).collect()).unwrap();
        let ds = make_windows(src, 3, 2, 1).unwrap();
        assert_eq!(ds.len(), 1);
        let b = ds.gather(&[0]);
        assert_eq!(b.x.values(), &[0.0, 1.0, 2.0]);
        assert_eq!(b.y.values(), &[3.0, 4.0]);
    }

    #[test]
    fn window_too_long_errors() {
        let src = Matrix::zeros(100, 1);
        let err = make_windows(src, 96, 96, 1).unwrap_err();
        assert!(matches!(err, DataError::Shape(_)));
        assert!(err.to_string().contains("96"));
    }

    #[test]
    fn window_target_adjacency() {
        let src = Matrix::from_vec(20, 1, (0..20).map(|t| t as f64).collect()).unwrap();
        let ds = make_windows(src, 4, 3, 2).unwrap();
        for id in 0..ds.len() {
            let b = ds.gather(&[id]);
            assert_eq!(b.x.get(0, 3, 0) + 1.0, b.y.get(0, 0, 0));
        }
    }

    #[test]
    fn batch_iter_partition_and_coverage() {
        let src = Matrix::from_vec(10, 1, (0..10).map(|t| t as f64).collect()).unwrap();
        let ds = make_windows(src, 3, 2, 1).unwrap();
        let batches: Vec<Batch> =
            batch_iter(&ds, 4, false, &mut Rng::new(0)).unwrap().collect();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].x.batch(), 4);
        assert_eq!(batches[1].x.batch(), 2);
        let mut seen: Vec<usize> = batches.iter().flat_map(|b| b.indices.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn batch_iter_shuffle_is_seeded() {
        let src = Matrix::from_vec(30, 1, (0..30).map(|t| t as f64).collect()).unwrap();
        let ds = make_windows(src, 3, 2, 1).unwrap();
        let a: Vec<Vec<usize>> = batch_iter(&ds, 4, true, &mut Rng::new(8))
            .unwrap()
            .map(|b| b.indices)
            .collect();
        let b: Vec<Vec<usize>> = batch_iter(&ds, 4, true, &mut Rng::new(8))
            .unwrap()
            .map(|b| b.indices)
            .collect();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
    }

    #[test]
    fn batch_iter_rejects_empty_dataset() {
        let src = Matrix::from_vec(5, 1, vec![0.0; 5]).unwrap();
        let mut ds = make_windows(src, 3, 2, 1).unwrap();
        ds.start_indices.clear();
        assert!(batch_iter(&ds, 1, false, &mut Rng::new(0)).is_err());
    }
}
