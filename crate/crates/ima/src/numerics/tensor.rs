//! Dense row-major matrix and rank-3 tensor over `f64`.

use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Row-major `rows x cols` matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, NumericsError> {
        if values.len() != rows * cols {
            return Err(NumericsError::Shape {
                expected: format!("{} values for {rows}x{cols}", rows * cols),
                actual: format!("{}", values.len()),
            });
        }
        Ok(Matrix { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn fill(&mut self, v: f64) {
        self.values.iter_mut().for_each(|x| *x = v);
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::Shape {
                expected: format!("lhs cols == rhs rows ({})", self.cols),
                actual: format!("{}", rhs.rows),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.values[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `W x` for a column vector `x` of length `cols`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `W^T x` for a column vector `x` of length `rows`.
    pub fn matvec_transposed(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.get(r, c) * xr;
            }
        }
    }
}

/// Rank-3 tensor laid out `[batch][time][channel]`, used for both the
/// input windows `X` (B x T_X x N) and the targets `Y` (B x T_Y x N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    batch: usize,
    time: usize,
    channels: usize,
    values: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(batch: usize, time: usize, channels: usize) -> Self {
        Tensor3 {
            batch,
            time,
            channels,
            values: vec![0.0; batch * time * channels],
        }
    }

    pub fn from_vec(
        batch: usize,
        time: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self, NumericsError> {
        if values.len() != batch * time * channels {
            return Err(NumericsError::Shape {
                expected: format!("{} values for {batch}x{time}x{channels}", batch * time * channels),
                actual: format!("{}", values.len()),
            });
        }
        Ok(Tensor3 {
            batch,
            time,
            channels,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.batch, self.time, self.channels)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, b: usize, t: usize, n: usize) -> f64 {
        self.values[(b * self.time + t) * self.channels + n]
    }

    #[inline]
    pub fn set(&mut self, b: usize, t: usize, n: usize, v: f64) {
        self.values[(b * self.time + t) * self.channels + n] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_shape(&self, other: &Tensor3) -> bool {
        self.shape() == other.shape()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Copies the time series of one (sample, channel) pair into `buf`.
    pub fn read_series(&self, b: usize, n: usize, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.time);
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = self.get(b, t, n);
        }
    }

    /// Writes `buf` back as the time series of one (sample, channel) pair.
    pub fn write_series(&mut self, b: usize, n: usize, buf: &[f64]) {
        debug_assert_eq!(buf.len(), self.time);
        for (t, &v) in buf.iter().enumerate() {
            self.set(b, t, n, v);
        }
    }
}
