//! Decomposition-based linear forecaster: a moving-average split into
//! trend and seasonal parts, each mapped to the horizon by its own
//! channel-shared affine layer.

use crate::numerics::{Matrix, Rng, Tensor3};

use super::{init_weights, ModelError, ParamBlock};

/// Moving-average trend with replicate padding at both ends; the
/// seasonal part is the residual, so `trend + seasonal == x` exactly.
pub fn moving_average_decompose(
    x: &Tensor3,
    kernel_size: usize,
) -> Result<(Tensor3, Tensor3), ModelError> {
    if kernel_size < 1 || kernel_size % 2 == 0 {
        return Err(ModelError::InvalidArgument(format!(
            "kernel_size must be odd and >= 1, got {kernel_size}"
        )));
    }
    let (b, t, n) = x.shape();
    let half = (kernel_size - 1) / 2;
    let mut trend = Tensor3::zeros(b, t, n);
    let mut seasonal = Tensor3::zeros(b, t, n);
    for i in 0..b {
        for c in 0..n {
            for tt in 0..t {
                let mut acc = 0.0;
                for off in 0..kernel_size {
                    let u = tt as i64 + off as i64 - half as i64;
                    let idx = u.clamp(0, t as i64 - 1) as usize;
                    acc += x.get(i, idx, c);
                }
                let m = acc / kernel_size as f64;
                trend.set(i, tt, c, m);
                seasonal.set(i, tt, c, x.get(i, tt, c) - m);
            }
        }
    }
    Ok((trend, seasonal))
}

/// Adjoint of the moving-average operator: scatters `upstream` back
/// through the replicate-padded averaging windows.
fn moving_average_adjoint(upstream: &[f64], kernel_size: usize, out: &mut [f64]) {
    let t = upstream.len();
    let half = (kernel_size - 1) / 2;
    let inv = 1.0 / kernel_size as f64;
    out.iter_mut().for_each(|o| *o = 0.0);
    for (tt, &u) in upstream.iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        for off in 0..kernel_size {
            let s = tt as i64 + off as i64 - half as i64;
            let idx = s.clamp(0, t as i64 - 1) as usize;
            out[idx] += u * inv;
        }
    }
}

/// Forecaster `g_w`: maps a `B x T_X x N` window to a `B x T_Y x N`
/// horizon. Weights are shared across channels.
#[derive(Debug, Clone)]
pub struct DLinearForecaster {
    pub seq_len: usize,
    pub pred_len: usize,
    pub kernel_size: usize,
    pub w_seasonal: Matrix,
    pub w_trend: Matrix,
    pub b_seasonal: Vec<f64>,
    pub b_trend: Vec<f64>,
    pub g_w_seasonal: Matrix,
    pub g_w_trend: Matrix,
    pub g_b_seasonal: Vec<f64>,
    pub g_b_trend: Vec<f64>,
}

impl DLinearForecaster {
    pub fn new(
        seq_len: usize,
        pred_len: usize,
        kernel_size: usize,
        rng: &mut Rng,
    ) -> Result<Self, ModelError> {
        if kernel_size < 1 || kernel_size % 2 == 0 {
            return Err(ModelError::InvalidArgument(format!(
                "kernel_size must be odd and >= 1, got {kernel_size}"
            )));
        }
        if seq_len < 1 || pred_len < 1 {
            return Err(ModelError::InvalidArgument(
                "seq_len and pred_len must be >= 1".into(),
            ));
        }
        let mut w_seasonal = Matrix::zeros(pred_len, seq_len);
        let mut w_trend = Matrix::zeros(pred_len, seq_len);
        init_weights(w_seasonal.values_mut(), seq_len, rng);
        init_weights(w_trend.values_mut(), seq_len, rng);
        Ok(DLinearForecaster {
            seq_len,
            pred_len,
            kernel_size,
            w_seasonal,
            w_trend,
            b_seasonal: vec![0.0; pred_len],
            b_trend: vec![0.0; pred_len],
            g_w_seasonal: Matrix::zeros(pred_len, seq_len),
            g_w_trend: Matrix::zeros(pred_len, seq_len),
            g_b_seasonal: vec![0.0; pred_len],
            g_b_trend: vec![0.0; pred_len],
        })
    }

    fn check_input(&self, x: &Tensor3) -> Result<(), ModelError> {
        if x.time() != self.seq_len {
            return Err(ModelError::Shape {
                expected: format!("input time axis {}", self.seq_len),
                actual: format!("{}", x.time()),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3, ModelError> {
        self.check_input(x)?;
        let (trend, seasonal) = moving_average_decompose(x, self.kernel_size)?;
        let (b, _, n) = x.shape();
        let mut out = Tensor3::zeros(b, self.pred_len, n);
        let mut s = vec![0.0; self.seq_len];
        let mut tr = vec![0.0; self.seq_len];
        let mut ys = vec![0.0; self.pred_len];
        let mut yt = vec![0.0; self.pred_len];
        for i in 0..b {
            for c in 0..n {
                seasonal.read_series(i, c, &mut s);
                trend.read_series(i, c, &mut tr);
                self.w_seasonal.matvec(&s, &mut ys);
                self.w_trend.matvec(&tr, &mut yt);
                for r in 0..self.pred_len {
                    out.set(i, r, c, ys[r] + self.b_seasonal[r] + yt[r] + self.b_trend[r]);
                }
            }
        }
        Ok(out)
    }

    pub fn zero_grads(&mut self) {
        self.g_w_seasonal.fill(0.0);
        self.g_w_trend.fill(0.0);
        self.g_b_seasonal.iter_mut().for_each(|g| *g = 0.0);
        self.g_b_trend.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Accumulates parameter gradients for `upstream` (dL/d output) and
    /// returns the input gradient. Call [`zero_grads`](Self::zero_grads)
    /// first for a fresh batch.
    pub fn backward(&mut self, x: &Tensor3, upstream: &Tensor3) -> Result<Tensor3, ModelError> {
        self.check_input(x)?;
        let (b, _, n) = x.shape();
        let (ub, ut, un) = upstream.shape();
        if (ub, ut, un) != (b, self.pred_len, n) {
            return Err(ModelError::Shape {
                expected: format!("upstream {b}x{}x{n}", self.pred_len),
                actual: format!("{ub}x{ut}x{un}"),
            });
        }
        let (trend, seasonal) = moving_average_decompose(x, self.kernel_size)?;
        let mut input_grad = Tensor3::zeros(b, self.seq_len, n);
        let mut s = vec![0.0; self.seq_len];
        let mut tr = vec![0.0; self.seq_len];
        let mut g = vec![0.0; self.pred_len];
        let mut ds = vec![0.0; self.seq_len];
        let mut dtr = vec![0.0; self.seq_len];
        let mut dtrend_through_ma = vec![0.0; self.seq_len];
        let mut diff = vec![0.0; self.seq_len];
        for i in 0..b {
            for c in 0..n {
                seasonal.read_series(i, c, &mut s);
                trend.read_series(i, c, &mut tr);
                upstream.read_series(i, c, &mut g);
                for (r, &gr) in g.iter().enumerate() {
                    if gr == 0.0 {
                        continue;
                    }
                    self.g_b_seasonal[r] += gr;
                    self.g_b_trend[r] += gr;
                    for k in 0..self.seq_len {
                        self.g_w_seasonal
                            .set(r, k, self.g_w_seasonal.get(r, k) + gr * s[k]);
                        self.g_w_trend
                            .set(r, k, self.g_w_trend.get(r, k) + gr * tr[k]);
                    }
                }
                // x = trend + seasonal with trend = MA(x):
                // dx = ds + MA^T (dtr - ds).
                self.w_seasonal.matvec_transposed(&g, &mut ds);
                self.w_trend.matvec_transposed(&g, &mut dtr);
                for k in 0..self.seq_len {
                    diff[k] = dtr[k] - ds[k];
                }
                moving_average_adjoint(&diff, self.kernel_size, &mut dtrend_through_ma);
                for k in 0..self.seq_len {
                    input_grad.set(i, k, c, ds[k] + dtrend_through_ma[k]);
                }
            }
        }
        Ok(input_grad)
    }

    pub fn param_block_sizes(&self) -> Vec<usize> {
        vec![
            self.pred_len * self.seq_len,
            self.pred_len * self.seq_len,
            self.pred_len,
            self.pred_len,
        ]
    }

    pub fn param_blocks(&mut self) -> Vec<ParamBlock<'_>> {
        vec![
            ParamBlock {
                name: "w_seasonal",
                param: self.w_seasonal.values_mut(),
                grad: self.g_w_seasonal.values(),
            },
            ParamBlock {
                name: "w_trend",
                param: self.w_trend.values_mut(),
                grad: self.g_w_trend.values(),
            },
            ParamBlock {
                name: "b_seasonal",
                param: &mut self.b_seasonal,
                grad: &self.g_b_seasonal,
            },
            ParamBlock {
                name: "b_trend",
                param: &mut self.b_trend,
                grad: &self.g_b_trend,
            },
        ]
    }

    /// Flat copy of all parameters, in block order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = self.w_seasonal.values().to_vec();
        out.extend_from_slice(self.w_trend.values());
        out.extend_from_slice(&self.b_seasonal);
        out.extend_from_slice(&self.b_trend);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let wlen = self.pred_len * self.seq_len;
        self.w_seasonal.values_mut().copy_from_slice(&flat[..wlen]);
        self.w_trend
            .values_mut()
            .copy_from_slice(&flat[wlen..2 * wlen]);
        self.b_seasonal
            .copy_from_slice(&flat[2 * wlen..2 * wlen + self.pred_len]);
        self.b_trend.copy_from_slice(&flat[2 * wlen + self.pred_len..]);
    }

    pub fn grads_flat(&self) -> Vec<f64> {
        let mut out = self.g_w_seasonal.values().to_vec();
        out.extend_from_slice(self.g_w_trend.values());
        out.extend_from_slice(&self.g_b_seasonal);
        out.extend_from_slice(&self.g_b_trend);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_grad;

    fn random_tensor(b: usize, t: usize, n: usize, seed: u64) -> Tensor3 {
        let mut rng = Rng::new(seed);
        Tensor3::from_vec(
            b,
            t,
            n,
            (0..b * t * n).map(|_| rng.sample_uniform() * 2.0 - 1.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_one_decomposition_is_trivial() {
        let x = random_tensor(2, 5, 2, 1);
        let (trend, seasonal) = moving_average_decompose(&x, 1).unwrap();
        assert_eq!(trend, x);
        assert!(seasonal.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kernel_three_hand_computed() {
        let x = Tensor3::from_vec(1, 4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (trend, _) = moving_average_decompose(&x, 3).unwrap();
        let expect = [4.0 / 3.0, 2.0, 3.0, 11.0 / 3.0];
        for (t, e) in expect.iter().enumerate() {
            assert!((trend.get(0, t, 0) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let x = random_tensor(3, 9, 2, 2);
        let (trend, seasonal) = moving_average_decompose(&x, 5).unwrap();
        for k in 0..x.len() {
            assert!((trend.values()[k] + seasonal.values()[k] - x.values()[k]).abs() <= 1e-15);
        }
    }

    #[test]
    fn even_kernel_rejected() {
        let x = random_tensor(1, 4, 1, 3);
        assert!(moving_average_decompose(&x, 2).is_err());
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let mut m = DLinearForecaster::new(6, 3, 3, &mut Rng::new(0)).unwrap();
        m.w_seasonal.fill(0.0);
        m.w_trend.fill(0.0);
        let y = m.forward(&random_tensor(2, 6, 2, 4)).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bias_only_broadcast() {
        let mut m = DLinearForecaster::new(4, 2, 1, &mut Rng::new(0)).unwrap();
        m.w_seasonal.fill(0.0);
        m.w_trend.fill(0.0);
        m.b_seasonal = vec![0.5, -1.0];
        m.b_trend = vec![0.25, 0.75];
        let y = m.forward(&random_tensor(3, 4, 2, 5)).unwrap();
        for i in 0..3 {
            for c in 0..2 {
                assert_eq!(y.get(i, 0, c), 0.75);
                assert_eq!(y.get(i, 1, c), -0.25);
            }
        }
    }

    #[test]
    fn forward_matches_loop_oracle() {
        let m = DLinearForecaster::new(8, 4, 3, &mut Rng::new(6)).unwrap();
        let x = random_tensor(2, 8, 3, 7);
        let y = m.forward(&x).unwrap();
        let (trend, seasonal) = moving_average_decompose(&x, 3).unwrap();
        for i in 0..2 {
            for r in 0..4 {
                for c in 0..3 {
                    let mut acc = m.b_seasonal[r] + m.b_trend[r];
                    for k in 0..8 {
                        acc += m.w_seasonal.get(r, k) * seasonal.get(i, k, c);
                        acc += m.w_trend.get(r, k) * trend.get(i, k, c);
                    }
                    assert!((y.get(i, r, c) - acc).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_reports_expected() {
        let m = DLinearForecaster::new(8, 4, 3, &mut Rng::new(0)).unwrap();
        let err = m.forward(&random_tensor(1, 5, 1, 8)).unwrap_err();
        assert!(err.to_string().contains('8'));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut m = DLinearForecaster::new(6, 3, 3, &mut Rng::new(9)).unwrap();
        let x = random_tensor(2, 6, 2, 10);
        m.zero_grads();
        let ig = m.backward(&x, &Tensor3::zeros(2, 3, 2)).unwrap();
        assert!(m.grads_flat().iter().all(|&g| g == 0.0));
        assert!(ig.values().iter().all(|&g| g == 0.0));
    }

    fn loss(m: &DLinearForecaster, x: &Tensor3, target: &Tensor3) -> f64 {
        let y = m.forward(x).unwrap();
        y.values()
            .iter()
            .zip(target.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / y.len() as f64
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        let mut m = DLinearForecaster::new(8, 4, 3, &mut Rng::new(11)).unwrap();
        let x = random_tensor(2, 8, 2, 12);
        let target = random_tensor(2, 4, 2, 13);

        let y = m.forward(&x).unwrap();
        let scale = 2.0 / y.len() as f64;
        let mut upstream = Tensor3::zeros(2, 4, 2);
        for k in 0..y.len() {
            upstream.values_mut()[k] = scale * (y.values()[k] - target.values()[k]);
        }
        m.zero_grads();
        m.backward(&x, &upstream).unwrap();
        let analytic = m.grads_flat();

        let p0 = m.params_flat();
        let mut probe = m.clone();
        let numeric = finite_diff_grad(
            |p| {
                probe.set_params_flat(p);
                loss(&probe, &x, &target)
            },
            &p0,
            1e-5,
        )
        .unwrap();
        for (k, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let denom = n.abs().max(1e-6);
            assert!((a - n).abs() / denom <= 1e-4, "param {k}: {a} vs {n}");
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut m = DLinearForecaster::new(8, 4, 3, &mut Rng::new(14)).unwrap();
        let x = random_tensor(2, 8, 2, 15);
        let target = random_tensor(2, 4, 2, 16);

        let y = m.forward(&x).unwrap();
        let scale = 2.0 / y.len() as f64;
        let mut upstream = Tensor3::zeros(2, 4, 2);
        for k in 0..y.len() {
            upstream.values_mut()[k] = scale * (y.values()[k] - target.values()[k]);
        }
        m.zero_grads();
        let input_grad = m.backward(&x, &upstream).unwrap();

        let x0 = x.values().to_vec();
        let numeric = finite_diff_grad(
            |xs| {
                let xt = Tensor3::from_vec(2, 8, 2, xs.to_vec()).unwrap();
                loss(&m, &xt, &target)
            },
            &x0,
            1e-5,
        )
        .unwrap();
        for (k, (a, n)) in input_grad.values().iter().zip(&numeric).enumerate() {
            let denom = n.abs().max(1e-6);
            assert!((a - n).abs() / denom <= 1e-4, "input {k}: {a} vs {n}");
        }
    }

    #[test]
    fn channel_permutation_commutes() {
        let m = DLinearForecaster::new(6, 3, 3, &mut Rng::new(17)).unwrap();
        let x = random_tensor(2, 6, 3, 18);
        let mut xp = Tensor3::zeros(2, 6, 3);
        let perm = [2usize, 0, 1];
        for i in 0..2 {
            for t in 0..6 {
                for c in 0..3 {
                    xp.set(i, t, c, x.get(i, t, perm[c]));
                }
            }
        }
        let y = m.forward(&x).unwrap();
        let yp = m.forward(&xp).unwrap();
        for i in 0..2 {
            for t in 0..3 {
                for c in 0..3 {
                    assert_eq!(yp.get(i, t, c), y.get(i, t, perm[c]));
                }
            }
        }
    }

    #[test]
    fn linearity_with_zero_biases() {
        let mut m = DLinearForecaster::new(6, 3, 3, &mut Rng::new(19)).unwrap();
        m.b_seasonal.iter_mut().for_each(|b| *b = 0.0);
        m.b_trend.iter_mut().for_each(|b| *b = 0.0);
        let x = random_tensor(2, 6, 2, 20);
        let mut x2 = x.clone();
        x2.values_mut().iter_mut().for_each(|v| *v *= 3.0);
        let y = m.forward(&x).unwrap();
        let y2 = m.forward(&x2).unwrap();
        for k in 0..y.len() {
            let denom = y.values()[k].abs().max(1e-9);
            assert!((y2.values()[k] - 3.0 * y.values()[k]).abs() / denom <= 1e-12);
        }
    }
}
