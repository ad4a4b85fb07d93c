//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..AdamConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.lr > 0.0) {
            return Err(ModelError::InvalidArgument(format!(
                "lr must be > 0, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(ModelError::InvalidArgument(format!(
                "betas must be in [0,1), got ({}, {})",
                self.beta1, self.beta2
            )));
        }
        if !(self.eps > 0.0) {
            return Err(ModelError::InvalidArgument(format!(
                "eps must be > 0, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

/// One named parameter block paired with its gradient.
pub struct ParamBlock<'a> {
    pub name: &'static str,
    pub param: &'a mut [f64],
    pub grad: &'a [f64],
}

/// Optimizer state: first/second moment buffers congruent to the
/// parameter blocks it was created for, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(cfg: AdamConfig, block_sizes: &[usize]) -> Result<Self, ModelError> {
        cfg.validate()?;
        Ok(AdamState {
            cfg,
            t: 0,
            m: block_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: block_sizes.iter().map(|&s| vec![0.0; s]).collect(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update over all blocks; `t` increments by exactly one.
    pub fn step(&mut self, blocks: &mut [ParamBlock<'_>]) -> Result<(), ModelError> {
        if blocks.len() != self.m.len() {
            return Err(ModelError::Shape {
                expected: format!("{} parameter blocks", self.m.len()),
                actual: format!("{}", blocks.len()),
            });
        }
        for (block, m) in blocks.iter().zip(&self.m) {
            if block.param.len() != m.len() || block.grad.len() != m.len() {
                return Err(ModelError::Shape {
                    expected: format!("block {} of size {}", block.name, m.len()),
                    actual: format!("param {} / grad {}", block.param.len(), block.grad.len()),
                });
            }
            if block.grad.iter().any(|g| !g.is_finite()) {
                return Err(ModelError::NonFiniteGradient(block.name.to_string()));
            }
        }
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - self.cfg.beta1.powf(t);
        let bc2 = 1.0 - self.cfg.beta2.powf(t);
        for (b, (m, v)) in blocks.iter_mut().zip(self.m.iter_mut().zip(&mut self.v)) {
            for k in 0..m.len() {
                let g = b.grad[k];
                m[k] = self.cfg.beta1 * m[k] + (1.0 - self.cfg.beta1) * g;
                v[k] = self.cfg.beta2 * v[k] + (1.0 - self.cfg.beta2) * g * g;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                b.param[k] -= self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut opt = AdamState::new(AdamConfig::default(), &[3]).unwrap();
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![0.0; 3];
        for _ in 0..10 {
            opt.step(&mut [ParamBlock {
                name: "p",
                param: &mut p,
                grad: &g,
            }])
            .unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(opt.step_count(), 10);
    }

    #[test]
    fn first_step_moves_by_about_lr_against_gradient() {
        let cfg = AdamConfig::with_lr(0.05);
        let mut opt = AdamState::new(cfg, &[1]).unwrap();
        let mut p = vec![0.0];
        opt.step(&mut [ParamBlock {
            name: "p",
            param: &mut p,
            grad: &[3.0],
        }])
        .unwrap();
        // First step: m_hat = g, v_hat = g^2, so the update is
        // lr * g / (|g| + eps), roughly lr in magnitude, opposite sign.
        assert!(p[0] < 0.0);
        assert!((p[0].abs() - 0.05).abs() < 1e-6, "step {}", p[0]);
    }

    #[test]
    fn two_steps_match_manual_trace() {
        let cfg = AdamConfig {
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        };
        let mut opt = AdamState::new(cfg, &[1]).unwrap();
        let mut p = vec![0.5];
        let grads = [2.0, -1.0];

        // Straight-line trace of the same two updates.
        let (mut m, mut v, mut expect) = (0.0f64, 0.0f64, 0.5f64);
        for (i, &g) in grads.iter().enumerate() {
            let t = (i + 1) as f64;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let m_hat = m / (1.0 - 0.9f64.powf(t));
            let v_hat = v / (1.0 - 0.999f64.powf(t));
            expect -= 0.1 * m_hat / (v_hat.sqrt() + 1e-8);
            opt.step(&mut [ParamBlock {
                name: "p",
                param: &mut p,
                grad: &[g],
            }])
            .unwrap();
            assert!((p[0] - expect).abs() < 1e-12, "step {t}: {} vs {expect}", p[0]);
        }
    }

    #[test]
    fn non_finite_gradient_names_block() {
        let mut opt = AdamState::new(AdamConfig::default(), &[1]).unwrap();
        let mut p = vec![0.0];
        let err = opt
            .step(&mut [ParamBlock {
                name: "w_trend",
                param: &mut p,
                grad: &[f64::NAN],
            }])
            .unwrap_err();
        assert!(err.to_string().contains("w_trend"));
    }
}
