//! Seeded xorshift64* generator with splittable streams.
//!
//! The generator is fixed for the life of the project so that every seed
//! replays bit-identically across runs. State is a single nonzero `u64`;
//! the output function is Marsaglia's xorshift64* (shifts 12/25/27, odd
//! multiplier `0x2545F4914F6CDD1D`). Seeds and stream ids are hashed
//! through SplitMix64 before entering the state, so low-entropy seeds and
//! adjacent stream ids still land far apart on the cycle.

use super::NumericsError;

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic pseudo-random generator. Plain value, cheap to clone;
/// never share one instance between consumers — derive a child stream
/// per consumer instead.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        let mut state = splitmix64(&mut s);
        // xorshift64* cycles over nonzero states only.
        if state == 0 {
            state = splitmix64(&mut s);
        }
        Rng { state }
    }

    /// Child stream `stream_id` of `seed`. The splitting rule is
    /// `state = splitmix(seed) XOR splitmix(stream_id + 1)`; distinct
    /// stream ids give distinct sequences.
    pub fn derive(seed: u64, stream_id: u64) -> Self {
        let mut a = seed;
        let mut b = stream_id.wrapping_add(1);
        let mut state = splitmix64(&mut a) ^ splitmix64(&mut b);
        if state == 0 {
            state = splitmix64(&mut a);
        }
        Rng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn sample_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, n)`.
    pub fn sample_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.sample_uniform() * n as f64) as usize;
        i.min(n - 1)
    }

    /// Gaussian draw via the Marsaglia polar method. Consumes a variable
    /// number of uniforms; streams are never interleaved across
    /// consumers, so replay stays deterministic.
    pub fn sample_gaussian(&mut self, mu: f64, sigma: f64) -> Result<f64, NumericsError> {
        if !(sigma >= 0.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            return Ok(mu);
        }
        Ok(mu + sigma * self.standard_normal())
    }

    fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.sample_uniform() - 1.0;
            let v = 2.0 * self.sample_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// Gamma(alpha, 1) draw via Marsaglia-Tsang squeeze, with the
    /// `u^(1/alpha)` boost for alpha < 1.
    pub fn sample_gamma(&mut self, alpha: f64) -> Result<f64, NumericsError> {
        if !(alpha > 0.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "gamma shape must be > 0, got {alpha}"
            )));
        }
        if alpha < 1.0 {
            let g = self.sample_gamma(alpha + 1.0)?;
            let u = loop {
                let u = self.sample_uniform();
                if u > 0.0 {
                    break u;
                }
            };
            return Ok(g * u.powf(1.0 / alpha));
        }
        let d = alpha - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.sample_uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return Ok(d * v);
            }
            if u > 0.0 && u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return Ok(d * v);
            }
        }
    }

    /// Beta(alpha, alpha) draw as the ratio of two Gamma(alpha) draws.
    pub fn sample_beta_symmetric(&mut self, alpha: f64) -> Result<f64, NumericsError> {
        if !(alpha > 0.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "beta shape must be > 0, got {alpha}"
            )));
        }
        let g1 = self.sample_gamma(alpha)?;
        let g2 = self.sample_gamma(alpha)?;
        let sum = g1 + g2;
        if sum == 0.0 {
            // Both draws underflowed; the ratio is symmetric, split it.
            return Ok(0.5);
        }
        Ok(g1 / sum)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.sample_index(i + 1);
            order.swap(i, j);
        }
        order
    }
}
