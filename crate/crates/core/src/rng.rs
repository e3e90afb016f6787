//! Seeded, splittable random streams.
//!
//! A stream is ChaCha8 keyed by the master seed with the ChaCha stream
//! number set to `stream_id`, so `(master_seed, stream_id)` fixes every
//! draw and distinct ids never overlap. Chains use their index as stream id;
//! resampling blocks use ids at and above [`RESAMPLE_STREAM_BASE`].

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// First stream id reserved for permutation resampling.
pub const RESAMPLE_STREAM_BASE: u64 = 1 << 62;

#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
    master_seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn substream(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        RngStream {
            inner,
            master_seed,
            stream_id,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform01(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        if !(sd >= 0.0) || !mean.is_finite() || !sd.is_finite() {
            return Err(Error::InvalidParameter(format!("normal(mean={mean}, sd={sd})")));
        }
        if sd == 0.0 {
            return Ok(mean);
        }
        Ok(mean + sd * self.standard_normal())
    }

    /// Gamma with shape–rate parameterization (mean `shape / rate`).
    pub fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma(shape={shape}, rate={rate})")));
        }
        let g = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::InvalidParameter(format!("gamma: {e}")))?;
        Ok(g.sample(&mut self.inner))
    }

    /// Chi-square with `dof` degrees of freedom (any positive real).
    pub fn chi_square(&mut self, dof: f64) -> Result<f64> {
        self.gamma(0.5 * dof, 0.5)
    }

    pub fn bernoulli_half(&mut self) -> bool {
        self.inner.next_u32() & 1 == 1
    }

    /// Uniform on `1..=k`.
    pub fn uniform_int(&mut self, k: usize) -> Result<usize> {
        if k == 0 {
            return Err(Error::InvalidParameter("uniform_int needs k >= 1".into()));
        }
        Ok(self.inner.random_range(1..=k))
    }

    /// Uniformly random permutation of `0..k`.
    pub fn permutation(&mut self, k: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..k).collect();
        v.shuffle(&mut self.inner);
        v
    }

    /// Fills `words` with fair random bits.
    pub fn fill_bits(&mut self, words: &mut [u64]) {
        for w in words {
            *w = self.inner.next_u64();
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
