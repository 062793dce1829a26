use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::BanditInstance;
use crate::error::{PsiError, Result};
use crate::scalar::Scalar;

/// Source of independent reward vectors, one arm at a time.
pub trait Sampler<S: Scalar> {
    fn arms(&self) -> usize;

    fn dims(&self) -> usize;

    /// Writes one draw of `arm` into `out` (length `dims()`).
    fn sample_into(&mut self, arm: usize, out: &mut [S]) -> Result<()>;

    fn sample(&mut self, arm: usize) -> Result<Vec<S>> {
        let mut out = vec![S::zero(); self.dims()];
        self.sample_into(arm, &mut out)?;
        Ok(out)
    }
}

/// Diagonal Gaussian sampler on a ChaCha8 stream.
///
/// The stream is keyed by `(master_seed, stream_id)`: ChaCha8 seeded from
/// `master_seed` (via `SeedableRng::seed_from_u64`) with its 64-bit stream
/// word set to `stream_id`. Each draw consumes one standard normal per
/// objective, in objective order; objectives with zero scale skip the draw.
#[derive(Debug, Clone)]
pub struct SeededSampler {
    arms: usize,
    dims: usize,
    means: Vec<f64>,
    sigma: Vec<f64>,
    noiseless: bool,
    rng: ChaCha8Rng,
}

impl SeededSampler {
    pub fn new(instance: &BanditInstance, master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            arms: instance.arms(),
            dims: instance.dims(),
            means: instance.theta.as_flat().to_vec(),
            sigma: instance.noise.sigma().to_vec(),
            noiseless: instance.noise.is_zero(),
            rng,
        }
    }
}

impl<S: Scalar> Sampler<S> for SeededSampler {
    fn arms(&self) -> usize {
        self.arms
    }

    fn dims(&self) -> usize {
        self.dims
    }

    fn sample_into(&mut self, arm: usize, out: &mut [S]) -> Result<()> {
        if arm >= self.arms {
            return Err(PsiError::Sampler(format!(
                "arm {arm} out of range for K = {}",
                self.arms
            )));
        }
        let mean = &self.means[arm * self.dims..(arm + 1) * self.dims];
        if self.noiseless {
            for (o, &m) in out.iter_mut().zip(mean) {
                *o = S::lit(m);
            }
            return Ok(());
        }
        for ((o, &m), &s) in out.iter_mut().zip(mean).zip(&self.sigma) {
            let x = if s == 0.0 {
                m
            } else {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                m + s * z
            };
            *o = S::lit(x);
        }
        Ok(())
    }
}
