//! Bandit environments: noisy samplers, the synthetic benchmark instances and
//! the instance file format.

mod generators;
mod io;
mod sampler;

pub use generators::{gen_experiment, i3, staircase, EXPERIMENT_IDS};
pub use io::{load_instance, parse_instance, write_instance, LoadOptions};
pub use sampler::{Sampler, SeededSampler};

use crate::error::{PsiError, Result};
use crate::pareto::MeanMatrix;

/// Diagonal Gaussian noise with a per-objective standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    sigma: Vec<f64>,
}

impl NoiseSpec {
    /// Same `sigma` on every objective. `sigma = 0` gives a noiseless sampler.
    pub fn isotropic(sigma: f64, dims: usize) -> Result<Self> {
        Self::per_dim(vec![sigma; dims])
    }

    pub fn per_dim(sigma: Vec<f64>) -> Result<Self> {
        if let Some(s) = sigma.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(PsiError::Validation(format!("noise scale {s} must be finite and >= 0")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// Largest per-objective scale, used as the subgaussian constant.
    pub fn max_sigma(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }
}

/// Ground-truth means plus noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub theta: MeanMatrix<f64>,
    pub noise: NoiseSpec,
}

impl BanditInstance {
    pub fn new(theta: MeanMatrix<f64>, noise: NoiseSpec) -> Result<Self> {
        if noise.sigma().len() != theta.dims() {
            return Err(PsiError::Validation(format!(
                "noise has {} scales for {} objectives",
                noise.sigma().len(),
                theta.dims()
            )));
        }
        Ok(Self { theta, noise })
    }

    pub fn arms(&self) -> usize {
        self.theta.arms()
    }

    pub fn dims(&self) -> usize {
        self.theta.dims()
    }

    /// Same means, different noise level on every objective.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.theta.clone(), NoiseSpec::isotropic(sigma, self.dims())?)
    }
}
