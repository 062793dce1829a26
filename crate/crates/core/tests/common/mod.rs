//! Brute-force oracles and samplers shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use psi_core::{PsiError, Sampler};

/// `b` dominates `a`: weakly larger everywhere, strictly somewhere.
pub fn dominates(b: &[f64], a: &[f64]) -> bool {
    b.iter().zip(a).all(|(x, y)| x >= y) && b.iter().zip(a).any(|(x, y)| x > y)
}

pub fn brute_pareto(rows: &[Vec<f64>]) -> Vec<usize> {
    (0..rows.len())
        .filter(|&i| !(0..rows.len()).any(|j| j != i && dominates(&rows[j], &rows[i])))
        .collect()
}

pub fn big(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max)
}

pub fn little(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| y - x).fold(f64::INFINITY, f64::min)
}

/// Sub-optimality gap: largest `m(i, j)` over the Pareto set.
pub fn oracle_sub_gap(rows: &[Vec<f64>], i: usize) -> f64 {
    brute_pareto(rows)
        .into_iter()
        .map(|j| little(&rows[i], &rows[j]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Optimal-arm gap `min(delta+, delta-)` with `min over nothing = inf`.
pub fn oracle_opt_gap(rows: &[Vec<f64>], i: usize) -> f64 {
    let pareto = brute_pareto(rows);
    let mut plus = f64::INFINITY;
    let mut minus = f64::INFINITY;
    for j in 0..rows.len() {
        if j == i {
            continue;
        }
        if pareto.contains(&j) {
            plus = plus.min(big(&rows[i], &rows[j]).min(big(&rows[j], &rows[i])));
        } else {
            minus = minus.min(big(&rows[j], &rows[i]).max(0.0) + oracle_sub_gap(rows, j));
        }
    }
    plus.min(minus)
}

pub fn oracle_gap(rows: &[Vec<f64>], i: usize) -> f64 {
    if brute_pareto(rows).contains(&i) {
        oracle_opt_gap(rows, i)
    } else {
        oracle_sub_gap(rows, i)
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// `K x D` matrices with entries in `[0, 1)`; continuous draws make
/// coinciding coordinates practically impossible.
pub fn instance_strategy(max_k: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_k, 1..=max_d).prop_flat_map(|(k, d)| prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), k))
}

/// Returns the exact means on every draw.
pub struct ExactSampler {
    pub rows: Vec<Vec<f64>>,
    pub pulls: Vec<u64>,
}

impl ExactSampler {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        let k = rows.len();
        Self {
            rows,
            pulls: vec![0; k],
        }
    }
}

impl Sampler<f64> for ExactSampler {
    fn arms(&self) -> usize {
        self.rows.len()
    }

    fn dims(&self) -> usize {
        self.rows[0].len()
    }

    fn sample_into(&mut self, arm: usize, out: &mut [f64]) -> Result<(), PsiError> {
        self.pulls[arm] += 1;
        out.copy_from_slice(&self.rows[arm]);
        Ok(())
    }
}

/// Wraps a sampler and logs the arm of every draw.
pub struct Logged<S> {
    pub inner: S,
    pub log: Vec<usize>,
}

impl<S: Sampler<f64>> Sampler<f64> for Logged<S> {
    fn arms(&self) -> usize {
        self.inner.arms()
    }

    fn dims(&self) -> usize {
        self.inner.dims()
    }

    fn sample_into(&mut self, arm: usize, out: &mut [f64]) -> Result<(), PsiError> {
        self.log.push(arm);
        self.inner.sample_into(arm, out)
    }
}

/// Successive Rejects for single-objective best-arm identification.
pub fn reference_sr(sampler: &mut psi_core::SeededSampler, arms: usize, budget: u64) -> usize {
    let log_bar = 0.5 + (2..=arms).map(|i| 1.0 / i as f64).sum::<f64>();
    let n = |k: usize| -> u64 {
        if k == 0 {
            0
        } else {
            ((budget - arms as u64) as f64 / (log_bar * (arms + 1 - k) as f64)).ceil() as u64
        }
    };
    let mut active: Vec<usize> = (0..arms).collect();
    let mut sums = vec![0.0; arms];
    let mut counts = vec![0u64; arms];
    let mut buf = [0.0];
    for k in 1..arms {
        for &a in &active {
            for _ in 0..n(k) - n(k - 1) {
                Sampler::<f64>::sample_into(sampler, a, &mut buf).unwrap();
                sums[a] += buf[0];
                counts[a] += 1;
            }
        }
        let worst = *active
            .iter()
            .min_by(|&&a, &&b| {
                (sums[a] / counts[a] as f64)
                    .partial_cmp(&(sums[b] / counts[b] as f64))
                    .unwrap()
            })
            .unwrap();
        active.retain(|&a| a != worst);
    }
    active[0]
}
