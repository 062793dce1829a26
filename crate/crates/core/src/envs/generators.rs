//! Synthetic benchmark instances.
//!
//! | id | K   | D  | optimal arms | means |
//! |----|-----|----|--------------|-------|
//! | 1  | 60  | 2  | 10           | convex curve `(x^2, 1/(4x^2))` + 50 random points under `xy <= 1/5` |
//! | 2  | 10  | 2  | 2            | each sub-optimal arm dominated by exactly one arm |
//! | 3  | 200 | 2  | 20           | unit circle |
//! | 4  | 50  | 10 | random       | two uniform boxes |
//! | 5  | 20  | 2  | 4            | two uniform clusters |
//! | 6  | 10  | 2  | 10           | `(0.75 - 0.65^i, 0.25 + 0.65^i)` |
//! | 7  | 22  | 2  | 8            | three staircases with one common gap |
//! | 8  | 5   | 2  | 1            | `0.75 - 0.25^i` on both objectives |
//!
//! Every instance uses isotropic noise with `sigma = 1/4`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BanditInstance, NoiseSpec};
use crate::error::{invalid, Result};
use crate::pareto::{pareto_set, MeanMatrix};

pub const EXPERIMENT_IDS: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

const SIGMA: f64 = 0.25;

/// Spacing of the staircases in experiment 7; the smallest value for which
/// all 22 gaps coincide (at 0.05).
const EXP7_STEP: f64 = 0.05;

/// Builds synthetic instance `id`. `seed` only affects experiments 1, 4 and 5.
pub fn gen_experiment(id: u32, seed: u64) -> Result<BanditInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = match id {
        1 => exp1(&mut rng),
        2 => exp2(),
        3 => exp3(),
        4 => exp4(&mut rng),
        5 => exp5(&mut rng),
        6 => (1..=10)
            .map(|i| {
                let p = 0.65f64.powi(i);
                vec![0.75 - p, 0.25 + p]
            })
            .collect(),
        7 => exp7(),
        8 => (1..=5)
            .map(|i| {
                let v = 0.75 - 0.25f64.powi(i);
                vec![v, v]
            })
            .collect(),
        _ => return invalid(format!("unknown experiment id {id} (expected 1..=8)")),
    };
    let theta = MeanMatrix::new(rows)?;
    let dims = theta.dims();
    BanditInstance::new(theta, NoiseSpec::isotropic(SIGMA, dims)?)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn optimal_count(rows: &[Vec<f64>]) -> usize {
    MeanMatrix::new(rows.to_vec()).map_or(0, |t| pareto_set(&t).len())
}

fn exp1(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let curve: Vec<Vec<f64>> = linspace(0.55, 0.95, 10)
        .map(|x| vec![x * x, 1.0 / (4.0 * x * x)])
        .collect();
    loop {
        let mut rows = curve.clone();
        while rows.len() < 60 {
            let x = rng.random_range(0.1..=0.8);
            let y = rng.random_range(0.1..=0.8);
            if x * y <= 0.2 {
                rows.push(vec![x, y]);
            }
        }
        if optimal_count(&rows) == 10 {
            return rows;
        }
    }
}

fn exp2() -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.4, 0.75], vec![0.75, 0.4]];
    for i in 1..=4 {
        let p = 0.2f64.powi(i);
        rows.push(vec![0.45 + p, 0.35 - p]);
        rows.push(vec![0.10 + p, 0.70 - p]);
    }
    rows
}

fn exp3() -> Vec<Vec<f64>> {
    linspace(PI / 12.0, PI / 2.0 - PI / 12.0, 20)
        .chain(linspace(PI / 2.0 + PI / 6.0, 2.0 * PI - PI / 6.0, 180))
        .map(|b| vec![b.cos(), b.sin()])
        .collect()
}

fn uniform_box(rng: &mut ChaCha8Rng, n: usize, dims: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dims).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

fn exp4(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut rows = uniform_box(rng, 30, 10, 0.2, 0.45);
    rows.extend(uniform_box(rng, 20, 10, 0.55, 0.75));
    rows
}

fn exp5(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    loop {
        let mut rows = uniform_box(rng, 10, 2, 0.2, 0.4);
        rows.extend(uniform_box(rng, 10, 2, 0.5, 0.7));
        if optimal_count(&rows) == 4 {
            return rows;
        }
    }
}

fn exp7() -> Vec<Vec<f64>> {
    let c = |i: usize| (i - 1) as f64 * EXP7_STEP;
    let mut rows: Vec<Vec<f64>> = (1..=8).map(|i| vec![0.3 + c(i), 0.8 - c(i)]).collect();
    rows.extend((9..=15).map(|i| vec![0.25 + c(i - 8), 0.7 - c(i - 8)]));
    for i in 16..=22 {
        let base = rows[i - 7 - 1].clone();
        rows.push(vec![base[0], base[1] + 0.05]);
    }
    rows
}

/// Three-arm example used throughout the docs and tests:
/// `(1, 0.2)`, `(0.2, 1)`, `(0.5, 0.1)`.
pub fn i3() -> MeanMatrix<f64> {
    MeanMatrix::new(vec![vec![1.0, 0.2], vec![0.2, 1.0], vec![0.5, 0.1]]).expect("valid")
}

/// Four-arm staircase: two optimal arms, each dominating exactly one
/// sub-optimal arm, with margins meeting the 3x separation condition of the
/// lower-bound class.
pub fn staircase() -> MeanMatrix<f64> {
    MeanMatrix::new(vec![vec![-2.5, 3.0], vec![-3.0, 1.0], vec![2.0, -0.5], vec![1.5, -3.0]]).expect("valid")
}
