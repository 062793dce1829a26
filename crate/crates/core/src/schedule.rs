//! Round schedules for elimination algorithms.
//!
//! A schedule with `R` rounds carries `lambda` (length `R + 1`, active arms at
//! the start of each round plus the survivors) and `pulls` (length `R`, fresh
//! samples per active arm in each round). For a budget `T` and `K` arms it
//! must satisfy `lambda[0] = K`, `lambda[R] ∈ {0, 1}`, strict decrease, and
//! `sum_r lambda[r] * pulls[r] <= T`.

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::error::{PsiError, Result};

/// A constraint a schedule fails for a given `(K, T)`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleViolation {
    #[error("schedule has no rounds")]
    NoRounds,
    #[error("lambda has length {lambda} but pulls has length {pulls} (expected lambda = pulls + 1)")]
    LengthMismatch { lambda: usize, pulls: usize },
    #[error("lambda_1 = {first} but K = {arms}")]
    FirstNotArmCount { first: usize, arms: usize },
    #[error("lambda_(R+1) = {last}, must be 0 or 1")]
    LastNotZeroOrOne { last: usize },
    /// 1-based round index `r` at which `lambda_r > lambda_(r+1)` fails.
    #[error("lambda_r > lambda_(r+1) fails at r={round}")]
    NotDecreasing { round: usize },
    #[error("schedule uses {total} samples, budget is {budget}")]
    OverBudget { total: u64, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    lambda: Vec<usize>,
    pulls: Vec<u64>,
}

impl Schedule {
    /// Wraps raw vectors without validating them against a budget.
    pub fn from_parts(lambda: Vec<usize>, pulls: Vec<u64>) -> Self {
        Self { lambda, pulls }
    }

    pub fn rounds(&self) -> usize {
        self.pulls.len()
    }

    pub fn lambda(&self) -> &[usize] {
        &self.lambda
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    /// Cumulative pulls per surviving arm after each round.
    pub fn cumulative(&self) -> Vec<u64> {
        self.pulls
            .iter()
            .scan(0u64, |acc, &t| {
                *acc += t;
                Some(*acc)
            })
            .collect()
    }

    /// `sum_r lambda_r * t_r`.
    pub fn total_samples(&self) -> u64 {
        self.lambda.iter().zip(&self.pulls).map(|(&l, &t)| l as u64 * t).sum()
    }

    pub fn validate(&self, arms: usize, budget: u64) -> Result<(), ScheduleViolation> {
        if self.pulls.is_empty() {
            return Err(ScheduleViolation::NoRounds);
        }
        if self.lambda.len() != self.pulls.len() + 1 {
            return Err(ScheduleViolation::LengthMismatch {
                lambda: self.lambda.len(),
                pulls: self.pulls.len(),
            });
        }
        if self.lambda[0] != arms {
            return Err(ScheduleViolation::FirstNotArmCount {
                first: self.lambda[0],
                arms,
            });
        }
        if let Some(r) = self.lambda.windows(2).position(|w| w[0] <= w[1]) {
            return Err(ScheduleViolation::NotDecreasing { round: r + 1 });
        }
        let last = *self.lambda.last().expect("non-empty");
        if last > 1 {
            return Err(ScheduleViolation::LastNotZeroOrOne { last });
        }
        let total = self.total_samples();
        if total > budget {
            return Err(ScheduleViolation::OverBudget { total, budget });
        }
        Ok(())
    }

    /// Successive Rejects: one arm leaves per round, `n_r = ⌈(T-K) / (logbar(K) (K+1-r))⌉`.
    pub fn successive_rejects(arms: usize, budget: u64) -> Result<Self> {
        check_arms(arms)?;
        require_budget(arms, budget, arms as u64, "need T >= K")?;
        let logbar = log_bar(arms);
        let spare = (budget - arms as u64) as f64;
        let cumulative: Vec<u64> = (1..arms)
            .map(|r| (spare / (logbar * (arms + 1 - r) as f64)).ceil() as u64)
            .collect();
        if cumulative[0] == 0 {
            return Err(insufficient(arms, budget, "first round would draw no samples"));
        }
        let mut prev = 0;
        let pulls = cumulative
            .iter()
            .map(|&n| {
                let t = n - prev;
                prev = n;
                t
            })
            .collect();
        let lambda = (1..=arms).rev().collect();
        finish(Self { lambda, pulls }, arms, budget)
    }

    /// Sequential Halving: `ceil(log2 K)` rounds, half the arms leave each round,
    /// `t_r = ⌊T / (lambda_r ⌈log2 K⌉)⌋`.
    pub fn sequential_halving(arms: usize, budget: u64) -> Result<Self> {
        check_arms(arms)?;
        require_budget(arms, budget, arms as u64, "need T >= K")?;
        let rounds = ceil_log2(arms);
        let mut lambda = vec![arms];
        for _ in 0..rounds {
            let l = *lambda.last().expect("non-empty");
            lambda.push(l.div_ceil(2));
        }
        let pulls: Vec<u64> = lambda[..rounds]
            .iter()
            .map(|&l| budget / (l as u64 * rounds as u64))
            .collect();
        if let Some(r) = pulls.iter().position(|&t| t == 0) {
            return Err(insufficient(
                arms,
                budget,
                &format!("round {} would draw no samples", r + 1),
            ));
        }
        finish(Self { lambda, pulls }, arms, budget)
    }

    /// Geometric grid over `rounds` rounds:
    /// `alpha_r = ⌊(T/R) K^{r/R} / K^{1+1/R}⌋`, `t_r = alpha_r - alpha_{r-1}`,
    /// `lambda_r = ⌊K / K^{(r-1)/R}⌋`. Floors are evaluated in exact integer arithmetic.
    pub fn geometric_grid(arms: usize, budget: u64, rounds: usize) -> Result<Self> {
        check_arms(arms)?;
        if rounds < 1 {
            return Err(PsiError::InvalidArgument("geometric grid needs R >= 1".into()));
        }
        let min_budget = 2 * rounds as u64 * arms as u64;
        require_budget(arms, budget, min_budget, "need T >= 2RK")?;
        let lambda: Vec<usize> = (1..=rounds + 1).map(|r| geometric_lambda(arms, rounds, r)).collect();
        let alpha: Vec<u64> = (1..=rounds).map(|r| geometric_alpha(arms, budget, rounds, r)).collect();
        let mut prev = 0;
        let pulls: Vec<u64> = alpha
            .iter()
            .map(|&a| {
                let t = a - prev;
                prev = a;
                t
            })
            .collect();
        if pulls[0] == 0 {
            return Err(insufficient(arms, budget, "first round would draw no samples"));
        }
        finish(Self { lambda, pulls }, arms, budget)
    }

    /// Uniform allocation: a single round of `⌊T/K⌋` pulls, after which every
    /// arm is classified.
    pub fn uniform(arms: usize, budget: u64) -> Result<Self> {
        check_arms(arms)?;
        require_budget(arms, budget, arms as u64, "need T >= K")?;
        finish(
            Self {
                lambda: vec![arms, 0],
                pulls: vec![budget / arms as u64],
            },
            arms,
            budget,
        )
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        write!(
            f,
            "R={} lambda=({}) t=({}) total={}",
            self.rounds(),
            join(self.lambda.iter().map(ToString::to_string).collect()),
            join(self.pulls.iter().map(ToString::to_string).collect()),
            self.total_samples()
        )
    }
}

/// `1/2 + sum_{i=2}^K 1/i`.
pub fn log_bar(arms: usize) -> f64 {
    0.5 + (2..=arms).map(|i| 1.0 / i as f64).sum::<f64>()
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Largest `m` with `m^R <= K^(R - r + 1)`, i.e. `⌊K / K^{(r-1)/R}⌋`.
fn geometric_lambda(arms: usize, rounds: usize, r: usize) -> usize {
    let bound = BigUint::from(arms).pow((rounds + 1 - r) as u32);
    let estimate = (arms as f64).powf((rounds + 1 - r) as f64 / rounds as f64).floor() as u64;
    largest_satisfying(estimate, |m| BigUint::from(m).pow(rounds as u32) <= bound) as usize
}

/// Largest `a` with `(a R)^R K^(R + 1 - r) <= T^R`.
fn geometric_alpha(arms: usize, budget: u64, rounds: usize, r: usize) -> u64 {
    let lhs_scale = BigUint::from(arms).pow((rounds + 1 - r) as u32);
    let rhs = BigUint::from(budget).pow(rounds as u32);
    let estimate = (budget as f64 / rounds as f64
        * (arms as f64).powf((r as f64 - rounds as f64 - 1.0) / rounds as f64))
    .floor() as u64;
    largest_satisfying(estimate, |a| {
        BigUint::from(a * rounds as u64).pow(rounds as u32) * &lhs_scale <= rhs
    })
}

/// Adjusts a floating estimate to the exact largest integer satisfying a monotone predicate.
fn largest_satisfying(estimate: u64, ok: impl Fn(u64) -> bool) -> u64 {
    let mut x = estimate;
    while x > 0 && !ok(x) {
        x -= 1;
    }
    while ok(x + 1) {
        x += 1;
    }
    x
}

fn check_arms(arms: usize) -> Result<()> {
    if arms < 2 {
        return Err(PsiError::InvalidArgument(format!("need K >= 2 arms, got {arms}")));
    }
    Ok(())
}

fn require_budget(arms: usize, budget: u64, min: u64, detail: &str) -> Result<()> {
    if budget < min {
        return Err(insufficient(arms, budget, detail));
    }
    Ok(())
}

fn insufficient(arms: usize, budget: u64, detail: &str) -> PsiError {
    PsiError::InsufficientBudget {
        arms,
        budget,
        detail: detail.to_string(),
    }
}

fn finish(s: Schedule, arms: usize, budget: u64) -> Result<Schedule> {
    s.validate(arms, budget)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sr_k4_t100() {
        let s = Schedule::successive_rejects(4, 100).unwrap();
        assert!((log_bar(4) - 19.0 / 12.0).abs() < 1e-15);
        assert_eq!(s.cumulative(), vec![16, 21, 31]);
        assert_eq!(s.pulls(), &[16, 5, 10]);
        assert_eq!(s.lambda(), &[4, 3, 2, 1]);
        assert_eq!(s.total_samples(), 99);
        assert!(s.validate(4, 100).is_ok());
    }

    #[test]
    fn sr_k2_t4() {
        let s = Schedule::successive_rejects(2, 4).unwrap();
        assert_eq!(s.lambda(), &[2, 1]);
        assert_eq!(s.pulls(), &[1]);
    }

    #[test]
    fn sr_errors() {
        assert!(matches!(
            Schedule::successive_rejects(5, 4),
            Err(PsiError::InsufficientBudget { .. })
        ));
        // T = K leaves nothing to spend on the first round
        assert!(matches!(
            Schedule::successive_rejects(5, 5),
            Err(PsiError::InsufficientBudget { .. })
        ));
    }

    #[test]
    fn sh_examples() {
        let s = Schedule::sequential_halving(8, 120).unwrap();
        assert_eq!(s.lambda(), &[8, 4, 2, 1]);
        assert_eq!(s.pulls(), &[5, 10, 20]);
        assert_eq!(s.total_samples(), 120);
        let s = Schedule::sequential_halving(3, 60).unwrap();
        assert_eq!(s.lambda(), &[3, 2, 1]);
        assert_eq!(s.pulls(), &[10, 15]);
        assert!(Schedule::sequential_halving(8, 20).is_err());
    }

    #[test]
    fn gg_examples() {
        let s = Schedule::geometric_grid(8, 240, 3).unwrap();
        assert_eq!(s.cumulative(), vec![10, 20, 40]);
        assert_eq!(s.pulls(), &[10, 10, 20]);
        assert_eq!(s.lambda(), &[8, 4, 2, 1]);
        assert_eq!(s.total_samples(), 160);
        let s = Schedule::geometric_grid(7, 100, 1).unwrap();
        assert_eq!(s.lambda(), &[7, 1]);
        assert!(Schedule::geometric_grid(8, 10, 3).is_err());
        assert!(Schedule::geometric_grid(8, 240, 0).is_err());
        // too many rounds for two arms: lambda cannot decrease strictly
        assert!(matches!(
            Schedule::geometric_grid(2, 1000, 3),
            Err(PsiError::InvalidSchedule(ScheduleViolation::NotDecreasing { .. }))
        ));
    }

    #[test]
    fn uniform_example() {
        let s = Schedule::uniform(10, 105).unwrap();
        assert_eq!(s.lambda(), &[10, 0]);
        assert_eq!(s.pulls(), &[10]);
        assert_eq!(105 - s.total_samples(), 5);
        assert!(Schedule::uniform(10, 9).is_err());
    }

    #[test]
    fn validation_reports() {
        let s = Schedule::from_parts(vec![4, 3, 3, 1], vec![1, 1, 1]);
        let v = s.validate(4, 100).unwrap_err();
        assert_eq!(v, ScheduleViolation::NotDecreasing { round: 2 });
        assert_eq!(v.to_string(), "lambda_r > lambda_(r+1) fails at r=2");
        let s = Schedule::from_parts(vec![5, 3, 1], vec![1, 1]);
        assert!(matches!(
            s.validate(4, 100),
            Err(ScheduleViolation::FirstNotArmCount { .. })
        ));
        let s = Schedule::from_parts(vec![4, 3, 2], vec![1, 1]);
        assert!(matches!(
            s.validate(4, 100),
            Err(ScheduleViolation::LastNotZeroOrOne { last: 2 })
        ));
        let s = Schedule::from_parts(vec![4, 1], vec![30]);
        assert!(matches!(
            s.validate(4, 100),
            Err(ScheduleViolation::OverBudget { total: 120, .. })
        ));
        let s = Schedule::from_parts(vec![4], vec![]);
        assert_eq!(s.validate(4, 100), Err(ScheduleViolation::NoRounds));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(200), 8);
    }
}
