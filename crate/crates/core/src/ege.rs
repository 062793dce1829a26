//! Empirical Gap Elimination.
//!
//! Each round pulls every active arm `t_r` more times, computes the empirical
//! Pareto set `S_r` of the active arms and their empirical gaps, and
//! deactivates the arms with the largest gaps. A deactivated arm is accepted
//! if it was in `S_r` and rejected otherwise. The recommendation is the
//! accepted arms plus whatever is still active at the end.

use crate::envs::Sampler;
use crate::error::{invalid, PsiError, Result};
use crate::pareto::{margin_table, pareto_set, MeanMatrix, UnifiedParts};
use crate::scalar::{cmp_nan_last, Scalar};
use crate::schedule::Schedule;

/// Per-arm sample counts and running means. Samples are never discarded.
#[derive(Debug, Clone)]
pub struct EmpiricalState<S> {
    dims: usize,
    pulls: Vec<u64>,
    sums: Vec<S>,
    means: Vec<S>,
}

impl<S: Scalar> EmpiricalState<S> {
    pub fn new(arms: usize, dims: usize) -> Self {
        Self {
            dims,
            pulls: vec![0; arms],
            sums: vec![S::zero(); arms * dims],
            means: vec![S::zero(); arms * dims],
        }
    }

    /// State whose means are fixed to the given rows, each with `pulls` samples.
    pub fn from_means(theta: &MeanMatrix<S>, pulls: u64) -> Self {
        let n = S::lit(pulls as f64);
        Self {
            dims: theta.dims(),
            pulls: vec![pulls; theta.arms()],
            sums: theta.as_flat().iter().map(|&m| m * n).collect(),
            means: theta.as_flat().to_vec(),
        }
    }

    pub fn arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn record(&mut self, arm: usize, sample: &[S]) {
        self.pulls[arm] += 1;
        let n = S::lit(self.pulls[arm] as f64);
        let range = arm * self.dims..(arm + 1) * self.dims;
        for ((sum, mean), &x) in self.sums[range.clone()]
            .iter_mut()
            .zip(&mut self.means[range])
            .zip(sample)
        {
            *sum = *sum + x;
            *mean = *sum / n;
        }
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn pull_counts(&self) -> &[u64] {
        &self.pulls
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn mean(&self, arm: usize) -> &[S] {
        &self.means[arm * self.dims..(arm + 1) * self.dims]
    }

    fn check_active(&self, active: &[usize]) -> Result<()> {
        for &a in active {
            if a >= self.arms() {
                return invalid(format!("arm {a} out of range"));
            }
            if self.pulls[a] == 0 {
                return Err(PsiError::InvalidState(format!("active arm {a} has no samples")));
            }
        }
        Ok(())
    }
}

/// Empirical Pareto set of the active arms: `i` with `M̂(i, j) > 0` for every other active `j`.
pub fn empirical_pareto_set<S: Scalar>(state: &EmpiricalState<S>, active: &[usize]) -> Result<Vec<usize>> {
    state.check_active(active)?;
    let mut set: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| {
            active
                .iter()
                .all(|&j| j == i || crate::pareto::max_margin(state.mean(i), state.mean(j)) > S::zero())
        })
        .collect();
    set.sort_unstable();
    Ok(set)
}

/// Empirical gaps of the active arms in one round, aligned with `arms`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundGaps<S> {
    pub arms: Vec<usize>,
    pub in_pareto: Vec<bool>,
    /// `Δ̂*` for arms outside `S_r`, `δ̂*` for arms inside.
    pub gap: Vec<S>,
    /// `Δ̂*_i = max_j m̂(i, j)`.
    pub delta_star: Vec<S>,
    /// `δ̂*_i = min_j [M̂(i,j) ∧ (M̂(j,i)^+ + (Δ̂*_j)^+)]`.
    pub delta_small: Vec<S>,
}

impl<S: Scalar> RoundGaps<S> {
    pub fn pareto_arms(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .arms
            .iter()
            .zip(&self.in_pareto)
            .filter_map(|(&a, &p)| p.then_some(a))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn gap_of(&self, arm: usize) -> Option<S> {
        self.arms.iter().position(|&a| a == arm).map(|p| self.gap[p])
    }
}

/// Empirical gaps over `active` (at least two arms, all pulled).
pub fn empirical_gaps<S: Scalar>(state: &EmpiricalState<S>, active: &[usize]) -> Result<RoundGaps<S>> {
    state.check_active(active)?;
    if active.len() < 2 {
        return invalid("empirical gaps need at least two active arms");
    }
    let n = active.len();
    let table = margin_table(n, |p| state.mean(active[p]));
    Ok(round_gaps_from_table(active.to_vec(), &table))
}

pub(crate) fn round_gaps_from_table<S: Scalar>(arms: Vec<usize>, table: &[S]) -> RoundGaps<S> {
    let n = arms.len();
    let in_pareto: Vec<bool> = (0..n)
        .map(|i| (0..n).all(|j| j == i || table[i * n + j] > S::zero()))
        .collect();
    let parts = UnifiedParts::from_table(n, table);
    let gap = (0..n)
        .map(|i| {
            if in_pareto[i] {
                parts.delta_small[i]
            } else {
                parts.delta_star[i]
            }
        })
        .collect();
    RoundGaps {
        arms,
        in_pareto,
        gap,
        delta_star: parts.delta_star,
        delta_small: parts.delta_small,
    }
}

/// Keeps the `keep` arms with the smallest gaps.
///
/// Ties are resolved by keeping arms of the empirical Pareto set first, then
/// the lowest arm index. Returns `(survivors, removed)`, both ascending.
pub fn select_survivors<S: Scalar>(
    arms: &[usize],
    gaps: &[S],
    in_pareto: &[bool],
    keep: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..arms.len()).collect();
    order.sort_by(|&a, &b| {
        cmp_nan_last(gaps[a], gaps[b])
            .then(in_pareto[b].cmp(&in_pareto[a]))
            .then(arms[a].cmp(&arms[b]))
    });
    let keep = keep.min(arms.len());
    let mut survivors: Vec<usize> = order[..keep].iter().map(|&p| arms[p]).collect();
    let mut removed: Vec<usize> = order[keep..].iter().map(|&p| arms[p]).collect();
    survivors.sort_unstable();
    removed.sort_unstable();
    (survivors, removed)
}

/// Outcome of one algorithm run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrialRecord {
    /// Recommended arms, ascending.
    pub recommended: Vec<usize>,
    /// Rounds executed (the stopping round for the k-relaxed variant; the
    /// final time step for sequential samplers).
    pub rounds_used: usize,
    pub samples_used: u64,
    /// Arms accepted in each round.
    pub accepted_trace: Vec<Vec<usize>>,
    /// Arms rejected in each round.
    pub rejected_trace: Vec<Vec<usize>>,
}

impl TrialRecord {
    pub fn accepted(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.accepted_trace.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn rejected(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.rejected_trace.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }
}

fn pull_round<S: Scalar, Smp: Sampler<S> + ?Sized>(
    sampler: &mut Smp,
    state: &mut EmpiricalState<S>,
    active: &[usize],
    pulls: u64,
    buf: &mut [S],
) -> Result<u64> {
    for &arm in active {
        for _ in 0..pulls {
            sampler.sample_into(arm, buf)?;
            state.record(arm, buf);
        }
    }
    Ok(active.len() as u64 * pulls)
}

fn check_sampler<S: Scalar, Smp: Sampler<S> + ?Sized>(sampler: &Smp) -> Result<(usize, usize)> {
    let (arms, dims) = (sampler.arms(), sampler.dims());
    if arms < 2 || dims < 1 {
        return invalid(format!("sampler has K = {arms}, D = {dims}"));
    }
    Ok((arms, dims))
}

/// Runs EGE with an arbitrary schedule. The schedule is validated against
/// `(K, budget)` before any sample is drawn.
pub fn ege_run<S: Scalar, Smp: Sampler<S> + ?Sized>(
    sampler: &mut Smp,
    schedule: &Schedule,
    budget: u64,
) -> Result<TrialRecord> {
    let (arms, dims) = check_sampler(sampler)?;
    schedule.validate(arms, budget)?;
    if schedule.pulls()[0] == 0 {
        return Err(PsiError::InsufficientBudget {
            arms,
            budget,
            detail: "first round draws no samples".into(),
        });
    }
    let mut state = EmpiricalState::new(arms, dims);
    let mut buf = vec![S::zero(); dims];
    let mut active: Vec<usize> = (0..arms).collect();
    let mut record = TrialRecord::default();

    for r in 0..schedule.rounds() {
        record.samples_used += pull_round(sampler, &mut state, &active, schedule.pulls()[r], &mut buf)?;
        let keep = schedule.lambda()[r + 1];
        let (survivors, removed, pareto) = if active.len() == 1 {
            // a lone survivor is its own empirical Pareto set
            let pareto = active.clone();
            if keep == 0 {
                (Vec::new(), active.clone(), pareto)
            } else {
                (active.clone(), Vec::new(), pareto)
            }
        } else {
            let gaps = empirical_gaps(&state, &active)?;
            let (s, rm) = select_survivors(&gaps.arms, &gaps.gap, &gaps.in_pareto, keep);
            (s, rm, gaps.pareto_arms())
        };
        let (acc, rej): (Vec<usize>, Vec<usize>) = removed.iter().partition(|a| pareto.binary_search(a).is_ok());
        record.accepted_trace.push(acc);
        record.rejected_trace.push(rej);
        active = survivors;
    }
    let mut rec = record.accepted();
    rec.extend(&active);
    rec.sort_unstable();
    record.recommended = rec;
    record.rounds_used = schedule.rounds();
    Ok(record)
}

/// EGE with the Successive Rejects schedule that stops as soon as `k` arms
/// have been accepted and returns them.
///
/// Each round removes one arm of maximal empirical gap; among tied maxima an
/// arm outside `S_r` is removed first, then the lowest index.
pub fn ege_sr_k_run<S: Scalar, Smp: Sampler<S> + ?Sized>(
    sampler: &mut Smp,
    budget: u64,
    k: usize,
) -> Result<TrialRecord> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    let (arms, dims) = check_sampler(sampler)?;
    let schedule = Schedule::successive_rejects(arms, budget)?;
    let mut state = EmpiricalState::new(arms, dims);
    let mut buf = vec![S::zero(); dims];
    let mut active: Vec<usize> = (0..arms).collect();
    let mut record = TrialRecord::default();
    let mut accepted: Vec<usize> = Vec::new();

    for r in 0..schedule.rounds() {
        record.samples_used += pull_round(sampler, &mut state, &active, schedule.pulls()[r], &mut buf)?;
        let gaps = empirical_gaps(&state, &active)?;
        let pos = argmax_removal(&gaps);
        let arm = gaps.arms[pos];
        active.retain(|&a| a != arm);
        if gaps.in_pareto[pos] {
            accepted.push(arm);
            record.accepted_trace.push(vec![arm]);
            record.rejected_trace.push(Vec::new());
        } else {
            record.accepted_trace.push(Vec::new());
            record.rejected_trace.push(vec![arm]);
        }
        if accepted.len() == k {
            accepted.sort_unstable();
            record.recommended = accepted;
            record.rounds_used = r + 1;
            return Ok(record);
        }
    }
    accepted.extend(&active);
    accepted.sort_unstable();
    record.recommended = accepted;
    record.rounds_used = schedule.rounds();
    Ok(record)
}

fn argmax_removal<S: Scalar>(gaps: &RoundGaps<S>) -> usize {
    let mut best = 0;
    for p in 1..gaps.arms.len() {
        let ord = cmp_nan_last(gaps.gap[p], gaps.gap[best])
            // prefer removing an arm outside S_r
            .then(gaps.in_pareto[best].cmp(&gaps.in_pareto[p]))
            .then(gaps.arms[best].cmp(&gaps.arms[p]));
        if ord.is_gt() {
            best = p;
        }
    }
    best
}

/// Loss for the "at most k optimal arms" problem: 1 on failure, 0 on success.
///
/// With exactly `k` arms recommended, success means they are all optimal;
/// otherwise the recommendation must equal the Pareto set.
pub fn psi_k_loss<S: Scalar>(recommended: &[usize], theta: &MeanMatrix<S>, k: usize) -> u8 {
    psi_k_loss_against(recommended, &pareto_set(theta), k)
}

/// [`psi_k_loss`] against a precomputed (ascending) Pareto set.
pub fn psi_k_loss_against(recommended: &[usize], pareto: &[usize], k: usize) -> u8 {
    let ok = if recommended.len() == k {
        recommended.iter().all(|a| pareto.binary_search(a).is_ok())
    } else {
        let mut r = recommended.to_vec();
        r.sort_unstable();
        r.dedup();
        r.len() == recommended.len() && r == pareto
    };
    u8::from(!ok)
}

/// Plain PSI loss: 0 iff the recommendation is exactly the Pareto set.
pub fn psi_loss_against(recommended: &[usize], pareto: &[usize]) -> u8 {
    let mut r = recommended.to_vec();
    r.sort_unstable();
    u8::from(r != pareto)
}
