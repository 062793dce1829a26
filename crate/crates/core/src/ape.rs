//! APE-FB: the APE sampling rule run for a fixed budget.
//!
//! After one pull of every arm, each step computes the confidence bonuses
//! `β_i = (2/5)·sqrt(a / T_i)`, picks the candidate pair `(b_t, c_t)` and
//! pulls the less explored of the two. The output is the empirical Pareto
//! set of all arms after `T` pulls.

use crate::ege::{EmpiricalState, TrialRecord};
use crate::envs::Sampler;
use crate::error::{invalid, PsiError, Result};
use crate::pareto::{h1_of, UnifiedParts};
use crate::scalar::Scalar;

/// Default gap floor of the adaptive variant.
pub const DEFAULT_ADAPT_FLOOR: f64 = 1e-3;

/// Exploration parameter range guaranteed by theory is `a <= (25/36)(T-K)/H`.
const TUNE_FACTOR: f64 = 25.0 / 36.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApeConfig {
    pub a: f64,
    pub budget: u64,
    /// Re-estimate `a` every step from plug-in gaps.
    pub adapt: bool,
    pub adapt_floor: f64,
}

impl ApeConfig {
    pub fn fixed(a: f64, budget: u64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return invalid(format!("exploration parameter must be finite and >= 0, got {a}"));
        }
        Ok(Self {
            a,
            budget,
            adapt: false,
            adapt_floor: DEFAULT_ADAPT_FLOOR,
        })
    }

    pub fn adaptive(budget: u64, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return invalid(format!("gap floor must be finite and > 0, got {floor}"));
        }
        Ok(Self {
            a: 0.0,
            budget,
            adapt: true,
            adapt_floor: floor,
        })
    }

    /// Whether `a` lies in the range covered by the error guarantee for `(K, H)`.
    pub fn within_guarantee(&self, arms: usize, h1: f64) -> bool {
        tune_a(h1, self.budget, arms).is_ok_and(|limit| self.a <= limit)
    }
}

/// `(2/5)·sqrt(a/n)`.
pub fn beta<S: Scalar>(a: S, n: u64) -> Result<S> {
    if n == 0 {
        return Err(PsiError::InvalidState("bonus of an arm with no samples".into()));
    }
    if !(a >= S::zero()) {
        return invalid(format!("exploration parameter must be >= 0, got {a}"));
    }
    Ok(bonus(a, n))
}

/// `(25/36)(T-K)/H`, the largest `a` covered by the error guarantee.
pub fn tune_a(h1: f64, budget: u64, arms: usize) -> Result<f64> {
    if budget <= arms as u64 {
        return invalid(format!("tuning needs T > K (T = {budget}, K = {arms})"));
    }
    if !(h1 > 0.0) {
        return invalid(format!("complexity must be > 0, got {h1}"));
    }
    Ok(TUNE_FACTOR * (budget - arms as u64) as f64 / h1)
}

/// Candidate pair of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub b: usize,
    pub c: usize,
    pub pull: usize,
}

/// Empirical margins `M̂(i, j)` of all arms, updated one row and column at a time.
#[derive(Debug, Clone)]
struct MarginCache<S> {
    arms: usize,
    table: Vec<S>,
}

impl<S: Scalar> MarginCache<S> {
    fn new(state: &EmpiricalState<S>) -> Self {
        let arms = state.arms();
        let table = crate::pareto::margin_table(arms, |i| state.mean(i));
        Self { arms, table }
    }

    fn refresh(&mut self, state: &EmpiricalState<S>, p: usize) {
        let n = self.arms;
        let mp = state.mean(p);
        for j in (0..n).filter(|&j| j != p) {
            let mj = state.mean(j);
            let (mut pj, mut jp) = (S::neg_infinity(), S::neg_infinity());
            for (&x, &y) in mp.iter().zip(mj) {
                let d = x - y;
                if d > pj {
                    pj = d;
                }
                if -d > jp {
                    jp = -d;
                }
            }
            self.table[p * n + j] = pj;
            self.table[j * n + p] = jp;
        }
    }

    #[inline]
    fn m(&self, i: usize, j: usize) -> S {
        self.table[i * self.arms + j]
    }
}

fn check_state<S: Scalar>(state: &EmpiricalState<S>, bonuses: &[S]) -> Result<()> {
    if state.arms() < 2 {
        return invalid("APE needs at least two arms");
    }
    if bonuses.len() != state.arms() {
        return invalid(format!("{} bonuses for {} arms", bonuses.len(), state.arms()));
    }
    if let Some(a) = (0..state.arms()).find(|&a| state.pulls(a) == 0) {
        return Err(PsiError::InvalidState(format!("arm {a} has no samples")));
    }
    Ok(())
}

fn opt_mask<S: Scalar>(cache: &MarginCache<S>, bonuses: &[S]) -> Vec<bool> {
    (0..cache.arms)
        .map(|i| row_bounds(cache, bonuses, i).0 > S::zero())
        .collect()
}

/// `(min_j [M̂(i,j) - (β_i + β_j)], min_j [M̂(i,j) + (β_i + β_j)])`.
#[inline]
fn row_bounds<S: Scalar>(cache: &MarginCache<S>, bonuses: &[S], i: usize) -> (S, S) {
    let n = cache.arms;
    let row = &cache.table[i * n..(i + 1) * n];
    let bi = bonuses[i];
    let mut lo = S::infinity();
    let mut hi = S::infinity();
    for (j, (&m, &bj)) in row.iter().zip(&bonuses[..n]).enumerate() {
        if j == i {
            continue;
        }
        let s = bi + bj;
        let (l, h) = (m - s, m + s);
        if l < lo {
            lo = l;
        }
        if h < hi {
            hi = h;
        }
    }
    (lo, hi)
}

/// `OPT(t)`: arms whose margin over every other arm clears both bonuses.
pub fn opt_set<S: Scalar>(state: &EmpiricalState<S>, bonuses: &[S]) -> Result<Vec<usize>> {
    check_state(state, bonuses)?;
    let cache = MarginCache::new(state);
    Ok(opt_mask(&cache, bonuses)
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.then_some(i))
        .collect())
}

/// Chooses `b_t`, `c_t` and the arm to pull. Ties go to the lowest index.
pub fn select_bt_ct<S: Scalar>(state: &EmpiricalState<S>, bonuses: &[S]) -> Result<Selection> {
    check_state(state, bonuses)?;
    let cache = MarginCache::new(state);
    Ok(select(&cache, state.pull_counts(), bonuses))
}

fn select<S: Scalar>(cache: &MarginCache<S>, pulls: &[u64], bonuses: &[S]) -> Selection {
    let n = cache.arms;
    // b among arms outside OPT: largest optimistic margin
    let mut outside = Best::new(|x: S, best: S| x > best);
    // fallback when OPT covers every arm: smallest pessimistic margin
    let mut fallback = Best::new(|x: S, best: S| x < best);
    for i in 0..n {
        let (lo, hi) = row_bounds(cache, bonuses, i);
        fallback.offer(i, lo);
        if !(lo > S::zero()) {
            outside.offer(i, hi);
        }
    }
    let b = outside.index().or(fallback.index()).unwrap_or(0);
    let mut c = Best::new(|x: S, best: S| x < best);
    for j in (0..n).filter(|&j| j != b) {
        c.offer(j, cache.m(b, j) - bonuses[j]);
    }
    let c = c.index().unwrap_or(0);
    let pull = if pulls[c] < pulls[b] { c } else { b };
    Selection { b, c, pull }
}

/// Running arg-best; the first index wins ties and NaN never wins.
struct Best<S, F> {
    best: Option<(usize, S)>,
    better: F,
}

impl<S: Scalar, F: Fn(S, S) -> bool> Best<S, F> {
    fn new(better: F) -> Self {
        Self { best: None, better }
    }

    #[inline]
    fn offer(&mut self, i: usize, v: S) {
        match self.best {
            None => self.best = Some((i, v)),
            Some((_, bv)) if (self.better)(v, bv) || (bv.is_nan() && !v.is_nan()) => self.best = Some((i, v)),
            _ => {}
        }
    }

    fn index(&self) -> Option<usize> {
        self.best.map(|(i, _)| i)
    }
}

/// Plug-in complexity `Σ_i max(Δ̂_i, ε)^-2` over all arms, from unified empirical gaps.
pub fn adaptive_hardness<S: Scalar>(state: &EmpiricalState<S>, floor: S) -> Result<S> {
    check_state(state, &vec![S::zero(); state.arms()])?;
    let cache = MarginCache::new(state);
    Ok(hardness_from(&cache, floor))
}

fn hardness_from<S: Scalar>(cache: &MarginCache<S>, floor: S) -> S {
    let parts = UnifiedParts::from_table(cache.arms, &cache.table);
    let gaps: Vec<S> = (0..cache.arms).map(|i| parts.unified(i).max(floor)).collect();
    h1_of(&gaps)
}

/// Diagnostic quantities `(Z1, Z2)` over the empirical Pareto set `S(t)`,
/// with `min ∅ = +∞`. They drive no decision.
pub fn z_statistics<S: Scalar>(state: &EmpiricalState<S>, bonuses: &[S]) -> Result<(S, S)> {
    check_state(state, bonuses)?;
    let cache = MarginCache::new(state);
    let n = cache.arms;
    let in_s: Vec<bool> = (0..n)
        .map(|i| (0..n).all(|j| j == i || cache.m(i, j) > S::zero()))
        .collect();
    let mut z1 = S::infinity();
    let mut z2 = S::infinity();
    for i in 0..n {
        if in_s[i] {
            for j in (0..n).filter(|&j| j != i && in_s[j]) {
                z1 = z1.min(cache.m(i, j) - bonuses[i] - bonuses[j]);
            }
        } else {
            let best = (0..n)
                .filter(|&j| j != i)
                .map(|j| -cache.m(i, j) - bonuses[i] - bonuses[j])
                .fold(S::neg_infinity(), S::max);
            z2 = z2.min(best);
        }
    }
    Ok((z1, z2))
}

fn bonus<S: Scalar>(a: S, n: u64) -> S {
    S::lit(0.4) * (a / S::lit(n as f64)).sqrt()
}

/// Runs APE-FB (or its adaptive variant when `config.adapt` is set).
pub fn ape_fb_run<S: Scalar, Smp: Sampler<S> + ?Sized>(sampler: &mut Smp, config: &ApeConfig) -> Result<TrialRecord> {
    let (arms, dims) = (sampler.arms(), sampler.dims());
    if arms < 2 || dims < 1 {
        return invalid(format!("sampler has K = {arms}, D = {dims}"));
    }
    let budget = config.budget;
    if budget < arms as u64 {
        return Err(PsiError::InsufficientBudget {
            arms,
            budget,
            detail: "APE-FB pulls every arm once first".into(),
        });
    }
    if !config.adapt && !(config.a >= 0.0) {
        return invalid(format!("exploration parameter must be >= 0, got {}", config.a));
    }
    if config.adapt && !(config.adapt_floor > 0.0) {
        return invalid(format!("gap floor must be > 0, got {}", config.adapt_floor));
    }
    let mut state = EmpiricalState::new(arms, dims);
    let mut buf = vec![S::zero(); dims];
    for arm in 0..arms {
        sampler.sample_into(arm, &mut buf)?;
        state.record(arm, &buf);
    }
    let mut cache = MarginCache::new(&state);
    let mut bonuses = vec![S::zero(); arms];
    let fixed_a = S::lit(config.a);
    let floor = S::lit(config.adapt_floor);
    let scale = S::lit(TUNE_FACTOR * (budget - arms as u64) as f64);
    for (b, &n) in bonuses.iter_mut().zip(state.pull_counts()) {
        *b = bonus(fixed_a, n);
    }
    for _ in arms as u64..budget {
        if config.adapt {
            let a = scale / hardness_from(&cache, floor);
            for (b, &n) in bonuses.iter_mut().zip(state.pull_counts()) {
                *b = bonus(a, n);
            }
        }
        let pick = select(&cache, state.pull_counts(), &bonuses).pull;
        sampler.sample_into(pick, &mut buf)?;
        state.record(pick, &buf);
        cache.refresh(&state, pick);
        if !config.adapt {
            bonuses[pick] = bonus(fixed_a, state.pulls(pick));
        }
    }
    let recommended = (0..arms)
        .filter(|&i| (0..arms).all(|j| j == i || cache.m(i, j) > S::zero()))
        .collect();
    Ok(TrialRecord {
        recommended,
        rounds_used: budget as usize,
        samples_used: budget,
        accepted_trace: Vec::new(),
        rejected_trace: Vec::new(),
    })
}

/// APE-FB with `a` re-estimated every step from plug-in gaps floored at `floor`.
pub fn ape_fb_adapt_run<S: Scalar, Smp: Sampler<S> + ?Sized>(
    sampler: &mut Smp,
    budget: u64,
    floor: f64,
) -> Result<TrialRecord> {
    ape_fb_run(sampler, &ApeConfig::adaptive(budget, floor)?)
}
