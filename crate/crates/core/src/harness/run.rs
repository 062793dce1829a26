use std::time::Instant;

use rayon::prelude::*;

use super::{AlgorithmId, ExperimentSpec, LossKind, Metric, ResultRow};
use crate::ape::{ape_fb_run, tune_a, ApeConfig};
use crate::ege::{ege_run, ege_sr_k_run, psi_k_loss_against, psi_loss_against, TrialRecord};
use crate::envs::{BanditInstance, SeededSampler};
use crate::error::{PsiError, Result};
use crate::hypervolume::hypervolume;
use crate::pareto::{complexity_profile, pareto_set, MeanMatrix};
use crate::schedule::Schedule;

/// Offset of the default reference point below the componentwise minimum.
const HV_REF_OFFSET: f64 = 1e-6;

/// Facts about the true instance needed to score trials.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub theta: MeanMatrix<f64>,
    pub pareto: Vec<usize>,
    /// `H`, when the instance is not degenerate.
    pub h1: Option<f64>,
    pub hv_ref: Option<Vec<f64>>,
    hv_total: Option<f64>,
}

impl GroundTruth {
    /// With `hv = true` the reference point defaults to the componentwise
    /// minimum of the means minus a small offset.
    pub fn new(theta: &MeanMatrix<f64>, hv: bool, hv_ref: Option<Vec<f64>>) -> Result<Self> {
        let pareto = pareto_set(theta);
        let h1 = complexity_profile(theta).ok().map(|p| p.h1);
        let (hv_ref, hv_total) = if hv {
            let r = hv_ref.unwrap_or_else(|| {
                (0..theta.dims())
                    .map(|d| theta.rows().map(|row| row[d]).fold(f64::INFINITY, f64::min) - HV_REF_OFFSET)
                    .collect()
            });
            let front: Vec<&[f64]> = pareto.iter().map(|&i| theta.row(i)).collect();
            let total = hypervolume(&front, &r)?;
            if !(total > 0.0) {
                return Err(PsiError::Validation("Pareto set has zero hypervolume".into()));
            }
            (Some(r), Some(total))
        } else {
            (hv_ref, None)
        };
        Ok(Self {
            theta: theta.clone(),
            pareto,
            h1,
            hv_ref,
            hv_total,
        })
    }
}

/// Score of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Judgement {
    pub loss: u8,
    pub tau: usize,
    pub samples: u64,
    pub hv_fraction: Option<f64>,
}

/// Scores a trial against the true means. The hypervolume fraction is
/// computed when `truth` was built with a reference point.
pub fn judge_trial(record: &TrialRecord, truth: &GroundTruth, loss: LossKind) -> Result<Judgement> {
    let loss = match loss {
        LossKind::Psi => psi_loss_against(&record.recommended, &truth.pareto),
        LossKind::PsiK(k) => psi_k_loss_against(&record.recommended, &truth.pareto, k),
    };
    let hv_fraction = match (&truth.hv_ref, truth.hv_total) {
        (Some(r), Some(total)) => {
            let pts: Vec<&[f64]> = record.recommended.iter().map(|&i| truth.theta.row(i)).collect();
            Some(hypervolume(&pts, r)? / total)
        }
        _ => None,
    };
    Ok(Judgement {
        loss,
        tau: record.rounds_used,
        samples: record.samples_used,
        hv_fraction,
    })
}

/// `n` log-spaced integer budgets from `K · R_max` to `max(T_max, K · R_max)`.
pub fn default_budget_grid(arms: usize, r_max: usize, t_max: u64) -> Vec<u64> {
    const POINTS: usize = 8;
    let lo = (arms * r_max.max(1)) as u64;
    let hi = t_max.max(lo);
    let (l, h) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..POINTS)
        .map(|i| (l + (h - l) * i as f64 / (POINTS - 1) as f64).exp().round() as u64)
        .map(|t| t.clamp(lo, hi))
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Clone)]
enum Plan {
    Elimination(Schedule),
    SrK(usize),
    Ape(ApeConfig),
}

/// One (algorithm, budget) cell ready to run trials.
#[derive(Debug, Clone)]
pub struct PreparedCell<'a> {
    instance: &'a BanditInstance,
    truth: &'a GroundTruth,
    plan: Plan,
    budget: u64,
    loss: LossKind,
    master_seed: u64,
    /// Metadata for the output row (e.g. tuning outside the guaranteed range).
    pub note: String,
}

impl<'a> PreparedCell<'a> {
    pub fn prepare(
        instance: &'a BanditInstance,
        truth: &'a GroundTruth,
        algorithm: AlgorithmId,
        budget: u64,
        loss: LossKind,
        master_seed: u64,
    ) -> Result<Self> {
        let arms = instance.arms();
        let mut note = String::new();
        let need_h = || {
            truth
                .h1
                .ok_or_else(|| PsiError::Validation("tuning needs a non-degenerate instance".into()))
        };
        let plan = match algorithm {
            AlgorithmId::EgeSr => Plan::Elimination(Schedule::successive_rejects(arms, budget)?),
            AlgorithmId::EgeSh => Plan::Elimination(Schedule::sequential_halving(arms, budget)?),
            AlgorithmId::EgeGg { rounds } => Plan::Elimination(Schedule::geometric_grid(arms, budget, rounds)?),
            AlgorithmId::Uniform => Plan::Elimination(Schedule::uniform(arms, budget)?),
            AlgorithmId::EgeSrK { k } => {
                Schedule::successive_rejects(arms, budget)?;
                Plan::SrK(k)
            }
            AlgorithmId::ApeFb { a } => {
                let cfg = ApeConfig::fixed(a, budget)?;
                if let Some(h) = truth.h1 {
                    if !cfg.within_guarantee(arms, h) {
                        note = "a beyond guaranteed range".into();
                    }
                }
                Plan::Ape(cfg)
            }
            AlgorithmId::ApeFbOracle { c } => {
                let a = c * tune_a(need_h()?, budget, arms)?;
                if c > 1.0 {
                    note = "a beyond guaranteed range".into();
                }
                Plan::Ape(ApeConfig::fixed(a, budget)?)
            }
            AlgorithmId::ApeFbAdapt { floor } => {
                if budget <= arms as u64 {
                    return Err(PsiError::InsufficientBudget {
                        arms,
                        budget,
                        detail: "adaptive tuning needs T > K".into(),
                    });
                }
                Plan::Ape(ApeConfig::adaptive(budget, floor)?)
            }
        };
        if let Plan::Elimination(s) = &plan {
            if s.pulls()[0] == 0 {
                return Err(PsiError::InsufficientBudget {
                    arms,
                    budget,
                    detail: format!("{algorithm} draws no samples in its first round"),
                });
            }
        }
        Ok(Self {
            instance,
            truth,
            plan,
            budget,
            loss,
            master_seed,
            note,
        })
    }

    /// Runs trial `trial` on its own sample stream and scores it.
    pub fn run_trial(&self, trial: u64) -> Result<Judgement> {
        let mut sampler = SeededSampler::new(self.instance, self.master_seed, trial);
        let record = match &self.plan {
            Plan::Elimination(s) => ege_run::<f64, _>(&mut sampler, s, self.budget)?,
            Plan::SrK(k) => ege_sr_k_run::<f64, _>(&mut sampler, self.budget, *k)?,
            Plan::Ape(cfg) => ape_fb_run::<f64, _>(&mut sampler, cfg)?,
        };
        judge_trial(&record, self.truth, self.loss)
    }
}

/// Runs every (algorithm, budget) cell of `spec`.
///
/// Instance and budget errors abort the grid; a cell that cannot run (for
/// example a schedule that does not fit its budget) yields a row with a note
/// and empty statistics.
pub fn run_grid(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let instance = spec.resolve_instance()?;
    let budgets = spec.resolve_budgets(&instance)?;
    let truth = GroundTruth::new(&instance.theta, spec.wants(Metric::HvFraction), spec.hv_ref.clone())?;
    let work = || -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for algorithm in &spec.algorithms {
            let loss = spec.loss_for(algorithm)?;
            for &budget in &budgets {
                rows.push(run_cell(spec, &instance, &truth, *algorithm, budget, loss)?);
            }
        }
        Ok(rows)
    };
    match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PsiError::InvalidState(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn run_cell(
    spec: &ExperimentSpec,
    instance: &BanditInstance,
    truth: &GroundTruth,
    algorithm: AlgorithmId,
    budget: u64,
    loss: LossKind,
) -> Result<ResultRow> {
    let label = spec.instance.label();
    let start = Instant::now();
    let cell = match PreparedCell::prepare(instance, truth, algorithm, budget, loss, spec.master_seed) {
        Ok(c) => c,
        Err(e) => {
            return Ok(ResultRow::failed(
                label,
                algorithm.to_string(),
                budget,
                spec.trials,
                format!("failed: {e}"),
            ))
        }
    };
    let outcomes: Vec<Judgement> = match (0..spec.trials)
        .into_par_iter()
        .map(|t| cell.run_trial(t))
        .collect::<Result<_>>()
    {
        Ok(o) => o,
        Err(e) => {
            return Ok(ResultRow::failed(
                label,
                algorithm.to_string(),
                budget,
                spec.trials,
                format!("failed: {e}"),
            ))
        }
    };
    let n = spec.trials as f64;
    let failures: u64 = outcomes.iter().map(|j| u64::from(j.loss)).sum();
    let mean = |f: &dyn Fn(&Judgement) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let mut row = ResultRow::from_failures(label, algorithm.to_string(), budget, spec.trials, failures);
    if spec.wants(Metric::Tau) {
        row.mean_tau = Some(mean(&|j| j.tau as f64));
    }
    if spec.wants(Metric::Samples) {
        row.mean_samples = Some(mean(&|j| j.samples as f64));
    }
    if spec.wants(Metric::HvFraction) {
        row.mean_hv_fraction = Some(mean(&|j| j.hv_fraction.unwrap_or(0.0)));
    }
    if spec.record_wall_time {
        row.wall_time = Some(start.elapsed().as_secs_f64());
    }
    row.note = cell.note;
    Ok(row)
}
