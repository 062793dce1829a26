//! Seeded Monte Carlo evaluation of the algorithms over budget grids.
//!
//! Trial `n` of every cell draws its samples from the stream
//! `(master_seed, n)`, so results depend only on the [`ExperimentSpec`] and not
//! on how trials are scheduled across threads.

mod output;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use output::{emit_csv, read_csv, write_csv, ResultRow, CSV_COLUMNS};
pub use run::{default_budget_grid, judge_trial, run_grid, GroundTruth, Judgement, PreparedCell};

use crate::envs::{gen_experiment, i3, load_instance, staircase, BanditInstance, LoadOptions, NoiseSpec};
use crate::error::{PsiError, Result};
use crate::pareto::{complexity_profile, relax};

/// Noise level used for built-in instances unless overridden.
pub const DEFAULT_SIGMA: f64 = 0.25;

fn bad(msg: impl Into<String>) -> PsiError {
    PsiError::Validation(msg.into())
}

/// Algorithm identifiers accepted by the harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmId {
    EgeSr,
    EgeSh,
    EgeGg {
        rounds: usize,
    },
    Uniform,
    EgeSrK {
        k: usize,
    },
    ApeFb {
        a: f64,
    },
    /// APE-FB with `a = c · (25/36)(T-K)/H`.
    ApeFbOracle {
        c: f64,
    },
    ApeFbAdapt {
        floor: f64,
    },
}

impl AlgorithmId {
    /// `k` carried by the algorithm itself, if any.
    pub fn k(&self) -> Option<usize> {
        match self {
            AlgorithmId::EgeSrK { k } => Some(*k),
            _ => None,
        }
    }

    /// Number of elimination rounds on `arms` arms (1 for sequential samplers).
    pub fn rounds(&self, arms: usize) -> usize {
        match self {
            AlgorithmId::EgeSr | AlgorithmId::EgeSrK { .. } => arms - 1,
            AlgorithmId::EgeSh => crate::schedule::ceil_log2(arms),
            AlgorithmId::EgeGg { rounds } => *rounds,
            _ => 1,
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmId::EgeSr => write!(f, "ege-sr"),
            AlgorithmId::EgeSh => write!(f, "ege-sh"),
            AlgorithmId::EgeGg { rounds } => write!(f, "ege-gg:{rounds}"),
            AlgorithmId::Uniform => write!(f, "uniform"),
            AlgorithmId::EgeSrK { k } => write!(f, "ege-sr-k:{k}"),
            AlgorithmId::ApeFb { a } => write!(f, "ape-fb:{a}"),
            AlgorithmId::ApeFbOracle { c } => write!(f, "ape-fb-oracle:{c}"),
            AlgorithmId::ApeFbAdapt { floor } => write!(f, "ape-fb-adapt:{floor}"),
        }
    }
}

fn parse_num<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("invalid {what} '{s}'")))
}

impl FromStr for AlgorithmId {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| arg.ok_or_else(|| bad(format!("algorithm '{name}' needs ':{what}'")));
        let id = match (name, arg) {
            ("ege-sr", None) => AlgorithmId::EgeSr,
            ("ege-sh", None) => AlgorithmId::EgeSh,
            ("uniform", None) => AlgorithmId::Uniform,
            ("ege-gg", _) => AlgorithmId::EgeGg {
                rounds: parse_num("round count", need("R")?)?,
            },
            ("ege-sr-k", _) => AlgorithmId::EgeSrK {
                k: parse_num("k", need("k")?)?,
            },
            ("ape-fb", _) => AlgorithmId::ApeFb {
                a: parse_num("exploration parameter", need("a")?)?,
            },
            ("ape-fb-oracle", _) => AlgorithmId::ApeFbOracle {
                c: parse_num("oracle scale", need("c")?)?,
            },
            ("ape-fb-adapt", None) => AlgorithmId::ApeFbAdapt {
                floor: crate::ape::DEFAULT_ADAPT_FLOOR,
            },
            ("ape-fb-adapt", Some(e)) => AlgorithmId::ApeFbAdapt {
                floor: parse_num("gap floor", e)?,
            },
            _ => return Err(bad(format!("unknown algorithm '{s}'"))),
        };
        match id {
            AlgorithmId::EgeGg { rounds: 0 } => Err(bad("ege-gg needs at least one round")),
            AlgorithmId::EgeSrK { k: 0 } => Err(bad("ege-sr-k needs k >= 1")),
            AlgorithmId::ApeFb { a } if !(a >= 0.0 && a.is_finite()) => Err(bad("ape-fb needs a finite a >= 0")),
            AlgorithmId::ApeFbOracle { c } if !(c > 0.0 && c.is_finite()) => {
                Err(bad("ape-fb-oracle needs a finite c > 0"))
            }
            AlgorithmId::ApeFbAdapt { floor } if !(floor > 0.0 && floor.is_finite()) => {
                Err(bad("ape-fb-adapt needs a finite floor > 0"))
            }
            id => Ok(id),
        }
    }
}

/// Where the instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// Generated experiment `id` with the given generator seed.
    Experiment {
        id: u32,
        seed: u64,
    },
    I3,
    Staircase,
    File {
        path: PathBuf,
        options: LoadOptions,
    },
    Given(BanditInstance),
}

impl InstanceSource {
    /// Parses `exp:N`, `exp:N@seed`, `i3`, `staircase` or a file path.
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("exp:") {
            let (id, seed) = match rest.split_once('@') {
                Some((id, seed)) => (id, parse_num("generator seed", seed)?),
                None => (rest, 0),
            };
            return Ok(InstanceSource::Experiment {
                id: parse_num("experiment id", id)?,
                seed,
            });
        }
        Ok(match s {
            "i3" => InstanceSource::I3,
            "staircase" => InstanceSource::Staircase,
            "" => return Err(bad("empty instance source")),
            path => InstanceSource::File {
                path: PathBuf::from(path),
                options: LoadOptions::default(),
            },
        })
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSource::Experiment { id, seed: 0 } => format!("exp:{id}"),
            InstanceSource::Experiment { id, seed } => format!("exp:{id}@{seed}"),
            InstanceSource::I3 => "i3".into(),
            InstanceSource::Staircase => "staircase".into(),
            InstanceSource::File { path, .. } => path.display().to_string(),
            InstanceSource::Given(_) => "given".into(),
        }
    }

    pub fn load(&self) -> Result<BanditInstance> {
        let builtin = |theta: crate::pareto::MeanMatrix<f64>| {
            let d = theta.dims();
            BanditInstance::new(theta, NoiseSpec::isotropic(DEFAULT_SIGMA, d)?)
        };
        match self {
            InstanceSource::Experiment { id, seed } => gen_experiment(*id, *seed),
            InstanceSource::I3 => builtin(i3()),
            InstanceSource::Staircase => builtin(staircase()),
            InstanceSource::File { path, options } => load_instance(path, *options),
            InstanceSource::Given(inst) => Ok(inst.clone()),
        }
    }
}

/// Budget as an absolute count or a multiple of a complexity term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSpec {
    Fixed(u64),
    /// `⌈c · H⌉`.
    TimesH(f64),
    /// `⌈c · H_2⌉`.
    TimesH2(f64),
    /// `⌈c · H_2^(k)⌉`.
    TimesH2k(f64),
}

impl FromStr for BudgetSpec {
    type Err = PsiError;

    /// `5000`, `H`, `0.5H`, `3H2`, `10H2k`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let scaled = |suffix: &str| -> Option<Result<f64>> {
            let c = s.strip_suffix(suffix)?;
            Some(if c.is_empty() {
                Ok(1.0)
            } else {
                parse_num::<f64>("budget multiple", c).and_then(|c| {
                    if c > 0.0 && c.is_finite() {
                        Ok(c)
                    } else {
                        Err(bad(format!("budget multiple must be > 0 in '{s}'")))
                    }
                })
            })
        };
        if let Some(c) = scaled("H2k") {
            return Ok(BudgetSpec::TimesH2k(c?));
        }
        if let Some(c) = scaled("H2") {
            return Ok(BudgetSpec::TimesH2(c?));
        }
        if let Some(c) = scaled("H") {
            return Ok(BudgetSpec::TimesH(c?));
        }
        Ok(BudgetSpec::Fixed(parse_num("budget", s)?))
    }
}

/// Loss used to count failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// 1 unless the recommendation is exactly the Pareto set.
    Psi,
    /// The "at most k optimal arms" loss.
    PsiK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Error,
    PsiKLoss,
    HvFraction,
    Tau,
    Samples,
}

impl FromStr for Metric {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "error" => Metric::Error,
            "psi-k-loss" => Metric::PsiKLoss,
            "hv-fraction" => Metric::HvFraction,
            "tau" => Metric::Tau,
            "samples" => Metric::Samples,
            _ => return Err(bad(format!("unknown metric '{s}'"))),
        })
    }
}

/// A grid of (algorithm, budget) cells on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: InstanceSource,
    /// Replaces the instance noise with an isotropic level.
    pub sigma: Option<f64>,
    pub algorithms: Vec<AlgorithmId>,
    /// Empty selects [`default_budget_grid`].
    pub budgets: Vec<BudgetSpec>,
    pub trials: u64,
    pub master_seed: u64,
    pub metrics: Vec<Metric>,
    pub k: Option<usize>,
    pub hv_ref: Option<Vec<f64>>,
    /// Upper end of the default grid (defaults to `⌈H⌉`).
    pub t_max: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Fill the `wall_time` column. Timing makes output non-reproducible.
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn new(instance: InstanceSource, algorithms: Vec<AlgorithmId>, budgets: Vec<BudgetSpec>, trials: u64) -> Self {
        Self {
            instance,
            sigma: None,
            algorithms,
            budgets,
            trials,
            master_seed: 0,
            metrics: vec![Metric::Error],
            k: None,
            hv_ref: None,
            t_max: None,
            threads: None,
            record_wall_time: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_metrics(mut self, metrics: Vec<Metric>) -> Self {
        self.metrics = metrics;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }

    /// Loss used for `algorithm`.
    pub fn loss_for(&self, algorithm: &AlgorithmId) -> Result<LossKind> {
        if !self.wants(Metric::PsiKLoss) {
            return Ok(LossKind::Psi);
        }
        self.k
            .or_else(|| algorithm.k())
            .map(LossKind::PsiK)
            .ok_or_else(|| bad(format!("psi-k-loss for {algorithm} needs k")))
    }

    /// Instance with the noise override applied.
    pub fn resolve_instance(&self) -> Result<BanditInstance> {
        let inst = self.instance.load()?;
        match self.sigma {
            Some(s) => inst.with_sigma(s),
            None => Ok(inst),
        }
    }

    /// Structural checks that do not need the instance.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(bad("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(bad("no algorithm given"));
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be at least 1"));
        }
        if self.wants(Metric::HvFraction)
            && self.hv_ref.is_none()
            && matches!(self.instance, InstanceSource::Experiment { id: 3, .. })
        {
            return Err(bad("hv-fraction on exp:3 needs an explicit reference point"));
        }
        for a in &self.algorithms {
            self.loss_for(a)?;
        }
        Ok(())
    }

    /// Concrete budgets for `instance` (explicit list or default grid).
    pub fn resolve_budgets(&self, instance: &BanditInstance) -> Result<Vec<u64>> {
        let arms = instance.arms();
        let needs_profile = self.budgets.is_empty() && self.t_max.is_none()
            || self.budgets.iter().any(|b| !matches!(b, BudgetSpec::Fixed(_)));
        let profile = if needs_profile {
            Some(complexity_profile(&instance.theta)?)
        } else {
            None
        };
        let ceil = |x: f64| -> Result<u64> {
            if x.is_finite() && x >= 0.0 && x < u64::MAX as f64 {
                Ok(x.ceil() as u64)
            } else {
                Err(bad(format!("budget {x} is not representable")))
            }
        };
        let budgets = if self.budgets.is_empty() {
            let r_max = self.algorithms.iter().map(|a| a.rounds(arms)).max().unwrap_or(1);
            let t_max = match self.t_max {
                Some(t) => t,
                None => ceil(profile.as_ref().expect("profile computed").h1)?,
            };
            default_budget_grid(arms, r_max, t_max)
        } else {
            let mut out = Vec::with_capacity(self.budgets.len());
            for b in &self.budgets {
                let p = profile.as_ref();
                out.push(match *b {
                    BudgetSpec::Fixed(t) => t,
                    BudgetSpec::TimesH(c) => ceil(c * p.expect("profile computed").h1)?,
                    BudgetSpec::TimesH2(c) => ceil(c * p.expect("profile computed").h2)?,
                    BudgetSpec::TimesH2k(c) => {
                        let k = self
                            .k
                            .or_else(|| self.algorithms.iter().find_map(AlgorithmId::k))
                            .ok_or_else(|| bad("H2k budget needs k"))?;
                        ceil(c * relax(p.expect("profile computed"), k).h2_k)?
                    }
                });
            }
            out
        };
        if let Some(&t) = budgets.iter().find(|&&t| t < arms as u64) {
            return Err(bad(format!("budget {t} is below the number of arms {arms}")));
        }
        Ok(budgets)
    }
}
