//! `psi`: run experiment grids and inspect instances from the command line.
//!
//! Arms are printed 1-based.

use std::fmt::Display;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psi_core::envs::{write_instance, LoadOptions};
use psi_core::harness::{
    emit_csv, run_grid, write_csv, AlgorithmId, BudgetSpec, ExperimentSpec, InstanceSource, Metric,
};
use psi_core::lowerbound::{class_b_check, lb_value, verify_gap_preservation, ClassVariant};
use psi_core::pareto::{complexity_profile, gap_vector, pareto_set, relaxed_profile};
use psi_core::{gen_experiment, BanditInstance, PsiError, Schedule};

#[derive(Parser)]
#[command(name = "psi", version, about = "Fixed-budget Pareto set identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an (algorithm x budget) grid of seeded trials and write CSV.
    Run(RunArgs),
    /// Print the Pareto set, gaps and complexity terms of an instance.
    Gaps(GapsArgs),
    /// Write a generated experiment instance as CSV.
    Gen(GenArgs),
    /// Check class-B membership and verify the alternative instances.
    Lb(LbArgs),
    /// Print the round schedule of an elimination algorithm.
    Schedule(ScheduleArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance: exp:N[@seed], i3, staircase, or a CSV file path.
    #[arg(long, value_parser = parse_source)]
    instance: InstanceSource,
    /// The instance file starts with a K,D[,sigma] header line.
    #[arg(long)]
    header: bool,
    /// Replace the noise level by an isotropic sigma.
    #[arg(long)]
    sigma: Option<f64>,
}

impl InstanceArgs {
    fn source(&self) -> InstanceSource {
        match &self.instance {
            InstanceSource::File { path, options } => InstanceSource::File {
                path: path.clone(),
                options: LoadOptions {
                    header: self.header,
                    ..*options
                },
            },
            other => other.clone(),
        }
    }

    fn load(&self) -> Result<BanditInstance, PsiError> {
        let inst = self.source().load()?;
        match self.sigma {
            Some(s) => inst.with_sigma(s),
            None => Ok(inst),
        }
    }
}

fn parse_source(s: &str) -> Result<InstanceSource, String> {
    InstanceSource::parse(s).map_err(|e| e.to_string())
}

fn parse_algo(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|e: PsiError| e.to_string())
}

fn parse_budget(s: &str) -> Result<BudgetSpec, String> {
    s.parse().map_err(|e: PsiError| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: PsiError| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Algorithms: ege-sr, ege-sh, ege-gg:R, uniform, ege-sr-k:k, ape-fb:a,
    /// ape-fb-oracle:c, ape-fb-adapt[:floor].
    #[arg(long = "algo", required = true, value_delimiter = ',', value_parser = parse_algo)]
    algorithms: Vec<AlgorithmId>,
    /// Budgets: integers or multiples of H, H2, H2k (e.g. 5000,0.5H,10H2k).
    /// Omitted: 8 log-spaced budgets from K*R_max to --t-max.
    #[arg(long, value_delimiter = ',', value_parser = parse_budget)]
    budgets: Vec<BudgetSpec>,
    /// Upper end of the default budget grid [default: ceil(H)].
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Master seed; trial n uses stream n of this seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// k for the psi-k-loss metric (defaults to the k of ege-sr-k).
    #[arg(long)]
    k: Option<usize>,
    /// Metrics: error, psi-k-loss, hv-fraction, tau, samples.
    #[arg(long = "metric", value_delimiter = ',', value_parser = parse_metric, default_value = "error")]
    metrics: Vec<Metric>,
    /// Hypervolume reference point [default: componentwise minimum of the means minus 1e-6].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    hv_ref: Option<Vec<f64>>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    threads: Option<usize>,
    /// Fill the wall_time column (output is then not reproducible).
    #[arg(long)]
    wall_time: bool,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Also print the relaxation for "at most k optimal arms".
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    /// Experiment id (1-8).
    #[arg(long)]
    exp: u32,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the noise level by an isotropic sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    B,
    BPrime,
}

#[derive(Args)]
struct LbArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "b")]
    variant: VariantArg,
    /// Also print the lower bound value at this budget.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// ege-sr, ege-sh, ege-gg:R or uniform.
    #[arg(long = "algo", value_parser = parse_algo)]
    algorithm: AlgorithmId,
    #[arg(long = "K")]
    arms: usize,
    #[arg(long = "T")]
    budget: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Gaps(a) => gaps(a),
        Command::Gen(a) => gen(a),
        Command::Lb(a) => lb(a),
        Command::Schedule(a) => schedule(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn one_based(arms: &[usize]) -> String {
    let v: Vec<String> = arms.iter().map(|a| (a + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn list<T: Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn stdout_or_file(
    out: Option<&PathBuf>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), PsiError>,
) -> Result<(), PsiError> {
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            write(&mut buf)?;
            std::fs::write(path, buf).map_err(|source| PsiError::Io {
                path: path.clone(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn run(a: RunArgs) -> Result<(), PsiError> {
    let mut spec = ExperimentSpec::new(a.instance.source(), a.algorithms, a.budgets, a.trials)
        .with_seed(a.seed)
        .with_metrics(a.metrics);
    spec.sigma = a.instance.sigma;
    spec.k = a.k;
    spec.hv_ref = a.hv_ref;
    spec.t_max = a.t_max;
    spec.threads = a.threads;
    spec.record_wall_time = a.wall_time;
    let rows = run_grid(&spec)?;
    match &a.out {
        Some(path) => emit_csv(&rows, path),
        None => write_csv(&rows, io::stdout().lock()),
    }
}

fn gaps(a: GapsArgs) -> Result<(), PsiError> {
    let inst = a.instance.load()?;
    let theta = &inst.theta;
    println!("arms: {}  objectives: {}", theta.arms(), theta.dims());
    println!("pareto_set: {}", one_based(&pareto_set(theta)));
    match complexity_profile(theta) {
        Ok(p) => {
            for (i, g) in p.delta.iter().enumerate() {
                let kind = if p.is_optimal(i) { "optimal" } else { "sub-optimal" };
                println!("arm {:>3}  {kind:<11}  gap {g:.10e}", i + 1);
            }
            println!("H: {:.10e}", p.h1);
            println!("H2: {:.10e}", p.h2);
            if let Some(k) = a.k {
                let r = relaxed_profile(theta, k)?;
                println!("omega_{k}: {:.10e}", r.omega_k);
                println!("H2^({k}): {:.10e}", r.h2_k);
            }
        }
        Err(PsiError::DegenerateInstance { arm }) => {
            let g = gap_vector(theta);
            println!("gaps: {}", list(&g));
            println!("degenerate: arm {} has a zero gap, complexity undefined", arm + 1);
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<(), PsiError> {
    let mut inst = gen_experiment(a.exp, a.seed)?;
    if let Some(s) = a.sigma {
        inst = inst.with_sigma(s)?;
    }
    stdout_or_file(a.out.as_ref(), |w| {
        write_instance(&inst, w).map_err(|source| PsiError::Io {
            path: a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        })
    })
}

fn lb(a: LbArgs) -> Result<(), PsiError> {
    let inst = a.instance.load()?;
    let theta = &inst.theta;
    let variant = match a.variant {
        VariantArg::B => ClassVariant::B,
        VariantArg::BPrime => ClassVariant::BPrime,
    };
    let report = class_b_check(theta, variant);
    println!("variant: {variant:?}  member: {}", report.member);
    println!("pareto_set: {}", one_based(&report.pareto));
    for f in &report.failures {
        println!("failure: {f}");
    }
    for c in report.margin_checks.iter().filter(|c| !c.holds()) {
        println!(
            "margin failure: M({},{}) = {:.6e} < {:.6e}",
            c.i + 1,
            c.j + 1,
            c.margin,
            c.bound
        );
    }
    if !report.member {
        return Ok(());
    }
    let mut all_ok = true;
    for i in 0..theta.arms() {
        let r = verify_gap_preservation(theta, Some(i), variant)?;
        let ok = match variant {
            ClassVariant::B => r.preserved(),
            ClassVariant::BPrime => r.complexity_not_larger(),
        };
        all_ok &= ok;
        println!(
            "arm {:>3}  pareto_after {}  changed {}  max_rel_gap_dev {:.3e}  H {:.10e} -> {:.10e}  {}",
            i + 1,
            one_based(&r.pareto_after),
            r.pareto_changed,
            r.max_rel_deviation,
            r.h1_before,
            r.h1_after,
            if ok { "ok" } else { "FAIL" }
        );
    }
    println!("verified: {all_ok}");
    if let Some(t) = a.budget {
        let sigma = inst.noise.max_sigma();
        let h1 = complexity_profile(theta)?.h1;
        println!(
            "lower_bound(T={t}, sigma={sigma}): {:.10e}",
            lb_value(t as f64, h1, sigma)
        );
    }
    Ok(())
}

fn schedule(a: ScheduleArgs) -> Result<(), PsiError> {
    let s = match a.algorithm {
        AlgorithmId::EgeSr | AlgorithmId::EgeSrK { .. } => Schedule::successive_rejects(a.arms, a.budget)?,
        AlgorithmId::EgeSh => Schedule::sequential_halving(a.arms, a.budget)?,
        AlgorithmId::EgeGg { rounds } => Schedule::geometric_grid(a.arms, a.budget, rounds)?,
        AlgorithmId::Uniform => Schedule::uniform(a.arms, a.budget)?,
        other => {
            return Err(PsiError::InvalidArgument(format!("{other} has no round schedule")));
        }
    };
    println!("{s}");
    Ok(())
}
