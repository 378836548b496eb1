//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    derive_seed, run_experiment, run_sweep, write_results, write_sweep_csv, ExperimentConfig, InstanceSource,
    SummaryStats, SweepParam,
};
use crate::algorithms::{identify_parents_unif, Policy, SharingScope};
use crate::bounds::{BoundReport, RATE_CAVEAT};
use crate::combinatorics::{action_count, binomial, unrank_subset};
use crate::error::{Error, Result};
use crate::scm::{build_tradeoff_instance, RewardKind};

#[derive(Parser, Debug)]
#[command(
    name = "causal-bandits",
    version,
    about = "Causal bandit simulations with an unknown graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write traces, summaries and a config sidecar.
    Run(RunArgs),
    /// Print regret-rate tables over a parameter grid.
    Bounds(BoundsArgs),
    /// Uniform-sampling parent identification on the trade-off class.
    Identify(IdentifyArgs),
    /// Final regret over a grid of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Values per variable.
    #[arg(long)]
    l: Option<usize>,
    /// Number of reward parents.
    #[arg(long)]
    k: Option<usize>,
    /// Intervention size.
    #[arg(long)]
    m: Option<usize>,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated: empknown+, empunknown+, raps, ucb, alg1, alg2.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Policy>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// bernoulli or gaussian.
    #[arg(long)]
    reward_kind: Option<String>,
    #[arg(long)]
    raps_epsilon: Option<f64>,
    /// Parent-search rounds per value (default ceil(ln 10 / eps^2)).
    #[arg(long)]
    raps_probes: Option<u64>,
    /// UCB exploration constant c in sqrt(c ln t / pulls).
    #[arg(long)]
    ucb_c: Option<f64>,
    /// none or subset.
    #[arg(long)]
    sharing: Option<String>,
    #[arg(long)]
    record_actions: bool,
    /// Standard UCB over every action of size <= m.
    #[arg(long)]
    full_action_space: bool,
    /// Give each policy its own instance within a repetition.
    #[arg(long)]
    unpaired: bool,
    /// Run RAPS even when k > 1.
    #[arg(long)]
    force_raps: bool,
    /// Use one random instance for all repetitions.
    #[arg(long, conflicts_with = "instance")]
    fixed_instance: bool,
    /// Load the instance from a JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    l: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    m: Vec<usize>,
    #[arg(long = "T", value_delimiter = ',', default_value = "10000")]
    horizon: Vec<u64>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Horizon (default 50 pulls per action of size k).
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-run outcomes as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// One of n, k, m, T.
    #[arg(long)]
    vary: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<u64>,
    /// Output directory for sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_reward_kind(s: &str) -> Result<RewardKind> {
    match s.to_ascii_lowercase().as_str() {
        "bernoulli" => Ok(RewardKind::Bernoulli),
        "gaussian" => Ok(RewardKind::Gaussian),
        _ => Err(Error::InvalidParameter(format!("unknown reward kind '{s}'"))),
    }
}

fn parse_sharing(s: &str) -> Result<SharingScope> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(SharingScope::None),
        "subset" => Ok(SharingScope::Subset),
        _ => Err(Error::InvalidParameter(format!("unknown sharing scope '{s}'"))),
    }
}

impl ExperimentArgs {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(
                8,
                3,
                1,
                3,
                10_000,
                100,
                vec![
                    Policy::EmpKnownPlus,
                    Policy::EmpUnknownPlus,
                    Policy::Raps,
                    Policy::StandardUcb,
                ],
            ),
        };
        macro_rules! set {
            ($($field:ident <- $arg:expr),* $(,)?) => {
                $(if let Some(v) = $arg.clone() { c.$field = v; })*
            };
        }
        set!(
            n <- self.n,
            l <- self.l,
            k <- self.k,
            m <- self.m,
            horizon <- self.horizon,
            reps <- self.reps,
            algorithms <- self.algos,
            base_seed <- self.seed,
            beta <- self.beta,
            raps_epsilon <- self.raps_epsilon,
            exploration <- self.ucb_c,
        );
        if self.edge_prob.is_some() {
            c.edge_prob = self.edge_prob;
        }
        if self.raps_probes.is_some() {
            c.raps_probes = self.raps_probes;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if let Some(s) = &self.reward_kind {
            c.reward_kind = parse_reward_kind(s)?;
        }
        if let Some(s) = &self.sharing {
            c.sharing = parse_sharing(s)?;
        }
        c.record_actions |= self.record_actions;
        c.full_action_space |= self.full_action_space;
        c.force_raps |= self.force_raps;
        if self.unpaired {
            c.paired = false;
        }
        if self.fixed_instance {
            c.instance = InstanceSource::Fixed;
        }
        if let Some(p) = &self.instance {
            c.instance = InstanceSource::Path(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_summary(summary: &SummaryStats) {
    println!("{:<16} {:>5} {:>14} {:>12}", "algorithm", "reps", "final_regret", "std");
    for a in &summary.algorithms {
        println!(
            "{:<16} {:>5} {:>14.3} {:>12.3}",
            a.algorithm, a.reps, a.final_mean, a.final_std
        );
    }
    for (name, why) in &summary.skipped {
        println!("skipped {name}: {why}");
    }
    if summary.partial {
        println!("PARTIAL DATA: {} run(s) failed", summary.failures.len());
        for f in &summary.failures {
            println!("  rep {} {}: {}", f.rep, f.algorithm, f.message);
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut config = args.exp.to_config()?;
    if args.out.is_some() {
        config.out = args.out.clone();
    }
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let result = run_experiment(&config)?;
    let paths = write_results(&result, &out)?;
    print_summary(&result.summary);
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let mut reports = Vec::new();
    for &n in &args.n {
        for &l in &args.l {
            for &k in &args.k {
                for &m in &args.m {
                    for &t in &args.horizon {
                        match BoundReport::new(n, l, k, m, t) {
                            Ok(r) => reports.push(r),
                            Err(e) => eprintln!("skipping n={n} l={l} k={k} m={m} T={t}: {e}"),
                        }
                    }
                }
            }
        }
    }
    println!(
        "{:>4} {:>3} {:>3} {:>3} {:>9} {:>6} {:>14} {:>14} {:>14} {:>12} {:>12}",
        "n", "l", "k", "m", "T", "regime", "lb_known_k", "ub_alg1", "ub_alg2", "alpha_k", "N_k"
    );
    for r in &reports {
        println!(
            "{:>4} {:>3} {:>3} {:>3} {:>9} {:>6} {:>14.3} {:>14.3} {:>14.3} {:>12.6} {:>12.3}",
            r.n,
            r.l,
            r.k,
            r.m,
            r.horizon,
            r.regime.as_str(),
            r.lb_known_k,
            r.ub_alg1,
            r.ub_alg2,
            r.alpha_k,
            r.n_k
        );
    }
    println!("({RATE_CAVEAT})");
    if let Some(path) = &args.csv {
        write_bounds_csv(&reports, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_bounds_csv(reports: &[BoundReport], path: &Path) -> Result<()> {
    let err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(err)?;
    for r in reports {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn cmd_identify(args: &IdentifyArgs) -> Result<()> {
    let (n, k) = (args.n, args.k);
    let arms = action_count(n, k, 2)?;
    let horizon = match args.horizon {
        Some(t) => t,
        None => u64::try_from(arms.saturating_mul(50)).map_err(|_| Error::Overflow("50 |A_k|".into()))?,
    };
    let subsets = binomial(n as u64, k as u64)?;
    let mut rows = Vec::with_capacity(args.runs);
    let mut errors = 0usize;
    for run in 0..args.runs {
        let p = unrank_subset(run as u128 % subsets, n, k)?;
        let inst = build_tradeoff_instance(n, k, &p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, &[&run.to_string(), "identify"]));
        let estimate = identify_parents_unif(&inst, k, horizon, &mut rng)?;
        let correct = estimate == p;
        errors += usize::from(!correct);
        rows.push((run, p, estimate, correct));
    }
    println!(
        "n={n} k={k} T={horizon} (|A_k|={arms}): {errors} misidentification(s) in {} runs",
        args.runs
    );
    if let Some(path) = &args.csv {
        let err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(err)?;
        w.write_record(["run", "true_parents", "estimate", "correct"])
            .map_err(err)?;
        let join = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
        for (run, p, est, ok) in rows {
            w.write_record([run.to_string(), join(&p), join(&est), ok.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let config = args.exp.to_config()?;
    let rows = run_sweep(&config, args.vary, &args.values)?;
    println!(
        "{:>8} {:<16} {:>5} {:>14} {:>12}",
        args.vary, "algorithm", "reps", "final_regret", "std"
    );
    for r in &rows {
        println!(
            "{:>8} {:<16} {:>5} {:>14.3} {:>12.3}",
            r.value, r.algorithm, r.reps, r.mean_final_regret, r.std_final_regret
        );
    }
    let dir = args
        .out
        .clone()
        .or(config.out)
        .unwrap_or_else(|| PathBuf::from("results"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("sweep.csv");
    write_sweep_csv(&rows, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Parses `argv` and runs the subcommand. Returns the process exit code:
/// 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Identify(a) => cmd_identify(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
