use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use glgp_core::harness::{
    emit, fit_exponent_from_runs, run_experiment, supermartingale_check, write_trajectory_csv, ExperimentConfig,
    Summary, Variable, MIN_DRIFT_TRIALS,
};
use glgp_core::oracle::{deletion_construct, ex_l_exact, forb_count_exact, SearchOrder};
use glgp_core::process::{EngineMode, Sampling, Schedule, StopRule};
use glgp_core::rng::trial_seed;
use glgp_core::trajectory::{derive_params, ModelParams, Sign};

#[derive(Parser)]
#[command(name = "glgp", version, about = "Random greedy high linear-girth r-clique removal process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials and write trace.csv, params.json and summary.json.
    Run(RunArgs),
    /// Run trials at several n and fit the growth exponent of M.
    Sweep(SweepArgs),
    /// Tabulate the closed-form trajectories on a grid in [0, t_M].
    Trajectory(TrajectoryArgs),
    /// Brute-force reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run trials with the incremental engine checked against full recomputation.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    ell: usize,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        Ok(derive_params(self.n, self.r, self.ell, self.lambda, self.alpha)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Stop {
    Term,
    Cap,
}

#[derive(Args, Clone)]
struct TrialArgs {
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop at termination or at a step cap.
    #[arg(long, value_enum, default_value_t = Stop::Term)]
    stop: Stop,
    /// Step cap for `--stop cap`; defaults to floor(n^2 t_M).
    #[arg(long)]
    cap: Option<u64>,
    /// Check every step against full recomputation.
    #[arg(long)]
    verify: bool,
    /// Recompute Q from scratch at every step.
    #[arg(long, conflicts_with = "verify")]
    naive: bool,
    /// Geometric checkpoint ratio.
    #[arg(long, default_value_t = 1.25)]
    ratio: f64,
    /// Checkpoint every this many steps instead of geometrically.
    #[arg(long)]
    every: Option<u64>,
    /// Sampled f_m per checkpoint and m.
    #[arg(long, default_value_t = 32)]
    y_samples: usize,
    /// Sampled f in Q per checkpoint.
    #[arg(long, default_value_t = 16)]
    w_samples: usize,
    /// Score each observation instead of the checkpoint mean.
    #[arg(long)]
    strict_envelope: bool,
    /// Brute-force girth check of each final hypergraph.
    #[arg(long)]
    check_girth: bool,
}

impl TrialArgs {
    fn config(&self, params: ModelParams) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(params, self.trials, self.seed);
        cfg.stop = match self.stop {
            Stop::Term => StopRule::Termination,
            Stop::Cap => StopRule::StepCap(self.cap.unwrap_or_else(|| cfg.params.step_horizon())),
        };
        cfg.schedule = match self.every {
            Some(every) => Schedule::Every { every },
            None if self.ratio > 1.0 => Schedule::Geometric { ratio: self.ratio },
            None => bail!("--ratio must exceed 1"),
        };
        let standard = Sampling::standard(cfg.params.ell);
        cfg.sampling =
            Sampling { y_per_checkpoint: self.y_samples, w_per_checkpoint: self.w_samples, w_pairs: standard.w_pairs };
        cfg.options.mode = if self.verify {
            EngineMode::Verify
        } else if self.naive {
            EngineMode::Naive
        } else {
            EngineMode::Incremental
        };
        cfg.strict_envelope = self.strict_envelope;
        cfg.check_girth = self.check_girth;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    trials: TrialArgs,
    /// Also estimate the drift of X^± for Q and Y_2 (needs 30 trials).
    #[arg(long)]
    drift: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    ell: usize,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of grid points.
    #[arg(long, default_value_t = 101)]
    t_grid: usize,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact linear Turán number ex_L(n, C_3^r ... C_ell^r) with a witness.
    Turan(SmallArgs),
    /// Number of linear r-graphs on [n] with linear girth above ell.
    Forb(SmallArgs),
    /// Deletion-method construction.
    Deletion {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 4)]
        ell: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the hypergraph in text format here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SmallArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 3)]
    ell: usize,
    /// Search node budget.
    #[arg(long, default_value_t = 50_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Order::Colex)]
    order: Order,
    /// Write the witness hypergraph in text format here.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Colex,
    ReverseColex,
}

impl From<Order> for SearchOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Colex => SearchOrder::Colex,
            Order::ReverseColex => SearchOrder::ReverseColex,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    ell: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.trials.config(args.model.params()?)?;
    let result = run_experiment(&cfg)?;
    let mut summary = Summary::new(&result);
    if args.drift {
        if result.traces.len() < MIN_DRIFT_TRIALS {
            bail!("--drift needs at least {MIN_DRIFT_TRIALS} trials");
        }
        for sign in [Sign::Plus, Sign::Minus] {
            summary.drift.push(supermartingale_check(&result.traces, Variable::Q, sign)?);
            if cfg.params.r > 2 && cfg.sampling.y_per_checkpoint > 0 {
                summary.drift.push(supermartingale_check(&result.traces, Variable::Y { m: 2 }, sign)?);
            }
        }
    }
    emit(&args.out, &result, &summary).with_context(|| format!("writing to {}", args.out.display()))?;
    if let Some(bad) = result.trials.iter().find(|t| t.girth_ok == Some(false)) {
        bail!("trial {} produced a forbidden cycle", bad.trial);
    }
    println!(
        "{}",
        json!({
            "trials": result.trials.len(),
            "mean_M": result.mean_m(),
            "containment": result.envelope.containment_fraction,
            "out": args.out,
        })
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut runs = Vec::new();
    for &n in &args.ns {
        let mut cfg = ExperimentConfig::new(derive_params(n, args.r, args.ell, None, None)?, args.trials, args.seed);
        cfg.sampling = Sampling::none();
        runs.push(run_experiment(&cfg)?);
    }
    let fit = fit_exponent_from_runs(&runs)?;
    fs::create_dir_all(&args.out)?;
    for run in &runs {
        let mut summary = Summary::new(run);
        summary.exponent = Some(fit.clone());
        emit(&args.out.join(format!("n{}", run.params.n)), run, &summary)?;
    }
    let cmp = fit.compare(args.ell);
    let line = json!({ "fit": fit, "comparison": cmp });
    fs::write(args.out.join("exponent.json"), serde_json::to_string_pretty(&line)?)?;
    println!("{line}");
    Ok(())
}

fn trajectory(args: TrajectoryArgs) -> Result<()> {
    let params = args.model.params()?;
    match args.out {
        Some(path) => write_trajectory_csv(fs::File::create(path)?, &params, args.t_grid)?,
        None => write_trajectory_csv(std::io::stdout().lock(), &params, args.t_grid)?,
    }
    Ok(())
}

fn write_witness(path: Option<PathBuf>, text: &str) -> Result<()> {
    if let Some(path) = path {
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn oracle(cmd: OracleCommand) -> Result<()> {
    let line = match cmd {
        OracleCommand::Turan(a) => {
            let res = ex_l_exact(a.n, a.r, a.ell, a.order.into(), a.budget)?;
            let text = res.witness.to_text();
            write_witness(a.witness, &text)?;
            json!({ "n": res.n, "r": res.r, "ell": res.ell, "ex": res.max_edges, "nodes": res.node_count, "witness": text })
        }
        OracleCommand::Forb(a) => {
            let res = forb_count_exact(a.n, a.r, a.ell, a.order.into(), a.budget)?;
            json!({ "n": res.n, "r": res.r, "ell": res.ell, "count": res.count.to_string(), "nodes": res.node_count })
        }
        OracleCommand::Deletion { n, r, ell, seed, witness } => {
            let rep = deletion_construct(n, r, ell, seed)?;
            write_witness(witness, &rep.hypergraph.to_text())?;
            json!({
                "n": n, "r": r, "ell": ell, "seed": seed,
                "base_edges": rep.base_edges,
                "keep_probability": rep.keep_probability,
                "retained": rep.retained,
                "short_cycles": rep.short_cycles,
                "deleted": rep.deleted,
                "edges": rep.hypergraph.len(),
            })
        }
    };
    println!("{line}");
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let params = derive_params(args.n, args.r, args.ell, None, None)?;
    let mut cfg = ExperimentConfig::new(params, args.trials, args.seed);
    cfg.sampling = Sampling::none();
    cfg.options.mode = EngineMode::Verify;
    cfg.check_girth = true;
    let result = run_experiment(&cfg).context("incremental and naive engines disagree")?;
    let steps: u64 = result.trials.iter().map(|t| t.m_final).sum();
    let girth_ok = result.trials.iter().all(|t| t.girth_ok == Some(true));
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{}",
        json!({
            "trials": args.trials,
            "seeds": (0..args.trials as u64).map(|k| trial_seed(args.seed, k)).collect::<Vec<_>>(),
            "steps_checked": steps,
            "mismatches": 0,
            "girth_ok": girth_ok,
        })
    )?;
    if !girth_ok {
        bail!("a final hypergraph contains a forbidden cycle");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Trajectory(a) => trajectory(a),
        Command::Oracle(c) => oracle(c),
        Command::Verify(a) => verify(a),
    }
}
