//! Command-line harness for restless-bandit regret experiments.
//!
//! Data goes to the output file (or standard output); progress and
//! diagnostics go to standard error, so the tool is pipeline-safe. Rerunning
//! an identical invocation reproduces the CSV byte for byte.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use rmab::asr::AsrMode;
use rmab::engine::Dynamics;
use rmab::experiment::{run_experiment, ExperimentConfig, PolicyKind};
use rmab::scenario::{load_scenario, preset_names};

#[derive(Parser)]
#[command(
    name = "rmab",
    about = "Restless multi-armed bandit simulations: adaptive sequencing rules vs. baselines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit a regret CSV (plus a config sidecar).
    Run(RunArgs),
    /// List the built-in scenario presets.
    Scenarios,
    /// Validate a scenario (preset name or JSON file) and print a summary.
    Validate {
        /// Preset name or path to a scenario JSON file.
        scenario: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Practical,
    Theoretical,
}

#[derive(Clone, Copy, ValueEnum)]
enum DynamicsArg {
    Restless,
    Rested,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (see `rmab scenarios`) or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,

    /// Comma-separated policies to simulate.
    #[arg(long, value_delimiter = ',', default_value = "asr,dsee,rca")]
    policies: Vec<PolicyKind>,

    /// Rate-estimation variant for the adaptive policy.
    #[arg(long, value_enum, default_value = "practical")]
    mode: ModeArg,

    /// Tuning slack for the theoretical selection rule (and the bound).
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,

    /// Known lower bound on the squared top-mean gap (theoretical mode,
    /// the bound, and the deterministic-sequencing baseline).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,

    /// Number of time slots per run.
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,

    /// Number of Monte-Carlo runs per policy.
    #[arg(long, default_value_t = 100)]
    runs: u64,

    /// Master seed; run i uses a SplitMix64-derived seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Number of log-spaced checkpoints.
    #[arg(long, default_value_t = 50)]
    checkpoints: usize,

    /// Passive-arm dynamics.
    #[arg(long, value_enum, default_value = "restless")]
    dynamics: DynamicsArg,

    /// Multiplier on the adaptive policy's concentration constant L
    /// (1.0 = the published constant; smaller values are the customary
    /// practical exploration rates).
    #[arg(long, default_value_t = 1.0)]
    asr_scale: f64,

    /// Multiplier on both comparator policies' constants (1.0 = their
    /// published operating points).
    #[arg(long, default_value_t = 1.0)]
    baseline_scale: f64,

    /// Override the adaptive policy's L verbatim (bypasses --asr-scale).
    #[arg(long)]
    asr_l: Option<f64>,

    /// Append the theoretical regret-bound curve (labelled up to an
    /// additive constant; requires --epsilon and --delta).
    #[arg(long)]
    bound: bool,

    /// Additive constant for the bound curve.
    #[arg(long, default_value_t = 0.0)]
    bound_offset: f64,

    /// Cap Monte-Carlo parallelism.
    #[arg(long)]
    threads: Option<usize>,

    /// Output CSV path; omit to write to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> rmab::Result<()> {
    let cfg = ExperimentConfig {
        scenario: args.scenario,
        policies: args.policies,
        mode: match args.mode {
            ModeArg::Practical => AsrMode::Practical,
            ModeArg::Theoretical => AsrMode::Theoretical,
        },
        epsilon: args.epsilon,
        delta: args.delta,
        horizon: args.horizon,
        runs: args.runs,
        master_seed: args.seed,
        checkpoints: args.checkpoints,
        dynamics: match args.dynamics {
            DynamicsArg::Restless => Dynamics::Restless,
            DynamicsArg::Rested => Dynamics::Rested,
        },
        asr_scale: args.asr_scale,
        baseline_scale: args.baseline_scale,
        asr_l: args.asr_l,
        bound: args.bound,
        bound_offset: args.bound_offset,
        threads: args.threads,
        output: args.out,
    };
    let out = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => eprintln!("wrote {} and {}.config.json", path.display(), path.display()),
        None => print!("{}", out.csv),
    }
    Ok(())
}

fn validate(scenario: &str) -> rmab::Result<()> {
    let s = load_scenario(scenario)?;
    let instance = s.instance(0.0, 0.0)?;
    eprintln!("scenario '{}': {}", s.name, s.description);
    eprintln!(
        "{} arms, up to {} states, L = {:.4}, smallest eigenvalue gap {:.4}",
        instance.n_arms(),
        instance.stats.max_states,
        instance.stats.big_l,
        instance.stats.gap_min
    );
    for (k, &arm) in instance.stats.sigma.iter().enumerate() {
        eprintln!(
            "  rank {}: arm {} with stationary mean {:.6}",
            k + 1,
            arm,
            instance.stats.mu_sorted[k]
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Scenarios => {
            for (name, desc) in preset_names() {
                println!("{name}: {desc}");
            }
            Ok(())
        }
        Command::Validate { scenario } => validate(&scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
