//! Command-line front end: run JSON experiment specs, validate them, or
//! regenerate the reference figure data.

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

use deteq_core::experiment::{
    reproduce_figure, run_spec_to_file, ExperimentSpec, Figure, RunFailure, RunSettings, Units,
};
use deteq_core::SolverOptions;

#[derive(Parser)]
#[command(
    name = "deteq",
    about = "Deterministic equivalents for multi-hop relay and double-scattering MAC channels, \
             with Monte Carlo validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Report information in nats or bits
    #[arg(long, value_parser = parse_units)]
    units: Option<Units>,
    /// Fixed-point step tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed-point iteration cap
    #[arg(long)]
    max_iter: Option<u64>,
}

fn parse_units(s: &str) -> Result<Units, String> {
    match s {
        "nats" => Ok(Units::Nats),
        "bits" => Ok(Units::Bits),
        other => Err(format!("unknown units '{other}' (expected nats|bits)")),
    }
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment spec and write its output file
    Run {
        /// Path to the JSON spec
        spec: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Validate a spec without running it; lists every violation
    Validate {
        /// Path to the JSON spec
        spec: String,
    },
    /// Regenerate the data table behind a reference figure
    Figure {
        /// Which figure: fig2, fig3, or fig4
        #[arg(value_parser = parse_figure)]
        which: Figure,
        /// Monte Carlo trials per grid point
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Master seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn settings_from(args: &SolverArgs) -> RunSettings {
    let mut opts = SolverOptions::default();
    if let Some(tol) = args.tol {
        opts.tol = tol;
    }
    if let Some(max_iter) = args.max_iter {
        opts.max_iter = max_iter;
    }
    RunSettings {
        opts,
        units_override: args.units,
    }
}

fn init_thread_pool() {
    if let Ok(threads) = std::env::var("DETEQ_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid DETEQ_THREADS={threads}"),
        }
    }
}

fn load_spec(path: &str) -> Result<ExperimentSpec, RunFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunFailure::Io(format!("{path}: {e}")))?;
    ExperimentSpec::from_json(&text).map_err(|msg| RunFailure::Validation(vec![msg]))
}

fn failure_exit(failure: &RunFailure) -> ExitCode {
    eprintln!("{failure}");
    match failure {
        RunFailure::Validation(_) => ExitCode::from(2),
        RunFailure::Solver { .. } => ExitCode::from(3),
        RunFailure::Io(_) => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, solver } => {
            let parsed = match load_spec(&spec) {
                Ok(s) => s,
                Err(f) => return failure_exit(&f),
            };
            match run_spec_to_file(&parsed, &settings_from(&solver)) {
                Ok(out) => {
                    println!("wrote {} ({} rows)", out.path, out.rows.len());
                    ExitCode::SUCCESS
                }
                Err(f) => failure_exit(&f),
            }
        }
        Command::Validate { spec } => {
            let parsed = match load_spec(&spec) {
                Ok(s) => s,
                Err(f) => return failure_exit(&f),
            };
            let problems = parsed.validate();
            if problems.is_empty() {
                println!("{spec}: ok");
                ExitCode::SUCCESS
            } else {
                failure_exit(&RunFailure::Validation(problems))
            }
        }
        Command::Figure {
            which,
            trials,
            seed,
            out,
            solver,
        } => {
            let settings = settings_from(&solver);
            let units = settings.units_override.unwrap_or(Units::Nats);
            match reproduce_figure(which, trials, seed, &out, units, &settings.opts) {
                Ok(path) => {
                    println!("wrote {path}");
                    ExitCode::SUCCESS
                }
                Err(f) => failure_exit(&f),
            }
        }
    }
}
