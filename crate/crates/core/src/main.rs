use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcvd::harness::{self, ConfigKeys, ExperimentConfig, Figure};

/// Diffusive molecular communication with a Poisson field of absorbing
/// receivers: closed forms, Monte Carlo checks and figure data as CSV.
#[derive(Debug, Parser)]
#[command(name = "mcvd", version)]
struct Cli {
    /// TOML file with configuration keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate closed forms over a sweep.
    #[command(allow_negative_numbers = true)]
    Analytic(Keys),
    /// Monte Carlo estimates with 95% intervals.
    #[command(allow_negative_numbers = true)]
    Simulate(Keys),
    /// Closed forms against Monte Carlo, with a pass/fail summary.
    #[command(allow_negative_numbers = true)]
    Compare(Keys),
    /// Reproduce one of the figure data sets.
    #[command(allow_negative_numbers = true)]
    Figure {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        keys: ConfigKeys,
    },
}

#[derive(Debug, clap::Args)]
struct Keys {
    #[command(flatten)]
    keys: ConfigKeys,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    ExitCode::from(run(cli) as u8)
}

fn run(cli: Cli) -> i32 {
    let (mode, figure, flags) = match cli.command {
        Command::Analytic(k) => ("analytic", None, k.keys),
        Command::Simulate(k) => ("simulate", None, k.keys),
        Command::Compare(k) => ("compare", None, k.keys),
        Command::Figure { which, keys } => ("figure", Some(which.name()), keys),
    };
    let file = match &cli.config {
        Some(path) => match ConfigKeys::load(path) {
            Ok(keys) => keys,
            Err(e) => return fail(&e),
        },
        None => ConfigKeys::default(),
    };
    let keys = file.overlay(ConfigKeys {
        mode: Some(mode.into()),
        figure: figure.map(Into::into),
        ..flags
    });
    let cfg = match ExperimentConfig::resolve(keys) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    let out = match harness::run(&cfg) {
        Ok(out) => out,
        Err(e) => return fail(&e),
    };
    let text = out.table.render();
    match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                return fail(&e.into());
            }
        }
        None => print!("{text}"),
    }
    if let Some(s) = &out.summary {
        eprintln!(
            "{} points, max |analytic - mc| = {:.3e}, inside CI = {:.1}% ({})",
            s.points,
            s.max_abs_error,
            100.0 * s.fraction_inside_ci,
            if out.passed { "pass" } else { "FAIL" }
        );
    }
    out.exit_code()
}

fn fail(e: &mcvd::Error) -> i32 {
    eprintln!("error: {e}");
    harness::exit_code(e)
}
