//! `tto`: run trace-asymptotic experiments and the invariant self-test.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tto_core::harness::selftest::{selftest, SelftestOptions, TIME_BUDGET};
use tto_core::harness::{preset, run, ExitStatus, ExperimentConfig};
use tto_core::Error;

/// Environment variable overriding the worker thread count.
const THREADS_VAR: &str = "TTO_THREADS";

#[derive(Parser)]
#[command(name = "tto", version, about = "Truncated Toeplitz operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail ledger.
    Selftest,
    /// Run a named preset: classical, harmonic, example1 or example2.
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return exit(ExitStatus::Config);
    }
    let status = match cli.command {
        Command::Run { config, out } => match load(&config) {
            Ok(cfg) => {
                let dir = out
                    .or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("."));
                execute(&cfg, &dir)
            }
            Err(e) => report(&e),
        },
        Command::Preset { name, out } => match preset(&name) {
            Ok(cfg) => execute(&cfg, &out),
            Err(e) => report(&e),
        },
        Command::Selftest => run_selftest(),
    };
    exit(status)
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(path: &Path) -> tto_core::Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn report(err: &Error) -> ExitStatus {
    eprintln!("error: {err}");
    ExitStatus::from_error(err)
}

fn execute(config: &ExperimentConfig, dir: &Path) -> ExitStatus {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    for check in outcome.checks() {
        println!("{}", check.ledger_line());
    }
    match outcome.write_to(dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => return report(&e),
    }
    outcome.status()
}

fn run_selftest() -> ExitStatus {
    let report = selftest(SelftestOptions::default(), |c| println!("{}", c.ledger_line()));
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} checks, {} failed, {:.1} s",
        report.checks.len(),
        failed,
        report.elapsed.as_secs_f64()
    );
    if !report.within_budget() {
        eprintln!("warning: self-test exceeded the {} s budget", TIME_BUDGET.as_secs());
    }
    if report.all_passed() {
        ExitStatus::Success
    } else {
        ExitStatus::Tolerance
    }
}
