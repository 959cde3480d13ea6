//! Runs simulations and theorem checks for `eps u'' + |A^{1/2} u|^{2 gamma} A u + u' = 0`.
//!
//! Exit codes: 0 all claims pass, 1 a claim failed, 2 configuration error,
//! 3 numerical failure (blowup or step underflow).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Run};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "kirchhoff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write trace.csv and run.toml.
    Simulate(RunArgs),
    /// Simulate, then check Theorems A, 1 and 2 into report.json.
    Verify(RunArgs),
    /// Integrate the prescribed-coefficient linear problem and check it.
    Linear(RunArgs),
    /// Repeat the Theorem 2 limits over `sweep_epsilon` or `sweep_gamma`.
    Sweep(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out_dir` from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated claim ids to keep, e.g. `B2,B5`.
    #[arg(long, value_delimiter = ',')]
    claims: Option<Vec<String>>,
    /// Worker threads for `sweep`.
    #[arg(long)]
    threads: Option<usize>,
    /// Reserved. The dynamics are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn prepare(args: &RunArgs) -> Result<Run, Failure> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(t) = args.t_end {
        config.t_end = t;
    }
    if let Some(e) = args.epsilon {
        config.epsilon = e;
    }
    if let Some(g) = args.gamma {
        config.gamma = g;
    }
    let out = args.out.clone().or_else(|| config.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| "out".into());
    std::fs::create_dir_all(&out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))?;
    config.out_dir = Some(out.display().to_string());
    if args.threads == Some(0) {
        return Err(Failure::Config("--threads must be positive".into()));
    }
    Ok(Run { config, out, claims: args.claims.clone(), threads: args.threads })
}

fn execute(command: &Command) -> Result<u8, Failure> {
    let status = |passed: bool| if passed { 0 } else { 1 };
    match command {
        Command::Simulate(a) => commands::simulate(&prepare(a)?).map(status),
        Command::Verify(a) => commands::verify(&prepare(a)?).map(status),
        Command::Linear(a) => commands::linear(&prepare(a)?).map(status),
        Command::Sweep(a) => commands::sweep(&prepare(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
