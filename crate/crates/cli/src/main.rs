//! `monomial-lab`: enumeration, bounds, inequality checks and probes with
//! reproducible JSON/CSV output.
//!
//! Exit codes: 0 when every asserted check passed, 1 when a check failed
//! (a failure record is written), 2 for usage and input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monomial_lab_core::DEFAULT_CAP;

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(
    name = "monomial-lab",
    version,
    about = "Weighted multi-index and monomial-expansion laboratory"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed for every randomized step
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; output does not depend on it
    #[arg(long, global = true, env = "MONOMIAL_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Largest set any enumeration may produce
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Same as --format csv
    #[arg(long, global = true, conflicts_with = "json")]
    pub table: bool,
    /// Same as --format json
    #[arg(long, global = true)]
    pub json: bool,
}

impl Global {
    fn format(&self) -> Format {
        if self.table {
            Format::Csv
        } else if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List J(m,n), or a weighted family
    Enum(commands::EnumArgs),
    /// Exact size of a weighted family and its size bound
    Census(commands::FamilyArgs),
    /// Split indices of J(x) into a small-entry prefix and a large-entry suffix
    Decompose(commands::DecomposeArgs),
    /// Evaluate a closed-form bound
    Bound(commands::BoundArgs),
    /// Verify an inequality on concrete data
    #[command(subcommand)]
    Check(commands::CheckCommand),
    /// Lower bound for the unconditional basis constant of a monomial set
    Sidon(commands::SidonArgs),
    /// Numerical probes emitting plottable tables
    #[command(subcommand)]
    Probe(commands::ProbeCommand),
}

pub enum Status {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut sink = match Sink::open(cli.global.out.as_deref(), cli.global.format()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: --out: {e}");
            return ExitCode::from(2);
        }
    };
    let status = commands::run(&cli.command, &cli.global, &mut sink);
    let flushed = sink.finish();
    match (status, flushed) {
        (Ok(_), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        (Ok(Status::Pass), Ok(())) => ExitCode::SUCCESS,
        (Ok(Status::Fail), Ok(())) => ExitCode::from(1),
        (Err(e), _) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
