//! `qlitho`: runs lithography jobs described by JSON job files.

mod job;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use run::{Overrides, CliError};

#[derive(Debug, Parser)]
#[command(name = "qlitho", version, about = "Quantum interferometric lithography: rates, synthesis and fits")]
struct Args {
    /// Job file (JSON).
    #[arg(long)]
    job: PathBuf,
    /// Seed for every stochastic step; overrides the job file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Cross-check closed-form rates against the Fock-space oracle.
    #[arg(long)]
    oracle: bool,
    /// Output directory; overrides the job file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::invalid(e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    let overrides = Overrides { seed: args.seed, threads: args.threads, oracle: args.oracle, out: args.out };
    match run::run(&args.job, &overrides) {
        Ok(artifacts) => {
            println!("{}", serde_json::to_string(&artifacts).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
