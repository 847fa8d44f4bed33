use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spectral_fields_cli::{execute, EXIT_RUNTIME_ERROR};

/// Simulate Gaussian fields from spectral densities and check ball-probability
/// inequalities by Monte Carlo.
///
/// Exit status: 0 all checks consistent, 1 a violation, 2 underpowered,
/// 3 runtime or configuration error.
#[derive(Parser, Debug)]
#[command(name = "spectral-fields", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(EXIT_RUNTIME_ERROR as u8);
        }
    }
    ExitCode::from(execute(&args.config, args.output.as_deref()) as u8)
}
