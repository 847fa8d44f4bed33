//! Configuration-driven front end for the `spectral-fields` library.
//!
//! A run is described by one TOML file (see `configs/` for an example per
//! command) and writes CSV data with `.meta` sidecars, `metadata.txt` and a
//! flat `summary.txt` into the output directory.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{parse_config, ConfigError, ConfigErrors, RunConfig};
pub use run::{exit_status, run, RunOutcome, EXIT_RUNTIME_ERROR};

pub const DEFAULT_OUTPUT: &str = "output";

/// Reads, validates and runs a configuration file; returns the process exit
/// status. Diagnostics go to stderr.
pub fn execute(config: &Path, output: Option<&Path>) -> i32 {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_RUNTIME_ERROR;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("{}:{e}", config.display());
            }
            return EXIT_RUNTIME_ERROR;
        }
    };
    let out: PathBuf = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    match run(&cfg, &out) {
        Ok(outcome) => outcome.exit_code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME_ERROR
        }
    }
}
