//! Experiment driver: run configuration, output files, the subcommands and
//! the acceptance run.

pub mod acceptance;
pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] blowup_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exit codes: all checks pass, a check failed, configuration or domain error.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Sizes the global rayon pool from `BLOWUP_LAB_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("BLOWUP_LAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("BLOWUP_LAB_THREADS = `{v}` is not a positive integer")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
