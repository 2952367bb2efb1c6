//! Command-line front end for the `idfsim` experiments: run configuration,
//! bit-stable CSV/JSON emission and exit-code mapping.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use config::{Checkpoint, Command, RunConfig};
pub use error::{CliError, CliResult};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "IDFSIM_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn init_thread_pool() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer (got {raw:?})"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
