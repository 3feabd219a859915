//! Verification harness for the noncommutative Mukai identities in
//! `ncmukai-core`: configuration, suites, reports and the convergence study.

use std::time::Instant;

use rayon::prelude::*;

pub mod config;
pub mod error;
pub mod instance;
pub mod refine;
pub mod report;
pub mod suites;

pub use config::Config;
pub use error::AppError;
pub use report::RunReport;
pub use suites::Suite;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "NCMUKAI_THREADS";

/// Runs `suites` concurrently and collects their reports in the given order.
pub fn run_suites(suites: &[Suite], cfg: &Config, seed: u64) -> Result<RunReport, AppError> {
    let start = Instant::now();
    let reports = suites
        .par_iter()
        .map(|s| {
            let t = Instant::now();
            let out = s.run(cfg, seed)?;
            Ok(report::SuiteReport::new(s.name(), seed, out, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    Ok(RunReport::new(seed, reports, start.elapsed().as_secs_f64()))
}

/// Sizes the global rayon pool from `NCMUKAI_THREADS`, if set.
pub fn configure_threads() -> Result<(), AppError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| AppError::Config {
        pointer: format!("${THREADS_ENV}"),
        message: format!("expected a positive integer, got `{raw}`"),
    })?;
    // a pool built earlier in the process (tests) is left alone
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
