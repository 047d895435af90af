//! Randomized verification of norm and entropy inequalities.
//!
//! Each check draws its instances from seeds derived from the master seed,
//! the check and the trial index, so every row of a [`Report`] can be
//! regenerated on its own and the report does not depend on the number of
//! worker threads.

pub mod checks;
pub mod config;
pub mod report;

pub use checks::{instance_seed, Check};
pub use config::ExperimentConfig;
pub use report::{Report, Row};

use svv_core::{Error, Result};

/// `all` or a comma-separated list of check names.
pub fn parse_suite(spec: &str) -> Result<Vec<Check>> {
    if spec.trim() == "all" {
        return Ok(Check::ALL.to_vec());
    }
    let checks = spec
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<Vec<Check>>>()?;
    if checks.is_empty() {
        return Err(Error::Parse("empty suite".into()));
    }
    Ok(checks)
}

/// Runs `checks` in order on a pool of `threads` workers (rayon's default
/// when `None`).
pub fn run_checks(
    cfg: &ExperimentConfig,
    checks: &[Check],
    threads: Option<usize>,
) -> Result<Report> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut report = Report::new(cfg.clone());
    pool.install(|| -> Result<()> {
        for check in checks {
            report.rows.extend(check.run(cfg)?);
        }
        Ok(())
    })?;
    Ok(report)
}

pub fn run_suite(cfg: &ExperimentConfig, suite: &str, threads: Option<usize>) -> Result<Report> {
    run_checks(cfg, &parse_suite(suite)?, threads)
}
