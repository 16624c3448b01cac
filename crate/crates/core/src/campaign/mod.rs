//! Batch verification: a config selects suites, surfaces and flows; every
//! check runs with deterministic seeds and lands in a [`Report`].

pub mod catalog;
pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

use rayon::prelude::*;

pub use catalog::{by_module, catalog, lookup, CheckInfo, PLUMBING};
pub use config::{CampaignConfig, Resolutions, Suite};
pub use report::{summary_path, CheckRecord, Environment, Report, ResidualStats, Summary};

use crate::error::{Error, Result};

/// Environment variable overriding the worker thread count.
pub const THREADS_VAR: &str = "VERIFY_THREADS";

/// Thread count from [`THREADS_VAR`], else the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn run_campaign(config: &CampaignConfig) -> Result<Report> {
    run_campaign_with_threads(config, thread_count()?)
}

/// Runs every selected check on a pool of `threads` workers. Records come
/// back in task order whatever the scheduling; a check that errors becomes a
/// failed record carrying the error.
pub fn run_campaign_with_threads(config: &CampaignConfig, threads: usize) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let tasks = suites::build_tasks(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| tasks.par_iter().map(|t| t.run()).collect());

    let mut records = Vec::new();
    for (task, outcome) in tasks.iter().zip(outcomes) {
        match outcome {
            Ok(reports) => {
                for (info, rep) in task.checks.iter().zip(reports) {
                    let mut rec = CheckRecord::new(info, &task.surface, task.seed, rep).negative(task.negative);
                    rec.parameters = task.params.clone();
                    records.push(rec);
                }
            }
            Err(err) => {
                for info in &task.checks {
                    let mut rec = CheckRecord::errored(info, &task.surface, task.seed, &err).negative(task.negative);
                    rec.parameters = task.params.clone();
                    records.push(rec);
                }
            }
        }
    }
    let env = Environment {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds: config.seeds.clone(),
        threads,
    };
    Ok(Report::new(env, records, start.elapsed().as_secs_f64()))
}
