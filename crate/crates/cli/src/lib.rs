//! levylab: run distributional experiments on conditioned Lévy paths from a
//! JSON config and write deterministic result files.
//!
//! Determinism contract: results.csv and ensembles.csv are byte-identical
//! across reruns and across `LEVYLAB_WORKERS` settings; summary.json differs
//! only in its wall-clock field.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};

use config::{ExperimentConfig, ValidatedConfig};
use experiments::{find_experiment, CATALOG};
use report::{write_report, ExperimentReport, Summary};

/// Worker-count override from LEVYLAB_WORKERS; None means the default pool.
pub fn worker_count() -> anyhow::Result<Option<usize>> {
    match std::env::var("LEVYLAB_WORKERS") {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => {
            let k: usize = s
                .trim()
                .parse()
                .with_context(|| format!("LEVYLAB_WORKERS must be a positive integer, got `{s}`"))?;
            if k == 0 {
                bail!("LEVYLAB_WORKERS must be a positive integer, got 0");
            }
            Ok(Some(k))
        }
    }
}

/// Run a validated config on its experiment, inside a dedicated pool when a
/// worker count is requested.  Replicate substreams make the result
/// independent of the pool size.
pub fn run_experiment(cfg: &ValidatedConfig) -> anyhow::Result<ExperimentReport> {
    let exp = find_experiment(&cfg.experiment)
        .ok_or_else(|| anyhow::anyhow!(unknown_experiment_message(&cfg.experiment)))?;
    match worker_count()? {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .context("cannot build worker pool")?;
            pool.install(|| (exp.run)(cfg))
        }
        None => (exp.run)(cfg),
    }
}

pub fn unknown_experiment_message(name: &str) -> String {
    let mut msg = format!("unknown experiment `{name}`; available experiments:\n");
    for e in CATALOG {
        msg.push_str(&format!("  {}\n", e.name));
    }
    msg
}

/// Load, validate, run and report.  Returns whether every test passed.
pub fn execute(config_path: &Path) -> anyhow::Result<bool> {
    let cfg = ExperimentConfig::from_path(config_path)
        .with_context(|| format!("loading {}", config_path.display()))?
        .validate()?;
    if find_experiment(&cfg.experiment).is_none() {
        bail!(unknown_experiment_message(&cfg.experiment));
    }
    let start = Instant::now();
    let rep = run_experiment(&cfg)?;
    let wall = start.elapsed().as_secs_f64();

    for t in &rep.tests {
        println!(
            "{} {} statistic={:.6} threshold={:.6} ess={:.0}",
            if t.pass { "PASS" } else { "FAIL" },
            t.test_id,
            t.statistic,
            t.threshold,
            t.ess
        );
    }
    let passed = rep.tests.iter().filter(|t| t.pass).count();
    println!(
        "{}: {}/{} tests passed in {:.1}s -> {}",
        cfg.experiment,
        passed,
        rep.tests.len(),
        wall,
        cfg.output.display()
    );

    let summary = Summary {
        experiment: &cfg.experiment,
        model: cfg.model.dynamics(),
        seed: cfg.seed,
        tests: &rep.tests,
        wall_time_s: wall,
    };
    write_report(&cfg.output, &summary, &rep.ensembles)
        .with_context(|| format!("writing {}", cfg.output.display()))?;
    Ok(rep.all_pass())
}
