//! Experiment runner for the matrix sum-product library.

pub mod config;
pub mod experiments;
pub mod report;

use std::time::Instant;

pub use config::{Config, Ctx};
pub use report::{emit_report, render, ExperimentReport, Format, Trial, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unsupported field: {0}")]
    FieldUnsupported(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0}")]
    Core(String),
}

pub fn experiment_names() -> impl Iterator<Item = &'static str> {
    experiments::CATALOG.iter().map(|e| e.name)
}

/// Runs one catalog entry. Everything in the report except `runtime_ms`
/// is a function of the configuration alone.
pub fn run_experiment(name: &str, cfg: &Config) -> Result<ExperimentReport, CliError> {
    let entry = experiments::lookup(name).ok_or_else(|| CliError::UnknownExperiment(name.to_string()))?;
    let ctx = Ctx::new(cfg)?;
    let start = Instant::now();
    let run = (entry.run)(&ctx)?;
    let mut report = ExperimentReport::from_trials(name, ctx.order.to_string(), run.trials);
    report.parameters = run.parameters;
    report.parameters.insert("seed".into(), ctx.seed.into());
    report.parameters.insert("summary".into(), entry.summary.into());
    if let Some(t) = ctx.trials {
        report.parameters.insert("trials".into(), t.into());
    }
    if let Some(m) = ctx.m {
        report.parameters.insert("m".into(), m.into());
    }
    for (role, src) in [&cfg.set_a, &cfg.set_b, &cfg.set_c, &cfg.set_d, &cfg.set_e, &cfg.set_f].iter().enumerate() {
        if let Some(s) = src {
            report.parameters.insert(format!("set_{}", config::role_name(role)), s.as_str().into());
        }
    }
    report.seeds = if run.seeds.is_empty() { vec![ctx.seed] } else { run.seeds };
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
