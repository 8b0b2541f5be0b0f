//! Simultaneous energy harvesting and sensing: dataset generation,
//! imaging, detector scoring, surrogate-based design search and reporting.
//!
//! A run lives in one directory holding its `config.toml` and one
//! subdirectory per phase, each with a hash manifest.

pub mod artifacts;
pub mod config;
mod error;
pub mod phase1;
pub mod phase2;
pub mod phase3;
pub mod phase4;
pub mod power;
pub mod presets;
pub mod report;
pub mod tables;

pub use artifacts::{derive_seed, Manifest, RunDir};
pub use config::{DamageState, EnergyState, ExperimentConfig, Objective, SensorLocation};
pub use error::{exit, PipelineError, Result};
pub use power::{energy_consumption, PowerBudget};

/// Outcome of a complete run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub training_failures: Vec<phase3::TrainingFailure>,
    pub evaluation: phase3::EvaluationOutput,
    pub optimization: phase4::Phase4Output,
    pub report: report::Summary,
}

impl RunSummary {
    /// Whether any design or repetition dropped out.
    pub fn partial(&self) -> bool {
        !self.training_failures.is_empty() || !self.evaluation.skipped.is_empty() || !self.report.gaps.is_empty()
    }
}

/// Runs every phase in order.
pub fn run_all(run: &RunDir, cfg: &ExperimentConfig) -> Result<RunSummary> {
    phase1::run_phase1(run, cfg)?;
    phase2::run_phase2(run, cfg)?;
    let training_failures = phase3::run_training(run, cfg)?;
    let evaluation = phase3::run_evaluation(run, cfg)?;
    let optimization = phase4::run_phase4(run, cfg)?;
    let report = report::run_report(run, cfg)?;
    Ok(RunSummary {
        training_failures,
        evaluation,
        optimization,
        report,
    })
}
