//! Experiment runner: configuration, seeded ensembles, fits and reports.

mod bench;
mod config;
mod experiment;
mod fit;
mod report;
mod schedule;
mod sweep;
mod trace;

pub use bench::{default_benches, run_bench, three_sigma, BenchConfig, BenchReport, BenchSpec};
pub use config::{ConfigError, ExperimentConfig, GridSpec, LengthsSpec, PiSpec, SweepSpec, TopologySpec, Vary};
pub use experiment::{
    baseline, default_step_cap, run_cell, run_experiment, run_id, Baseline, CellReport, CellSummary, ExperimentReport, RunOutcome,
    STEP_CAP_SLACK,
};
pub use fit::{fit_overhead, marginal_cost, FitError, FitModel, FitPoint, OverheadFit};
pub use report::{csv_string, emit_report, json_string, write_csv, ReportFormat, CSV_COLUMNS};
pub use schedule::{check_schedule, ScheduleCheck, TAU_RATIO_BOUNDS};
pub use sweep::{fit_model, run_sweep, SweepReport, SweepRow};
pub use trace::{read_trace, write_trace, TraceError, TraceFile, TRACE_MAGIC, TRACE_VERSION};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "SILENTWIRE_OUT_DIR";

/// A preset file holds either an experiment or a codec bench.
#[derive(Debug, Clone)]
pub enum Preset {
    Experiment(ExperimentConfig),
    Bench(BenchConfig),
}

pub fn load_preset(path: &std::path::Path) -> Result<Preset, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let value: toml::Table = text.parse()?;
    if value.contains_key("bench") {
        return Ok(Preset::Bench(toml::from_str(&text)?));
    }
    ExperimentConfig::load(path).map(Preset::Experiment)
}
