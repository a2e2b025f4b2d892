use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig, PiSpec, Vary};
use super::experiment::{run_cell, CellReport, CellSummary};
use super::fit::{fit_overhead, marginal_cost, FitModel, FitPoint, OverheadFit};
use crate::compiler::RunMetrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: u64,
    pub summary: CellSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub vary: Vary,
    pub rows: Vec<SweepRow>,
    /// For `L` sweeps.
    pub fit: Option<OverheadFit>,
    pub fit_error: Option<String>,
    /// For `T` sweeps: the largest `(L'(T) - L'(0)) / T`.
    pub marginal_cost: Option<f64>,
    #[serde(skip)]
    pub cells: Vec<CellReport>,
}

impl SweepReport {
    pub fn metrics(&self) -> Vec<&RunMetrics> {
        self.cells.iter().flat_map(|c| c.runs.iter().map(|r| &r.metrics)).collect()
    }
}

pub fn fit_model(pi: &PiSpec) -> FitModel {
    match pi {
        PiSpec::PingPong { msg_bits: 1, .. } => FitModel::Alpha1,
        _ => FitModel::VariableAlpha,
    }
}

/// Runs one cell per value of the varied quantity.
pub fn run_sweep(cfg: &ExperimentConfig, vary: Vary, values: &[u64]) -> Result<SweepReport, ConfigError> {
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &value in values {
        let cell = run_cell(&cfg.with_value(vary, value)?)?;
        rows.push(SweepRow { value, summary: cell.summary.clone() });
        cells.push(cell);
    }
    let mut report = SweepReport { name: cfg.name.clone(), vary, rows, fit: None, fit_error: None, marginal_cost: None, cells };
    match vary {
        Vary::L => {
            let points: Vec<FitPoint> = report
                .rows
                .iter()
                .map(|r| FitPoint { n: cfg.n, delta: cfg.delta, l: r.summary.mean_l, alpha: r.summary.mean_alpha, l_prime: r.summary.mean_l_prime })
                .collect();
            match fit_overhead(&points, fit_model(&cfg.pi)) {
                Ok(f) => report.fit = Some(f),
                Err(e) => report.fit_error = Some(e.to_string()),
            }
        }
        Vary::T => {
            let points: Vec<(u64, f64)> = report.rows.iter().map(|r| (r.value, r.summary.mean_l_prime)).collect();
            report.marginal_cost = marginal_cost(&points);
        }
        Vary::Alpha => {}
    }
    Ok(report)
}
