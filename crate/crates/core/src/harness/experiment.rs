use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig};
use crate::adversaries::{AdversaryKind, AdversarySpec};
use crate::compiler::{diagnose, execute, measure, oracle_run, validate, SchedulerPolicy, Execution, FailureEvent, Protocol, RunMetrics, RunOptions, Verdict};
use crate::exchange::RoundSchedule;
use crate::netsim::Topology;

/// Multiplier on the round bound used for the default step cap.
pub const STEP_CAP_SLACK: u64 = 10;
const ORACLE_EVENT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub verdict: Verdict,
    pub failures: Vec<FailureEvent>,
    #[serde(skip)]
    pub execution: Option<Execution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub name: String,
    pub n: usize,
    pub delta: f64,
    pub adversary: AdversaryKind,
    pub budget: u64,
    pub runs: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub truncated: usize,
    /// Runs with at least one diagnosed failure event, by the first event's kind.
    pub failure_counts: BTreeMap<String, usize>,
    /// Delivery violations summed over runs without a diagnosed failure event.
    pub delivery_violations_clean: usize,
    pub mean_l: f64,
    pub mean_alpha: f64,
    pub mean_l_prime: f64,
    pub mean_t_spent: f64,
    pub mean_overhead: f64,
    pub mean_epsilon: f64,
    pub mean_rounds: f64,
    pub mean_latency_steps: f64,
    pub max_path_latency: u64,
    pub max_steps: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub summary: CellSummary,
    pub runs: Vec<RunOutcome>,
}

/// What a run of the protocol costs with nobody interfering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Baseline {
    pub steps: u64,
    pub rounds: u64,
}

pub fn baseline(protocol: &Protocol, topology: &Topology, delta: f64) -> Result<Baseline, ConfigError> {
    let ideal = oracle_run(protocol, SchedulerPolicy::Fifo, ORACLE_EVENT_CAP);
    if ideal.truncated || !ideal.all_terminated() {
        return Err(ConfigError::Invalid("protocol does not terminate over ideal channels".into()));
    }
    // each message needs at most one round per bit
    let rounds = STEP_CAP_SLACK * (ideal.delivered_bits() as u64 + ideal.delivered_messages() as u64 + 1);
    let cap = RoundSchedule::new(protocol.n(), delta).map_err(|e| ConfigError::Invalid(e.to_string()))?.start(rounds + 1) - 1;
    let opts = RunOptions { delta, seed: 0, budget: 0, max_steps: cap, keep_history: false };
    let exec = execute(protocol, topology, AdversarySpec::default().build(), opts)?;
    if exec.trace.truncated {
        return Err(ConfigError::Invalid("noise-free run did not finish".into()));
    }
    Ok(Baseline { steps: exec.trace.steps, rounds: exec.trace.rounds })
}

/// `τ(R + 1) - 1` for `R = STEP_CAP_SLACK · (rounds + T + 1)`: every extra
/// round costs the adversary at least one flip.
pub fn default_step_cap(n: usize, delta: f64, base: Baseline, budget: u64) -> u64 {
    let rounds = STEP_CAP_SLACK.saturating_mul(base.rounds + budget + 1);
    let mut s = RoundSchedule::new(n, delta).expect("validated config");
    s.start(rounds + 1) - 1
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_id(cell: &str, seed: u64) -> String {
    format!("{cell}-s{seed:010}")
}

/// Runs one cell: one deterministic run per seed.
pub fn run_cell(cfg: &ExperimentConfig) -> Result<CellReport, ConfigError> {
    cfg.check()?;
    let topology = cfg.topology.build(cfg.n)?;
    let protocol = cfg.pi.build(cfg.n, &cfg.base_dir)?;
    protocol.check_topology(&topology)?;
    let base = baseline(&protocol, &topology, cfg.delta)?;
    let max_steps = cfg.max_steps.unwrap_or_else(|| default_step_cap(cfg.n, cfg.delta, base, cfg.adversary.budget));
    let seeds = cfg.seed_list();
    let mut runs: Vec<RunOutcome> = seeds
        .par_iter()
        .map(|&seed| {
            let mut adv = cfg.adversary.clone();
            adv.seed = mix(adv.seed, seed);
            adv.horizon = adv.horizon.or(Some(base.steps));
            let opts = RunOptions { delta: cfg.delta, seed, budget: adv.budget, max_steps, keep_history: cfg.keep_traces };
            let exec = execute(&protocol, &topology, adv.build(), opts)?;
            let verdict = validate(&exec.transcript, &protocol);
            let failures = diagnose(&exec);
            let metrics = measure(run_id(&cfg.name, seed), &exec, &verdict, failures.first().map(|f| f.kind));
            Ok(RunOutcome { metrics, verdict, failures, execution: cfg.keep_traces.then_some(exec) })
        })
        .collect::<Result<_, ConfigError>>()?;
    runs.sort_by(|a, b| a.metrics.run_id.cmp(&b.metrics.run_id));
    let summary = summarize(cfg, &runs, max_steps);
    Ok(CellReport { summary, runs })
}

fn summarize(cfg: &ExperimentConfig, runs: &[RunOutcome], max_steps: u64) -> CellSummary {
    let k = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&RunMetrics) -> f64| runs.iter().map(|r| f(&r.metrics)).sum::<f64>() / k;
    let mut failure_counts = BTreeMap::new();
    for r in runs {
        if let Some(f) = r.failures.first() {
            *failure_counts.entry(f.kind.as_str().to_string()).or_insert(0) += 1;
        }
    }
    let successes = runs.iter().filter(|r| r.metrics.success).count();
    CellSummary {
        name: cfg.name.clone(),
        n: cfg.n,
        delta: cfg.delta,
        adversary: cfg.adversary.kind,
        budget: cfg.adversary.budget,
        runs: runs.len(),
        successes,
        success_fraction: successes as f64 / k,
        truncated: runs.iter().filter(|r| r.verdict.violations.contains(&crate::compiler::Violation::Truncated)).count(),
        failure_counts,
        delivery_violations_clean: runs.iter().filter(|r| r.failures.is_empty()).map(|r| r.verdict.delivery_violations()).sum(),
        mean_l: mean(&|m| m.l as f64),
        mean_alpha: mean(&|m| m.alpha),
        mean_l_prime: mean(&|m| m.l_prime as f64),
        mean_t_spent: mean(&|m| m.t_spent as f64),
        mean_overhead: mean(&|m| m.overhead),
        mean_epsilon: mean(&|m| m.epsilon),
        mean_rounds: mean(&|m| m.rounds as f64),
        mean_latency_steps: mean(&|m| m.latency_steps as f64),
        max_path_latency: runs.iter().map(|r| r.metrics.max_path_latency()).max().unwrap_or(0),
        max_steps,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    /// Every run of every cell, sorted by run id.
    pub fn metrics(&self) -> Vec<&RunMetrics> {
        let mut all: Vec<&RunMetrics> = self.cells.iter().flat_map(|c| c.runs.iter().map(|r| &r.metrics)).collect();
        all.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        all
    }
}

/// Runs every cell of the config in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let cells = cfg.cells()?.iter().map(run_cell).collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport { name: cfg.name.clone(), cells })
}
