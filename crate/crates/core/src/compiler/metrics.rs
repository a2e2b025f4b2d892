use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::diagnose::FailureKind;
use super::runtime::Execution;
use super::validate::Verdict;

/// Per-run measurements. Field order is the report column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: String,
    pub seed: u64,
    /// Bits of the original protocol delivered.
    #[serde(rename = "L")]
    pub l: u64,
    pub alpha: f64,
    /// Bits driven by all nodes.
    #[serde(rename = "L_prime")]
    pub l_prime: u64,
    #[serde(rename = "T_budget")]
    pub t_budget: u64,
    #[serde(rename = "T_spent")]
    pub t_spent: u64,
    pub rounds: u64,
    pub latency_steps: u64,
    /// Latency of each maximal causal chain, keyed `from->to#index` by its last message.
    pub per_path_latency: BTreeMap<String, u64>,
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    pub epsilon: f64,
    pub overhead: f64,
}

impl RunMetrics {
    pub fn max_path_latency(&self) -> u64 {
        self.per_path_latency.values().copied().max().unwrap_or(0)
    }
}

pub fn measure(run_id: impl Into<String>, exec: &Execution, verdict: &Verdict, failure: Option<FailureKind>) -> RunMetrics {
    let t = &exec.transcript;
    let l = t.delivered_bits() as u64;
    let msgs = t.delivered_messages();
    let l_prime: u64 = exec.trace.driven_bits.iter().sum();
    let ratio = |a: f64, b: u64| if b == 0 { 0.0 } else { a / b as f64 };
    RunMetrics {
        run_id: run_id.into(),
        seed: exec.seed,
        l,
        alpha: ratio(l as f64, msgs as u64),
        l_prime,
        t_budget: exec.trace.budget,
        t_spent: exec.trace.spent,
        rounds: exec.trace.rounds,
        latency_steps: exec.trace.steps,
        per_path_latency: t
            .path_latencies()
            .into_iter()
            .map(|(r, lat)| (format!("{}->{}#{}", r.from, r.to, r.index), lat))
            .collect(),
        success: verdict.pass() && !exec.trace.truncated,
        failure_kind: failure,
        epsilon: ratio(exec.trace.spent as f64, l_prime),
        overhead: ratio(l_prime as f64, l),
    }
}
