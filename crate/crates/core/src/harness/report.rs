//! CSV and JSON output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::compiler::RunMetrics;

pub const CSV_COLUMNS: [&str; 14] = [
    "run_id",
    "seed",
    "L",
    "alpha",
    "L_prime",
    "T_budget",
    "T_spent",
    "rounds",
    "latency_steps",
    "per_path_latency",
    "success",
    "failure_kind",
    "epsilon",
    "overhead",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn row(m: &RunMetrics) -> [String; 14] {
    let paths: Vec<String> = m.per_path_latency.iter().map(|(k, v)| format!("{k}={v}")).collect();
    [
        m.run_id.clone(),
        m.seed.to_string(),
        m.l.to_string(),
        m.alpha.to_string(),
        m.l_prime.to_string(),
        m.t_budget.to_string(),
        m.t_spent.to_string(),
        m.rounds.to_string(),
        m.latency_steps.to_string(),
        paths.join(";"),
        m.success.to_string(),
        m.failure_kind.map(|k| k.as_str().to_string()).unwrap_or_default(),
        m.epsilon.to_string(),
        m.overhead.to_string(),
    ]
}

/// One row per run, sorted by run id.
pub fn write_csv<'a, W: Write>(out: W, metrics: impl IntoIterator<Item = &'a RunMetrics>) -> csv::Result<()> {
    let mut rows: Vec<&RunMetrics> = metrics.into_iter().collect();
    rows.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for m in rows {
        w.write_record(row(m))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<'a>(metrics: impl IntoIterator<Item = &'a RunMetrics>) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, metrics).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `path.csv` and `path.json`.
pub fn emit_report<'a, T: Serialize>(
    metrics: impl IntoIterator<Item = &'a RunMetrics>,
    aggregate: &T,
    path: &Path,
) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path.with_extension("csv"), csv_string(metrics))?;
    std::fs::write(path.with_extension("json"), json_string(aggregate))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn metrics(id: &str) -> RunMetrics {
        RunMetrics {
            run_id: id.into(),
            seed: 3,
            l: 10,
            alpha: 2.5,
            l_prime: 400,
            t_budget: 5,
            t_spent: 4,
            rounds: 7,
            latency_steps: 999,
            per_path_latency: BTreeMap::from([("0->1#3".to_string(), 12)]),
            success: true,
            failure_kind: None,
            epsilon: 0.01,
            overhead: 40.0,
        }
    }

    #[test]
    fn header_and_order() {
        let text = csv_string([&metrics("b"), &metrics("a")]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("a,3,10,2.5,400,5,4,7,999,0->1#3=12,true,,0.01,40"));
        assert_eq!(text, csv_string([&metrics("a"), &metrics("b")]));
    }
}
