use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use silentwire_core::compiler::{diagnose, measure, validate};
use silentwire_core::harness::{
    csv_string, default_benches, emit_report, json_string, load_preset, read_trace, run_bench, run_cell, run_sweep,
    write_trace, BenchConfig, BenchReport, CellReport, ExperimentConfig, ExperimentReport, Preset, ReportFormat, TraceFile,
    Vary, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "silentwire", version, about = "Noise-robust simulation of asynchronous protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment config, or a bench preset.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Run one cell per value of L, T or alpha.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        vary: Option<Vary>,
        /// Comma-separated values; defaults to the config's `[sweep]` list.
        #[arg(long, value_delimiter = ',')]
        values: Vec<u64>,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Re-check a trace file written with `--keep-traces`.
    Validate { trace: PathBuf },
    /// Run the codec benches, or the bench presets given.
    CodecBench {
        presets: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct RunArgs {
    /// First seed; with `--seeds N` the run uses `seed..seed+N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Write a binary trace per run under `<out>/traces`.
    #[arg(long)]
    keep_traces: bool,
    /// What to print on stdout: per-run rows or the aggregate.
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Output directory for `<name>.csv` and `<name>.json`; overrides the environment.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.seed.is_some() || self.seeds.is_some() {
            let count = self.seeds.unwrap_or_else(|| cfg.seed_list().len().max(1) as u64);
            cfg.seed_base = self.seed.unwrap_or_else(|| cfg.seed_list().first().copied().unwrap_or(cfg.seed_base));
            cfg.seed_count = Some(count);
            cfg.seeds.clear();
        }
        if self.max_steps.is_some() {
            cfg.max_steps = self.max_steps;
        }
        cfg.keep_traces |= self.keep_traces;
    }

    fn out_dir(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, opts } => match load_preset(&config).with_context(|| format!("loading {}", config.display()))? {
            Preset::Bench(b) => print_benches(&[b], opts.format),
            Preset::Experiment(mut cfg) => {
                opts.apply(&mut cfg);
                run(&cfg, &opts)
            }
        },
        Command::Sweep { config, vary, values, opts } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            opts.apply(&mut cfg);
            sweep(&cfg, vary, values, &opts)
        }
        Command::Validate { trace } => check_trace(&trace),
        Command::CodecBench { presets, format } => {
            let mut benches = Vec::new();
            for p in &presets {
                match load_preset(p).with_context(|| format!("loading {}", p.display()))? {
                    Preset::Bench(b) => benches.push(b),
                    Preset::Experiment(_) => bail!("{} is not a bench preset", p.display()),
                }
            }
            if benches.is_empty() {
                benches = default_benches();
            }
            print_benches(&benches, format)
        }
    }
}

fn run(cfg: &ExperimentConfig, opts: &RunArgs) -> Result<ExitCode> {
    let out = opts.out_dir();
    let mut cells = Vec::new();
    for cell in cfg.cells()? {
        let report = run_cell(&cell)?;
        print_summary(&report);
        if cell.keep_traces {
            save_traces(&cell, &report, out.as_deref().unwrap_or(Path::new(".")))?;
        }
        cells.push(report);
    }
    let report = ExperimentReport { name: cfg.name.clone(), cells };
    emit(&report.metrics(), &report, &cfg.name, opts.format, out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(cfg: &ExperimentConfig, vary: Option<Vary>, values: Vec<u64>, opts: &RunArgs) -> Result<ExitCode> {
    let (vary, values) = match (vary, &cfg.sweep) {
        (Some(v), Some(s)) if values.is_empty() && s.vary == v => (v, s.values.clone()),
        (Some(v), _) => (v, values),
        (None, Some(s)) => (s.vary, if values.is_empty() { s.values.clone() } else { values }),
        (None, None) => bail!("no `--vary` and no [sweep] section"),
    };
    if values.is_empty() {
        bail!("no sweep values; pass `--values` or add them to [sweep]");
    }
    let report = run_sweep(cfg, vary, &values)?;
    for cell in &report.cells {
        print_summary(cell);
    }
    if let Some(f) = &report.fit {
        eprintln!("fit: C = {:.4}, max residual ratio = {:.3}", f.c, f.max_residual_ratio);
    }
    if let Some(e) = &report.fit_error {
        eprintln!("fit: {e}");
    }
    if let Some(m) = report.marginal_cost {
        eprintln!("marginal cost: {m:.4} bits per corrupted bit");
    }
    let out = opts.out_dir();
    if cfg.keep_traces {
        for (value, cell) in values.iter().zip(&report.cells) {
            save_traces(&cfg.with_value(vary, *value)?, cell, out.as_deref().unwrap_or(Path::new(".")))?;
        }
    }
    emit(&report.metrics(), &report, &cfg.name, opts.format, out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn print_summary(cell: &CellReport) {
    let s = &cell.summary;
    eprintln!(
        "{}: {}/{} passed ({:.3}), mean L' = {:.0}, mean overhead = {:.2}, truncated = {}",
        s.name, s.successes, s.runs, s.success_fraction, s.mean_l_prime, s.mean_overhead, s.truncated
    );
}

fn emit<T: serde::Serialize>(
    metrics: &[&silentwire_core::compiler::RunMetrics],
    aggregate: &T,
    name: &str,
    format: ReportFormat,
    out: Option<&Path>,
) -> Result<()> {
    if let Some(dir) = out {
        let path = dir.join(name);
        emit_report(metrics.iter().copied(), aggregate, &path).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}.csv and {}.json", path.display(), path.display());
    }
    match format {
        ReportFormat::Csv => print!("{}", csv_string(metrics.iter().copied())),
        ReportFormat::Json => print!("{}", json_string(aggregate)),
    }
    Ok(())
}

fn save_traces(cfg: &ExperimentConfig, report: &CellReport, out: &Path) -> Result<()> {
    let dir = out.join("traces");
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let protocol = cfg.pi.build(cfg.n, &cfg.base_dir)?;
    let topology = cfg.topology.build(cfg.n)?;
    for run in &report.runs {
        let Some(execution) = &run.execution else { continue };
        let path = dir.join(format!("{}.swtrace", run.metrics.run_id));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let trace = TraceFile {
            run_id: run.metrics.run_id.clone(),
            protocol: protocol.clone(),
            topology: topology.clone(),
            execution: execution.clone(),
        };
        write_trace(BufWriter::new(file), &trace)?;
    }
    Ok(())
}

fn check_trace(path: &Path) -> Result<ExitCode> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let trace = read_trace(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    let verdict = validate(&trace.execution.transcript, &trace.protocol);
    let failures = diagnose(&trace.execution);
    let metrics = measure(trace.run_id.clone(), &trace.execution, &verdict, failures.first().map(|f| f.kind));
    println!("run {}: {}", trace.run_id, if verdict.pass() { "pass" } else { "FAIL" });
    for v in &verdict.violations {
        println!("  violation: {v:?}");
    }
    for f in &failures {
        match f.lane {
            Some(lane) => println!("  failure event: {} in round {} slot {} on lane {lane}", f.kind, f.round, f.slot),
            None => println!("  failure event: {} in round {} slot {}", f.kind, f.round, f.slot),
        }
    }
    println!("  L = {}, L' = {}, T spent = {}, rounds = {}", metrics.l, metrics.l_prime, metrics.t_spent, metrics.rounds);
    Ok(if verdict.pass() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn print_benches(benches: &[BenchConfig], format: ReportFormat) -> Result<ExitCode> {
    let reports: Vec<BenchReport> = benches.iter().map(run_bench).collect();
    match format {
        ReportFormat::Json => print!("{}", json_string(&reports)),
        ReportFormat::Csv => {
            println!("bench,passed,key,value");
            for r in &reports {
                for (k, v) in &r.values {
                    println!("{},{},{k},{v}", r.name, r.passed);
                }
            }
        }
    }
    for r in &reports {
        eprintln!("{}: {}", r.name, if r.passed { "pass" } else { "FAIL" });
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
