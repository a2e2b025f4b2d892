//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any failed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silentwire_core::adversaries::{AdversaryKind, AdversarySpec};
use silentwire_core::bits::BitString;
use silentwire_core::coding::{
    amd_decode, amd_encode, decode_word, encode_word, is_silence, round_params, AmdStrength, EcCode, Payload, PayloadKind,
    WordLayout,
};
use silentwire_core::compiler::generators::{random_pipeline, Framing, LengthDist, PipelineSpec};
use silentwire_core::compiler::{diagnose, execute, RunOptions, Transcript};
use silentwire_core::exchange::RoundSchedule;
use silentwire_core::harness::{
    load_preset, run_bench, run_experiment, run_sweep, BenchConfig, BenchSpec, ExperimentConfig, Preset, SweepReport,
    TAU_RATIO_BOUNDS,
};
use silentwire_core::netsim::Topology;

const C1_PAYLOADS: usize = 1000;
const C1_TIME: Duration = Duration::from_secs(60);
const C2_TRIALS: usize = 100_000;
const C2_TIME: Duration = Duration::from_secs(120);
const C3_TRIALS: usize = 1000;
const C4_LEN: usize = 95;
const C4_SAMPLES: usize = 100_000;
const C5_MIN_SEEDS: usize = 200;
const C5_TIME: Duration = Duration::from_secs(30 * 60);
const C6_RESIDUAL_RATIO: f64 = 3.0;
const C6_MIN_SPAN: f64 = 100.0;
/// The generator stops after the message that reaches the target; 11 bits plus a 4-bit header.
const C7_MAX_FRAME: f64 = 15.0;
const C8_MAX_SPREAD: f64 = 3.0;
const C10_MAX_ROUND: u64 = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn preset_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name)
}

fn bench_preset(name: &str) -> BenchConfig {
    match load_preset(&preset_path(name)).expect("preset loads") {
        Preset::Bench(b) => b,
        Preset::Experiment(_) => panic!("{name} is not a bench preset"),
    }
}

fn experiment_preset(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&preset_path(name)).expect("preset loads")
}

fn sigma3(p: f64, k: usize) -> f64 {
    p + 3.0 * (p * (1.0 - p) / k as f64).sqrt()
}

fn random_payload(kind: PayloadKind, k: usize, rng: &mut ChaCha8Rng) -> Payload {
    let key = BitString::random(k, rng);
    match kind {
        PayloadKind::Raw => Payload::Raw { content: BitString::random(k, rng), key },
        PayloadKind::KeyRequest => Payload::KeyRequest { key },
        PayloadKind::KeyReply => Payload::KeyReply { fresh: BitString::random(k, rng), key },
        PayloadKind::MessageChunk => {
            Payload::MessageChunk { chunk: BitString::random(rng.gen_range(0..=k), rng), parity: rng.gen(), key }
        }
    }
}

fn c1_codec_roundtrip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut failures = 0;
    let mut rounds_seen = std::collections::BTreeSet::new();
    for i in 0..C1_PAYLOADS {
        let n = [2, 8][i % 2];
        let delta = [0.1, 0.01][(i / 2) % 2];
        let r = rng.gen_range(1..=64u64);
        rounds_seen.insert(r);
        let params = round_params(n, delta, r).expect("valid grid");
        let kind = PayloadKind::ALL[rng.gen_range(0..4)];
        let p = random_payload(kind, params.key_len, &mut rng);
        let w = encode_word(&p, &params, &mut rng).expect("payload fits");
        if w.len() != params.word_len || decode_word(&w, &params, kind).as_ref() != Some(&p) {
            failures += 1;
        }
    }
    let preset = run_bench(&bench_preset("c01_codec_roundtrip.toml"));
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && preset.passed && elapsed < C1_TIME,
        format!(
            "{C1_PAYLOADS} payloads over {} rounds: {failures} failures; preset {}; {:.1}s",
            rounds_seen.len(),
            verdict(preset.passed),
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_amd_detection() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut pass = true;
    let mut parts = Vec::new();
    for eta in [0.25, 1.0 / 16.0] {
        let strength = AmdStrength::new(eta).expect("eta in range");
        let mut undetected = 0usize;
        for _ in 0..C2_TRIALS {
            let m = BitString::random(64, &mut rng);
            let c = amd_encode(&m, strength, &mut rng).expect("nonempty message");
            let offset = loop {
                let e = BitString::random(c.len(), &mut rng);
                if !e.is_zero() {
                    break e;
                }
            };
            if amd_decode(&c.xor(&offset), strength).is_some() {
                undetected += 1;
            }
        }
        let rate = undetected as f64 / C2_TRIALS as f64;
        let bound = sigma3(eta, C2_TRIALS);
        pass &= rate <= bound;
        parts.push(format!("eta={eta}: {rate:.5} <= {bound:.5}"));
    }
    let preset = run_bench(&bench_preset("c02_amd_detection.toml"));
    let elapsed = start.elapsed();
    outcome(
        pass && preset.passed && elapsed < C2_TIME,
        format!("{}; preset {}; {:.1}s", parts.join(", "), verdict(preset.passed), elapsed.as_secs_f64()),
    )
}

fn c3_ecc_tolerance() -> Outcome {
    let sizes = match bench_preset("c03_ecc_tolerance.toml").bench {
        BenchSpec::EccTolerance { message_bits, .. } => message_bits,
        other => panic!("unexpected bench {other:?}"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let (mut random_fail, mut burst_fail, mut adversarial_fail) = (0usize, 0usize, 0usize);
    let mut heaviest = 0.0f64;
    for &k in &sizes {
        let code = EcCode::new(k).expect("positive size");
        let budget = code.len() / 3;
        for _ in 0..C3_TRIALS {
            let m = BitString::random(k, &mut rng);
            let c = code.encode(&m);

            let mut noisy = c.clone();
            for i in sample(&mut rng, c.len(), budget) {
                noisy.flip(i);
            }
            random_fail += usize::from(code.decode(&noisy).as_ref() != Ok(&m));

            let mut burst = c.clone();
            let at = rng.gen_range(0..=c.len() - budget);
            for i in at..at + budget {
                burst.flip(i);
            }
            burst_fail += usize::from(code.decode(&burst).as_ref() != Ok(&m));

            let e = code.misdirecting_offset(&mut rng);
            assert!(e.count_ones() <= budget, "adversarial offset over budget");
            heaviest = heaviest.max(e.count_ones() as f64 / c.len() as f64);
            adversarial_fail += usize::from(code.decode(&c.xor(&e)).as_ref() != Ok(&m));
        }
    }
    let trials = sizes.len() * C3_TRIALS;
    outcome(
        random_fail + burst_fail + adversarial_fail == 0,
        format!(
            "{trials} trials over sizes {sizes:?}: random {random_fail}, burst {burst_fail}, adversarial {adversarial_fail} \
             failures (adversarial offsets use at most {heaviest:.3}·|c| flips)"
        ),
    )
}

fn alternations(s: &BitString) -> usize {
    (1..s.len()).filter(|&i| s.get(i) != s.get(i - 1)).count()
}

fn c4_anti_silence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut hits = 0usize;
    let mut disagreements = 0usize;
    for _ in 0..C4_SAMPLES {
        let s = BitString::random(C4_LEN, &mut rng);
        let oracle = 3 * alternations(&s) < s.len();
        disagreements += usize::from(oracle != is_silence(&s));
        hits += usize::from(is_silence(&s));
    }
    let rate = hits as f64 / C4_SAMPLES as f64;
    let bound = sigma3((-5.0f64).exp(), C4_SAMPLES);
    let preset = run_bench(&bench_preset("c04_anti_silence.toml"));
    outcome(
        rate <= bound && disagreements == 0 && preset.passed,
        format!("rate {rate:.5} <= {bound:.5}; {disagreements} oracle disagreements; preset {}", verdict(preset.passed)),
    )
}

/// Test-side delivery check: every recorded message is the next unrecorded
/// send on its edge, recorded once, inside its send interval.
fn delivery_faults(t: &Transcript) -> usize {
    let mut faults = 0;
    for (&(u, v), sent) in &t.sent {
        let recv = t.received.get(&(u, v)).map(Vec::as_slice).unwrap_or(&[]);
        if recv.len() > sent.len() {
            faults += recv.len() - sent.len();
        }
        for (i, s) in sent.iter().enumerate() {
            match recv.get(i) {
                Some(r) => {
                    let inside = s.start_clock.is_some_and(|a| a <= r.clock) && s.return_clock.is_some_and(|b| r.clock <= b);
                    faults += usize::from(r.message != s.message || !inside);
                }
                None => {
                    let excused = match (t.terminated_at[v], s.return_clock) {
                        (Some(done), Some(ret)) => done <= ret,
                        (Some(_), None) => true,
                        _ => false,
                    };
                    faults += usize::from(!excused);
                }
            }
        }
    }
    for (&(u, v), recv) in &t.received {
        if !t.sent.contains_key(&(u, v)) {
            faults += recv.len();
        }
    }
    faults
}

fn c5_c9_end_to_end() -> (Outcome, Outcome) {
    let cfg = experiment_preset("c05_end_to_end.toml");
    let start = Instant::now();
    let report = run_experiment(&cfg).expect("ensemble runs");
    let elapsed = start.elapsed();
    let mut pass = elapsed < C5_TIME;
    let mut worst = (1.0f64, String::new());
    let mut runs = 0;
    let mut harness_violations = 0;
    let mut clean_runs = 0;
    for cell in &report.cells {
        let s = &cell.summary;
        runs += s.runs;
        pass &= s.runs >= C5_MIN_SEEDS && s.truncated == 0;
        pass &= if s.budget == 0 { s.successes == s.runs } else { s.success_fraction >= 1.0 - cfg.delta };
        for r in &cell.runs {
            pass &= !r.metrics.success || r.verdict.pass();
        }
        if s.success_fraction < worst.0 || worst.1.is_empty() {
            worst = (s.success_fraction, s.name.clone());
        }
        harness_violations += s.delivery_violations_clean;
        clean_runs += cell.runs.iter().filter(|r| r.failures.is_empty()).count();
    }
    let c5 = outcome(
        pass,
        format!(
            "{} cells, {runs} runs; lowest pass rate {:.3} ({}); threshold {:.2}; {:.0}s",
            report.cells.len(),
            worst.0,
            worst.1,
            1.0 - cfg.delta,
            elapsed.as_secs_f64()
        ),
    );

    let mut oracle_faults = 0;
    let mut checked = 0;
    let topology = Topology::complete(4);
    let pi = random_pipeline(&PipelineSpec {
        n: 4,
        target_bits: 100,
        lengths: LengthDist::Uniform { min: 3, max: 11 },
        framing: Framing::Prefixed { header_bits: 4 },
        seed: 7,
    });
    for kind in AdversaryKind::ALL {
        for seed in 1..=10u64 {
            let mut adv = AdversarySpec::new(kind, 1000, seed);
            adv.horizon = Some(2_000_000);
            let opts = RunOptions { delta: cfg.delta, seed, budget: 1000, max_steps: 200_000_000, keep_history: false };
            let exec = execute(&pi, &topology, adv.build(), opts).expect("runs");
            if diagnose(&exec).is_empty() {
                checked += 1;
                oracle_faults += delivery_faults(&exec.transcript);
            }
        }
    }
    let c9 = outcome(
        harness_violations == 0 && oracle_faults == 0,
        format!(
            "{harness_violations} violations over {clean_runs} failure-free ensemble runs; \
             independent check: {oracle_faults} faults over {checked} reruns"
        ),
    );
    (c5, c9)
}

fn mean_points(r: &SweepReport) -> Vec<(f64, f64)> {
    r.rows.iter().map(|row| (row.summary.mean_l, row.summary.mean_l_prime)).collect()
}

fn c6_cost_in_l() -> Outcome {
    let cfg = experiment_preset("c06_cost_scaling_l.toml");
    let sweep = cfg.sweep.clone().expect("sweep section");
    let report = run_sweep(&cfg, sweep.vary, &sweep.values).expect("sweep runs");
    let pts = mean_points(&report);
    let x: Vec<f64> = pts.iter().map(|&(l, _)| l * (cfg.n as f64 * l / cfg.delta).log2()).collect();
    let c = x.iter().zip(&pts).map(|(x, p)| x * p.1).sum::<f64>() / x.iter().map(|x| x * x).sum::<f64>();
    let ratios: Vec<f64> = x.iter().zip(&pts).map(|(x, p)| p.1 / (c * x)).collect();
    let worst = ratios.iter().map(|&r| r.max(1.0 / r)).fold(1.0, f64::max);
    let span = pts.last().unwrap().0 / pts[0].0;
    let alpha_one = report.rows.iter().all(|r| (r.summary.mean_alpha - 1.0).abs() < 1e-12);
    let harness_agrees = report.fit.as_ref().is_some_and(|f| ((f.c - c) / c).abs() < 1e-9);
    let success = report.rows.iter().all(|r| r.summary.successes == r.summary.runs);
    outcome(
        worst <= C6_RESIDUAL_RATIO && span >= C6_MIN_SPAN && alpha_one && harness_agrees && success,
        format!(
            "L from {} to {}: C = {c:.1}, max residual ratio {worst:.3} <= {C6_RESIDUAL_RATIO}; harness fit {}",
            pts[0].0,
            pts.last().unwrap().0,
            if harness_agrees { "agrees" } else { "disagrees" }
        ),
    )
}

fn c7_cost_in_t() -> Outcome {
    let cfg = experiment_preset("c07_cost_scaling_t.toml");
    let sweep = cfg.sweep.clone().expect("sweep section");
    let report = run_sweep(&cfg, sweep.vary, &sweep.values).expect("sweep runs");
    let base = report.rows.iter().find(|r| r.value == 0).expect("T = 0 row").summary.clone();
    let last_round = report.rows.iter().map(|r| r.summary.mean_rounds.ceil() as u64).max().unwrap_or(1) + 1;
    let (mut w_max, mut cost_min) = (0usize, usize::MAX);
    for r in 1..=last_round {
        let p = round_params(cfg.n, cfg.delta, r).expect("valid parameters");
        w_max = w_max.max(p.word_len);
        let region = WordLayout::new(&p, PayloadKind::MessageChunk).expect("fits").region_bits();
        cost_min = cost_min.min(region.div_ceil(3) + 1);
    }
    let c_prime = 4.0 * w_max as f64 / cost_min as f64;
    let mut pass = (1000.0..1000.0 + C7_MAX_FRAME).contains(&base.mean_l) && report.rows.iter().all(|r| r.summary.successes == r.summary.runs);
    let mut worst = 0.0f64;
    for row in report.rows.iter().filter(|r| r.value > 0) {
        assert!(row.value <= 10 * 1000);
        let delta_l = row.summary.mean_l_prime - base.mean_l_prime;
        pass &= delta_l <= c_prime * row.value as f64;
        worst = worst.max(delta_l / row.value as f64);
    }
    outcome(
        pass,
        format!(
            "L = {:.0}; max (L'(T) - L'(0))/T = {worst:.3} <= C' = 4·w_max/flips_per_word = {c_prime:.3} for T <= {}",
            base.mean_l,
            sweep.values.iter().max().unwrap()
        ),
    )
}

fn c8_alpha_scaling() -> Outcome {
    let cfg = experiment_preset("c08_alpha_scaling.toml");
    let sweep = cfg.sweep.clone().expect("sweep section");
    let report = run_sweep(&cfg, sweep.vary, &sweep.values).expect("sweep runs");
    let mut pass = report.rows.iter().all(|r| r.summary.successes == r.summary.runs);
    let mut overheads = Vec::new();
    for row in &report.rows {
        let s = &row.summary;
        pass &= s.mean_alpha >= (cfg.n as f64 * s.mean_l / cfg.delta).log2();
        overheads.push(s.mean_l_prime / s.mean_l);
    }
    let (lo, hi) = overheads.iter().fold((f64::MAX, 0.0f64), |(a, b), &o| (a.min(o), b.max(o)));
    let span = report.rows.last().unwrap().summary.mean_l / report.rows[0].summary.mean_l;
    pass &= hi / lo <= C8_MAX_SPREAD && span >= 100.0;
    outcome(pass, format!("L'/L in [{lo:.1}, {hi:.1}] over a {span:.0}x span of L; spread {:.3} <= {C8_MAX_SPREAD}", hi / lo))
}

fn c10_schedule_law() -> Outcome {
    let mut pass = true;
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for n in [2usize, 8] {
        for delta in [0.1, 0.01] {
            let mut schedule = RoundSchedule::new(n, delta).expect("valid grid");
            let mut tau = 1u64;
            pass &= schedule.start(1) == tau;
            for r in 2..=C10_MAX_ROUND {
                tau += 4 * round_params(n, delta, r - 1).expect("valid").word_len as u64;
                pass &= schedule.start(r) == tau;
                let ratio = tau as f64 / (r as f64 * (n as f64 * r as f64 / delta).log2());
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    let (c1, c2) = TAU_RATIO_BOUNDS;
    let preset = run_bench(&bench_preset("c10_schedule_law.toml"));
    pass &= lo >= c1 && hi <= c2 && preset.passed;
    outcome(pass, format!("recurrence exact to r = {C10_MAX_ROUND}; ratio in [{lo:.0}, {hi:.0}] within [{c1}, {c2}]"))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "codec round-trip", c1_codec_roundtrip()),
        (2, "AMD detection bound", c2_amd_detection()),
        (3, "ECC tolerance", c3_ecc_tolerance()),
        (4, "anti-silence", c4_anti_silence()),
    ];
    let (c5, c9) = c5_c9_end_to_end();
    results.push((5, "end-to-end correctness", c5));
    results.push((6, "cost scaling in L", c6_cost_in_l()));
    results.push((7, "cost scaling in T", c7_cost_in_t()));
    results.push((8, "alpha scaling", c8_alpha_scaling()));
    results.push((9, "delivery checks", c9));
    results.push((10, "schedule law", c10_schedule_law()));
    for (id, name, o) in &results {
        println!("criterion {id:>2} {:<24} {}  {}", name, verdict(o.pass), o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
