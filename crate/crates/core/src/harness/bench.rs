//! Codec-level measurements, runnable as presets.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{check_schedule, TAU_RATIO_BOUNDS};
use crate::bits::BitString;
use crate::coding::{
    amd_decode, amd_encode, decode_word, encode_word, is_silence, round_params, AmdStrength, EcCode, Payload, PayloadKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchSpec {
    CodecRoundtrip { payloads: usize, max_round: u64, n: Vec<usize>, delta: Vec<f64>, seed: u64 },
    AmdDetection { eta: Vec<f64>, trials: usize, message_bits: usize, seed: u64 },
    EccTolerance { message_bits: Vec<usize>, trials: usize, seed: u64 },
    AntiSilence { len: usize, samples: usize, seed: u64 },
    ScheduleLaw { n: Vec<usize>, delta: Vec<f64>, max_round: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub name: String,
    pub bench: BenchSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub name: String,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
}

/// `p + 3·sqrt(p(1-p)/k)`.
pub fn three_sigma(p: f64, k: usize) -> f64 {
    p + 3.0 * (p * (1.0 - p) / k as f64).sqrt()
}

fn random_payload<R: Rng + ?Sized>(kind: PayloadKind, key_len: usize, rng: &mut R) -> Payload {
    let key = BitString::random(key_len, rng);
    match kind {
        PayloadKind::Raw => Payload::Raw { content: BitString::random(key_len, rng), key },
        PayloadKind::KeyRequest => Payload::KeyRequest { key },
        PayloadKind::KeyReply => Payload::KeyReply { fresh: BitString::random(key_len, rng), key },
        PayloadKind::MessageChunk => Payload::MessageChunk {
            chunk: BitString::random(rng.gen_range(0..=key_len), rng),
            parity: rng.gen(),
            key,
        },
    }
}

pub fn run_bench(cfg: &BenchConfig) -> BenchReport {
    let mut values = BTreeMap::new();
    let passed = match &cfg.bench {
        BenchSpec::CodecRoundtrip { payloads, max_round, n, delta, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut failures = 0usize;
            for _ in 0..*payloads {
                let nn = n[rng.gen_range(0..n.len())];
                let d = delta[rng.gen_range(0..delta.len())];
                let params = round_params(nn, d, rng.gen_range(1..=*max_round)).expect("valid grid");
                let kind = PayloadKind::ALL[rng.gen_range(0..4)];
                let p = random_payload(kind, params.key_len, &mut rng);
                let w = encode_word(&p, &params, &mut rng).expect("fits");
                if decode_word(&w, &params, kind).as_ref() != Some(&p) {
                    failures += 1;
                }
            }
            values.insert("failures".into(), failures as f64);
            failures == 0
        }
        BenchSpec::AmdDetection { eta, trials, message_bits, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut ok = true;
            for &e in eta {
                let strength = AmdStrength::new(e).expect("eta in (0, 1)");
                let mut undetected = 0usize;
                for _ in 0..*trials {
                    let m = BitString::random(*message_bits, &mut rng);
                    let c = amd_encode(&m, strength, &mut rng).expect("nonempty");
                    let mut offset = BitString::random(c.len(), &mut rng);
                    while offset.is_zero() {
                        offset = BitString::random(c.len(), &mut rng);
                    }
                    if amd_decode(&c.xor(&offset), strength).is_some() {
                        undetected += 1;
                    }
                }
                let rate = undetected as f64 / *trials as f64;
                values.insert(format!("rate_eta_{e}"), rate);
                ok &= rate <= three_sigma(e, *trials);
            }
            ok
        }
        BenchSpec::EccTolerance { message_bits, trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut random_fail = 0usize;
            let mut adversarial_fail = 0usize;
            for &k in message_bits {
                let code = EcCode::new(k).expect("positive size");
                for _ in 0..*trials {
                    let m = BitString::random(k, &mut rng);
                    let c = code.encode(&m);
                    let mut noisy = c.clone();
                    for i in rand::seq::index::sample(&mut rng, c.len(), c.len() / 3) {
                        noisy.flip(i);
                    }
                    if code.decode(&noisy).as_ref() != Ok(&m) {
                        random_fail += 1;
                    }
                    let steered = c.xor(&code.misdirecting_offset(&mut rng));
                    if code.decode(&steered).as_ref() != Ok(&m) {
                        adversarial_fail += 1;
                    }
                }
            }
            values.insert("random_third_failures".into(), random_fail as f64);
            values.insert("adversarial_failures".into(), adversarial_fail as f64);
            random_fail == 0 && adversarial_fail == 0
        }
        BenchSpec::AntiSilence { len, samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let hits = (0..*samples).filter(|_| is_silence(&BitString::random(*len, &mut rng))).count();
            let rate = hits as f64 / *samples as f64;
            let bound = (-(*len as f64) / 19.0).exp();
            values.insert("rate".into(), rate);
            values.insert("bound".into(), bound);
            rate <= three_sigma(bound, *samples)
        }
        BenchSpec::ScheduleLaw { n, delta, max_round } => {
            let mut ok = true;
            for &nn in n {
                for &d in delta {
                    let c = check_schedule(nn, d, *max_round).expect("valid grid");
                    values.insert(format!("min_ratio_n{nn}_d{d}"), c.min_ratio);
                    values.insert(format!("max_ratio_n{nn}_d{d}"), c.max_ratio);
                    ok &= c.within_bounds();
                }
            }
            values.insert("bound_low".into(), TAU_RATIO_BOUNDS.0);
            values.insert("bound_high".into(), TAU_RATIO_BOUNDS.1);
            ok
        }
    };
    BenchReport { name: cfg.name.clone(), passed, values }
}

/// The benches `codec-bench` runs, with small sample counts.
pub fn default_benches() -> Vec<BenchConfig> {
    let b = |name: &str, bench| BenchConfig { name: name.into(), bench };
    vec![
        b("codec_roundtrip", BenchSpec::CodecRoundtrip { payloads: 200, max_round: 64, n: vec![2, 8], delta: vec![0.1, 0.01], seed: 1 }),
        b("amd_detection", BenchSpec::AmdDetection { eta: vec![0.25, 0.0625], trials: 20_000, message_bits: 64, seed: 2 }),
        b("ecc_tolerance", BenchSpec::EccTolerance { message_bits: vec![1, 64, 400], trials: 20, seed: 3 }),
        b("anti_silence", BenchSpec::AntiSilence { len: 95, samples: 20_000, seed: 4 }),
        b("schedule_law", BenchSpec::ScheduleLaw { n: vec![2, 8], delta: vec![0.1, 0.01], max_round: 2_000 }),
    ]
}
