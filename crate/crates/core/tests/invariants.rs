use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silentwire_core::adversaries::{AdversaryKind, AdversarySpec};
use silentwire_core::bits::BitString;
use silentwire_core::coding::{amd_decode, amd_encode, decode_word, encode_word, is_silence, round_params, AmdStrength, EcCode, Payload, PayloadKind};
use silentwire_core::compiler::generators::ping_pong;
use silentwire_core::compiler::{execute, validate, RunOptions};
use silentwire_core::exchange::RoundSchedule;
use silentwire_core::netsim::Topology;

fn delta_strategy() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 0.1, 0.01, 0.001])
}

fn kind_strategy() -> impl Strategy<Value = AdversaryKind> {
    prop::sample::select(AdversaryKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn codec_round_trips(n in 2usize..12, delta in delta_strategy(), r in 1u64..300, kind in 0usize..4, seed: u64) {
        let params = round_params(n, delta, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = params.key_len;
        let key = BitString::random(k, &mut rng);
        let p = match PayloadKind::ALL[kind] {
            PayloadKind::Raw => Payload::Raw { content: BitString::random(k, &mut rng), key },
            PayloadKind::KeyRequest => Payload::KeyRequest { key },
            PayloadKind::KeyReply => Payload::KeyReply { fresh: BitString::random(k, &mut rng), key },
            PayloadKind::MessageChunk => Payload::MessageChunk { chunk: BitString::random(rng.gen_range(0..=k), &mut rng), parity: rng.gen(), key },
        };
        let w = encode_word(&p, &params, &mut rng).unwrap();
        prop_assert_eq!(w.len(), params.word_len);
        prop_assert_eq!(decode_word(&w, &params, p.kind()), Some(p));
    }

    #[test]
    fn amd_round_trips(len in 1usize..400, log_eta in 1i32..12, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strength = AmdStrength::new(2f64.powi(-log_eta)).unwrap();
        let m = BitString::random(len, &mut rng);
        let c = amd_encode(&m, strength, &mut rng).unwrap();
        prop_assert_eq!(amd_decode(&c, strength), Some(m));
    }

    /// Fewer than 64 flips in every inner block never reach the outer decoder as errors.
    #[test]
    fn ecc_corrects_light_blocks(k in 1usize..300, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = EcCode::new(k).unwrap();
        let m = BitString::random(k, &mut rng);
        let mut w = code.encode(&m);
        for block in 0..code.block_count() {
            let positions: Vec<usize> = code.block_positions(block).collect();
            let flips = rng.gen_range(0..64);
            for i in sample(&mut rng, positions.len(), flips) {
                w.flip(positions[i]);
            }
        }
        prop_assert_eq!(code.decode(&w).unwrap(), m);
    }

    #[test]
    fn silence_is_an_alternation_count(len in 1usize..300, seed: u64) {
        let s = BitString::random(len, &mut ChaCha8Rng::seed_from_u64(seed));
        let alternations = (1..len).filter(|&i| s.get(i) != s.get(i - 1)).count();
        prop_assert_eq!(is_silence(&s), 3 * alternations < len);
    }

    #[test]
    fn schedule_follows_its_recurrence(n in 2usize..20, delta in delta_strategy(), r in 2u64..400) {
        let mut s = RoundSchedule::new(n, delta).unwrap();
        let w = round_params(n, delta, r - 1).unwrap().word_len as u64;
        prop_assert_eq!(s.start(r), s.start(r - 1) + 4 * w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn runs_are_deterministic_and_within_budget(kind in kind_strategy(), budget in 0u64..30_000, seed in 0u64..1000) {
        let pi = ping_pong(2, 2, seed);
        let topology = Topology::complete(2);
        let go = || {
            let mut spec = AdversarySpec::new(kind, budget, seed);
            spec.horizon = Some(400_000);
            let opts = RunOptions { delta: 0.1, seed, budget, max_steps: 100_000_000, keep_history: false };
            execute(&pi, &topology, spec.build(), opts).unwrap()
        };
        let a = go();
        prop_assert!(a.trace.spent <= budget);
        prop_assert!(!a.transcript.truncated);
        prop_assert!(validate(&a.transcript, &pi).pass());
        prop_assert_eq!(a, go());
    }
}
