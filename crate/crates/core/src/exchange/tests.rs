use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::coding::{encode_word, RoundParams};
use crate::netsim::Reception;

struct Pair {
    schedule: RoundSchedule,
    sender: Sender,
    receiver: Receiver,
    rng: ChaCha8Rng,
    round: u64,
    /// Whether a word was driven in each slot of the last round.
    driven: [bool; 4],
}

/// What the channel does to a slot's word; `None` means nothing was driven.
type Tamper<'a> = &'a mut dyn FnMut(u8, Option<BitString>, &RoundParams) -> Reception;

fn clean(_: u8, w: Option<BitString>, p: &RoundParams) -> Reception {
    match w {
        Some(b) => Reception::Bits(b),
        None => Reception::Constant { bit: false, len: p.word_len },
    }
}

impl Pair {
    fn new(language: Language, seed: u64) -> Self {
        Self {
            schedule: RoundSchedule::new(2, 0.1).unwrap(),
            sender: Sender::new(),
            receiver: Receiver::new(language),
            rng: ChaCha8Rng::seed_from_u64(seed),
            round: 0,
            driven: [false; 4],
        }
    }

    fn round(&mut self, tamper: Tamper) -> Option<SendOutcome> {
        self.round += 1;
        let params = self.schedule.params(self.round).clone();
        for slot in 0..SLOTS_PER_ROUND as u8 {
            let pos = self.schedule.slot(self.round, slot);
            let a = self.sender.drive(&pos, &params, &mut self.rng);
            let b = self.receiver.drive(&pos, &params, &mut self.rng);
            assert!(a.is_none() || b.is_none());
            let word = a.or(b);
            self.driven[slot as usize] = word.is_some();
            let heard = tamper(slot, word, &params);
            if slot % 2 == 0 {
                self.receiver.hear(&pos, &params, &heard);
            } else {
                self.sender.hear(&pos, &params, &heard);
            }
        }
        self.receiver.end_round();
        self.sender.end_round()
    }

    fn run_clean(&mut self, max_rounds: usize) -> (SendOutcome, usize) {
        for i in 1..=max_rounds {
            if let Some(o) = self.round(&mut clean) {
                return (o, i);
            }
        }
        panic!("no outcome in {max_rounds} rounds");
    }
}

fn bits(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

#[test]
fn noise_free_single_bit_is_four_words() {
    let mut p = Pair::new(Language::FixedLength(1), 1);
    p.sender.start(bits("1"));
    let out = p.round(&mut clean);
    assert_eq!(out, Some(SendOutcome::Delivered));
    assert_eq!(p.driven, [true, true, true, false]);
    assert_eq!(p.receiver.take_records(), vec![bits("1")]);
    let kinds: Vec<_> = p
        .sender
        .events()
        .iter()
        .chain(p.receiver.events())
        .filter_map(|e| match e {
            WireEvent::Drove { slot, payload: Some(pl), .. } => Some((*slot, pl.kind())),
            _ => None,
        })
        .collect();
    assert!(kinds.contains(&(0, crate::coding::PayloadKind::KeyRequest)));
    assert!(kinds.contains(&(1, crate::coding::PayloadKind::KeyReply)));
    assert!(kinds.contains(&(2, crate::coding::PayloadKind::MessageChunk)));
}

#[test]
fn silent_reply_returns_without_sending() {
    let mut p = Pair::new(Language::FixedLength(1), 2);
    p.sender.start(bits("0"));
    let parity = p.sender.parity();
    let out = p.round(&mut |slot, w, params| {
        if slot == 1 {
            Reception::Constant { bit: true, len: params.word_len }
        } else {
            clean(slot, w, params)
        }
    });
    assert_eq!(out, Some(SendOutcome::ReceiverSilent));
    assert!(!p.driven[2]);
    assert_ne!(p.sender.parity(), parity);
    assert!(p.receiver.take_records().is_empty());
}

#[test]
fn corrupted_chunk_is_retried_with_same_parity() {
    let mut p = Pair::new(Language::FixedLength(1), 3);
    p.sender.start(bits("1"));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let out = p.round(&mut |slot, w, params| {
        if slot == 2 {
            Reception::Bits(noise_word(params.word_len, &mut rng))
        } else {
            clean(slot, w, params)
        }
    });
    assert_eq!(out, None);
    assert!(p.driven[3], "receiver answers a bad chunk with noise");
    let chunks: Vec<bool> = p
        .sender
        .events()
        .iter()
        .filter_map(|e| match e {
            WireEvent::Drove { payload: Some(Payload::MessageChunk { parity, .. }), .. } => Some(*parity),
            _ => None,
        })
        .collect();
    let (o, _) = p.run_clean(3);
    assert_eq!(o, SendOutcome::Delivered);
    let again: Vec<bool> = p
        .sender
        .events()
        .iter()
        .filter_map(|e| match e {
            WireEvent::Drove { payload: Some(Payload::MessageChunk { parity, .. }), .. } => Some(*parity),
            _ => None,
        })
        .collect();
    assert_eq!(again, vec![chunks[0], chunks[0]]);
    assert_eq!(p.receiver.take_records(), vec![bits("1")]);
}

#[test]
fn jammed_feedback_is_deduplicated() {
    let mut p = Pair::new(Language::FixedLength(1), 4);
    p.sender.start(bits("1"));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let out = p.round(&mut |slot, w, params| {
        if slot == 3 {
            Reception::Bits(noise_word(params.word_len, &mut rng))
        } else {
            clean(slot, w, params)
        }
    });
    assert_eq!(out, None);
    assert_eq!(p.receiver.take_records(), vec![bits("1")]);
    let (o, _) = p.run_clean(3);
    assert_eq!(o, SendOutcome::Delivered);
    assert!(p.receiver.take_records().is_empty(), "the resend is a repetition");
}

#[test]
fn replace_path_keeps_partial_message() {
    // two chunks of κ bits each
    let mut p = Pair::new(Language::FixedLength(28), 5);
    let kappa = p.schedule.params(1).key_len;
    assert_eq!(kappa, 14);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = BitString::random(28, &mut rng);
    p.sender.start(m.clone());
    let out = p.round(&mut |slot, w, params| {
        if slot == 3 {
            Reception::Bits(noise_word(params.word_len, &mut rng))
        } else {
            clean(slot, w, params)
        }
    });
    assert_eq!(out, None);
    assert_eq!(p.receiver.partial(), &m.slice(0, 14));
    assert!(p.round(&mut clean).is_none());
    // the resent first chunk is κ_2 bits long and replaces the κ_1 bits accepted before
    let kappa2 = p.schedule.params(2).key_len;
    assert!(kappa2 > kappa);
    assert_eq!(p.receiver.partial(), &m.slice(0, kappa2), "replaced in place");
    let (o, _) = p.run_clean(2);
    assert_eq!(o, SendOutcome::Delivered);
    assert_eq!(p.receiver.take_records(), vec![m]);
}

#[test]
fn forged_request_gets_reply_and_then_noise() {
    let mut p = Pair::new(Language::FixedLength(1), 6);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut forged_key = None;
    let out = p.round(&mut |slot, w, params| match slot {
        0 => {
            let key = BitString::random(params.key_len, &mut rng);
            forged_key = Some(key.clone());
            Reception::Bits(encode_word(&Payload::KeyRequest { key }, params, &mut rng).unwrap())
        }
        2 => Reception::Bits(noise_word(params.word_len, &mut rng)),
        _ => clean(slot, w, params),
    });
    assert!(forged_key.is_some());
    assert_eq!(out, None);
    assert_eq!(p.driven, [false, true, false, true]);
    assert!(p.receiver.take_records().is_empty());
    assert!(p.receiver.partial().is_empty());
}

#[test]
fn multi_chunk_messages_arrive_in_order() {
    let mut p = Pair::new(Language::LengthPrefixed { header_bits: 6 }, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut sent = Vec::new();
    for len in [1usize, 14, 40, 63] {
        let m = Language::frame(6, &BitString::random(len, &mut rng));
        p.sender.start(m.clone());
        let mut expected = 0;
        let mut covered = 0;
        while covered < m.len() {
            expected += 1;
            covered += p.schedule.params(p.round + expected as u64).key_len;
        }
        let (o, rounds) = p.run_clean(10);
        assert_eq!(o, SendOutcome::Delivered);
        assert_eq!(rounds, expected);
        sent.push(m);
    }
    assert_eq!(p.receiver.take_records(), sent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random slot-2 and slot-3 jamming never duplicates or reorders messages.
    #[test]
    fn parity_survives_feedback_jamming(seed in any::<u64>(), pattern in proptest::collection::vec(0u8..4, 1..40)) {
        let mut p = Pair::new(Language::FixedLength(3), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let msgs: Vec<BitString> = (0..4).map(|_| BitString::random(3, &mut rng)).collect();
        let mut next = 0;
        let mut jam = pattern.into_iter();
        while next < msgs.len() {
            if !p.sender.is_active() {
                p.sender.start(msgs[next].clone());
            }
            let target = jam.next().unwrap_or(0);
            let out = p.round(&mut |slot, w, params| {
                if target >= 2 && slot == target {
                    Reception::Bits(noise_word(params.word_len, &mut rng))
                } else {
                    clean(slot, w, params)
                }
            });
            if out.is_some() {
                prop_assert_eq!(out, Some(SendOutcome::Delivered));
                next += 1;
            }
        }
        prop_assert_eq!(p.receiver.take_records(), msgs);
    }
}
