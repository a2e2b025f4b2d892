use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::forge::{forge_actions, forge_cost, jam_silence_actions};
use super::{target_channels, AdversarySpec};
use crate::bits::BitString;
use crate::coding::{encode_word, round_params, Payload, PayloadKind, RoundParams, WordLayout};
use crate::netsim::{Adversary, AdversaryAction, AdversaryView, LaneId};

const DEFAULT_HORIZON: u64 = 1_000_000;

fn rng_for(spec: &AdversarySpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

fn params_for(view: &AdversaryView) -> RoundParams {
    round_params(view.n, view.delta, view.round).expect("the simulator validated n and delta")
}

/// Flips at the given word offsets, in time order.
fn flips_at(lane: LaneId, start: u64, offsets: impl IntoIterator<Item = usize>) -> Vec<AdversaryAction> {
    offsets.into_iter().map(|i| AdversaryAction::flip(start + i as u64, lane)).collect()
}

/// `⌈region/3⌉ + 1` offsets inside the ECC region of a `kind` word that
/// steer its decoding to a different codeword.
fn corruption_offsets<R: Rng + ?Sized>(params: &RoundParams, kind: PayloadKind, rng: &mut R) -> Vec<usize> {
    let layout = WordLayout::new(params, kind).expect("round parameters fit every kind");
    let region = layout.region_bits();
    let want = region.div_ceil(3) + 1;
    let pattern = layout.code.misdirecting_offset(rng);
    let mut chosen: BTreeSet<usize> = (0..region).filter(|&i| pattern.get(i)).collect();
    while chosen.len() < want {
        chosen.insert(rng.gen_range(0..region));
    }
    chosen.into_iter().collect()
}

pub struct NoAdversary;

impl Adversary for NoAdversary {
    fn plan(&mut self, _: &AdversaryView) -> Vec<AdversaryAction> {
        Vec::new()
    }
}

/// Oblivious flips at `budget` distinct uniformly random (step, lane) pairs
/// in `[1, horizon]`, drawn once before the run.
pub struct UniformRandom {
    spec: AdversarySpec,
    planned: Option<Vec<AdversaryAction>>,
    next: usize,
}

impl UniformRandom {
    pub fn new(spec: AdversarySpec) -> Self {
        Self { spec, planned: None, next: 0 }
    }

    fn draw(&self, lanes: usize) -> Vec<AdversaryAction> {
        let horizon = self.spec.horizon.unwrap_or(DEFAULT_HORIZON);
        let space = horizon as usize * lanes;
        let amount = (self.spec.budget as usize).min(space);
        let mut rng = rng_for(&self.spec);
        let mut out: Vec<AdversaryAction> = sample(&mut rng, space, amount)
            .into_iter()
            .map(|i| AdversaryAction::flip(1 + (i / lanes) as u64, i % lanes))
            .collect();
        out.sort_by_key(|a| (a.time, a.lane));
        out
    }
}

impl Adversary for UniformRandom {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        if self.planned.is_none() {
            self.planned = Some(self.draw(view.topology.lanes().len()));
        }
        let all = self.planned.as_ref().expect("drawn above");
        let end = view.slot_start + view.word_len;
        let mut out = Vec::new();
        while self.next < all.len() && all[self.next].time < end {
            if all[self.next].time >= view.slot_start {
                out.push(all[self.next]);
            }
            self.next += 1;
        }
        out
    }
}

/// Runs of consecutive flips on random target lanes at random offsets.
pub struct Burst {
    spec: AdversarySpec,
    rng: ChaCha8Rng,
    remaining: u64,
}

impl Burst {
    pub fn new(spec: AdversarySpec) -> Self {
        Self { rng: rng_for(&spec), remaining: spec.budget, spec }
    }
}

impl Adversary for Burst {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        if self.remaining == 0 || !self.spec.in_window(view.round) || !self.rng.gen_bool(self.spec.burst_rate) {
            return Vec::new();
        }
        let lanes: Vec<LaneId> = target_channels(&self.spec, view).into_iter().flat_map(|(a, b)| [a, b]).collect();
        if lanes.is_empty() {
            return Vec::new();
        }
        let lane = lanes[self.rng.gen_range(0..lanes.len())];
        let len = view.word_len as usize;
        let offset = self.rng.gen_range(0..len);
        let count = (self.spec.burst_len as u64).min(self.remaining).min((len - offset) as u64) as usize;
        self.remaining -= count as u64;
        flips_at(lane, view.slot_start, offset..offset + count)
    }
}

/// Kills rounds by corrupting the message-chunk word of every target
/// channel, spending `⌈region/3⌉ + 1` flips per word until the budget no longer
/// covers a whole word.
pub struct WordCorruptor {
    spec: AdversarySpec,
    rng: ChaCha8Rng,
    remaining: u64,
}

impl WordCorruptor {
    pub fn new(spec: AdversarySpec) -> Self {
        Self { rng: rng_for(&spec), remaining: spec.budget, spec }
    }

    /// Flips spent on one attacked word in `round`.
    pub fn cost_per_word(n: usize, delta: f64, round: u64) -> u64 {
        let params = round_params(n, delta, round).expect("valid parameters");
        let layout = WordLayout::new(&params, PayloadKind::MessageChunk).expect("fits");
        layout.region_bits().div_ceil(3) as u64 + 1
    }
}

impl Adversary for WordCorruptor {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        if view.slot != 2 || !self.spec.in_window(view.round) {
            return Vec::new();
        }
        let params = params_for(view);
        let mut out = Vec::new();
        for (lane, _) in target_channels(&self.spec, view) {
            let offsets = corruption_offsets(&params, PayloadKind::MessageChunk, &mut self.rng);
            if offsets.len() as u64 > self.remaining {
                break;
            }
            self.remaining -= offsets.len() as u64;
            out.extend(flips_at(lane, view.slot_start, offsets));
        }
        out
    }
}

/// XORs a fixed sparse pattern onto the acknowledgement slot of every target
/// channel, hoping to turn the receiver's noise into silence.
pub struct SilenceForger {
    spec: AdversarySpec,
    remaining: u64,
}

impl SilenceForger {
    pub fn new(spec: AdversarySpec) -> Self {
        Self { remaining: spec.budget, spec }
    }

    /// The pattern for words of `len` bits; depends only on the seed and `len`.
    pub fn pattern(seed: u64, len: usize, weight: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ len as u64);
        let mut v = sample(&mut rng, len, weight.min(len)).into_vec();
        v.sort_unstable();
        v
    }
}

impl Adversary for SilenceForger {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        if view.slot != 3 || !self.spec.in_window(view.round) {
            return Vec::new();
        }
        let pattern = Self::pattern(self.spec.seed, view.word_len as usize, self.spec.pattern_weight);
        let mut out = Vec::new();
        for (_, reply) in target_channels(&self.spec, view) {
            if pattern.len() as u64 > self.remaining {
                break;
            }
            self.remaining -= pattern.len() as u64;
            out.extend(flips_at(reply, view.slot_start, pattern.iter().copied()));
        }
        out
    }
}

/// Forges a key request on a target lane and, two slots later, a message
/// chunk keyed with a guessed session key.
pub struct KeyGuesser {
    spec: AdversarySpec,
    rng: ChaCha8Rng,
    remaining: u64,
    next_channel: usize,
    pending: Option<(LaneId, BitString)>,
}

impl KeyGuesser {
    pub fn new(spec: AdversarySpec) -> Self {
        Self {
            rng: rng_for(&spec),
            remaining: spec.budget,
            spec,
            next_channel: 0,
            pending: None,
        }
    }

    fn guessed_chunk(&mut self, params: &RoundParams) -> BitString {
        let payload = Payload::MessageChunk {
            chunk: BitString::random(self.rng.gen_range(1..=params.key_len), &mut self.rng),
            parity: self.rng.gen(),
            key: BitString::random(params.key_len, &mut self.rng),
        };
        encode_word(&payload, params, &mut self.rng).expect("sized for the round")
    }
}

impl Adversary for KeyGuesser {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        if !self.spec.in_window(view.round) {
            return Vec::new();
        }
        match view.slot {
            0 => {
                self.pending = None;
                let channels = target_channels(&self.spec, view);
                if channels.is_empty() {
                    return Vec::new();
                }
                let (lane, _) = channels[self.next_channel % channels.len()];
                let params = params_for(view);
                let request = Payload::KeyRequest { key: BitString::random(params.key_len, &mut self.rng) };
                let word = encode_word(&request, &params, &mut self.rng).expect("sized for the round");
                let chunk = self.guessed_chunk(&params);
                let cost = forge_cost(&word) + forge_cost(&chunk);
                if cost > self.remaining {
                    return Vec::new();
                }
                self.next_channel += 1;
                self.remaining -= forge_cost(&word);
                self.pending = Some((lane, chunk));
                forge_actions(lane, view.slot_start, &word)
            }
            2 => match self.pending.take() {
                Some((lane, chunk)) => {
                    self.remaining -= forge_cost(&chunk);
                    forge_actions(lane, view.slot_start, &chunk)
                }
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }
}

/// Attacks only the responder's words: the key reply in even rounds and the
/// acknowledgement slot in odd rounds. Leftover budget is spent on a partial attack.
pub struct FeedbackJammer {
    spec: AdversarySpec,
    rng: ChaCha8Rng,
    remaining: u64,
}

impl FeedbackJammer {
    pub fn new(spec: AdversarySpec) -> Self {
        Self { rng: rng_for(&spec), remaining: spec.budget, spec }
    }
}

impl Adversary for FeedbackJammer {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        let wanted = if view.round.is_multiple_of(2) { 1 } else { 3 };
        if view.slot != wanted || !self.spec.in_window(view.round) {
            return Vec::new();
        }
        let params = params_for(view);
        let mut out = Vec::new();
        for (_, reply) in target_channels(&self.spec, view) {
            let mut actions = if view.slot == 1 {
                flips_at(reply, view.slot_start, corruption_offsets(&params, PayloadKind::KeyReply, &mut self.rng))
            } else {
                jam_silence_actions(reply, view.slot_start, view.word_len as usize)
            };
            actions.truncate(self.remaining as usize);
            if actions.is_empty() {
                break;
            }
            self.remaining -= actions.len() as u64;
            out.extend(actions);
        }
        out
    }
}
