use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{noise_word, Completeness, Language, SlotPosition, WireEvent};
use crate::bits::BitString;
use crate::coding::{decode_word, encode_word, Payload, PayloadKind, RoundParams};
use crate::netsim::Reception;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiverPhase {
    Listening,
    /// Reply with `(k_B, k_A)` in slot 1.
    Reply { key_a: BitString },
    NoiseThenIdle,
    AwaitChunk,
    NoiseOnFeedback,
    Idle,
}

/// Receiving side of one channel.
#[derive(Debug, Clone)]
pub struct Receiver {
    language: Language,
    parity: bool,
    partial: BitString,
    last_len: usize,
    key_b: BitString,
    phase: ReceiverPhase,
    records: Vec<BitString>,
    events: Vec<WireEvent>,
    invalid_prefixes: u64,
}

impl Receiver {
    pub fn new(language: Language) -> Self {
        Self {
            language,
            parity: false,
            partial: BitString::new(),
            last_len: 0,
            key_b: BitString::new(),
            phase: ReceiverPhase::Listening,
            records: Vec::new(),
            events: Vec::new(),
            invalid_prefixes: 0,
        }
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    /// `μ`, the partially received message.
    pub fn partial(&self) -> &BitString {
        &self.partial
    }

    pub fn phase(&self) -> &ReceiverPhase {
        &self.phase
    }

    /// Chunks that left `μ` outside the language; nonzero only after a failure event.
    pub fn invalid_prefixes(&self) -> u64 {
        self.invalid_prefixes
    }

    pub fn events(&self) -> &[WireEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<WireEvent> {
        std::mem::take(&mut self.events)
    }

    /// Messages recorded since the last call.
    pub fn take_records(&mut self) -> Vec<BitString> {
        std::mem::take(&mut self.records)
    }

    pub fn hear(&mut self, pos: &SlotPosition, params: &RoundParams, heard: &Reception) {
        match (pos.slot, &self.phase) {
            (0, _) => {
                if heard.is_silence() {
                    self.phase = ReceiverPhase::Idle;
                    return;
                }
                self.phase = match decode_word(&heard.to_bits(), params, PayloadKind::KeyRequest) {
                    Some(Payload::KeyRequest { key }) => {
                        self.events.push(WireEvent::Accepted {
                            round: pos.round,
                            slot: pos.slot,
                            payload: Payload::KeyRequest { key: key.clone() },
                        });
                        ReceiverPhase::Reply { key_a: key }
                    }
                    _ => ReceiverPhase::NoiseThenIdle,
                };
            }
            (2, ReceiverPhase::AwaitChunk) => {
                match decode_word(&heard.to_bits(), params, PayloadKind::MessageChunk) {
                    Some(Payload::MessageChunk { chunk, parity, key }) if key == self.key_b => {
                        self.events.push(WireEvent::Accepted {
                            round: pos.round,
                            slot: pos.slot,
                            payload: Payload::MessageChunk {
                                chunk: chunk.clone(),
                                parity,
                                key,
                            },
                        });
                        self.accept(chunk, parity);
                        self.phase = ReceiverPhase::Idle;
                    }
                    _ => self.phase = ReceiverPhase::NoiseOnFeedback,
                }
            }
            _ => {}
        }
    }

    fn accept(&mut self, chunk: BitString, parity: bool) {
        let len = chunk.len();
        if self.partial.is_empty() {
            if parity == self.parity {
                return; // repeat of a chunk already consumed
            }
            self.partial = chunk;
        } else if parity != self.parity {
            self.partial.extend_from(&chunk);
        } else {
            let keep = self.partial.len() - self.last_len;
            self.partial.truncate(keep);
            self.partial.extend_from(&chunk);
        }
        self.last_len = len;
        self.parity = parity;
        match self.language.is_complete(&self.partial) {
            Completeness::Complete => {
                self.records.push(std::mem::take(&mut self.partial));
                self.last_len = 0;
            }
            Completeness::ProperPrefix => {}
            Completeness::Invalid => {
                self.invalid_prefixes += 1;
                self.partial = BitString::new();
                self.last_len = 0;
            }
        }
    }

    pub fn drive<R: Rng + ?Sized>(&mut self, pos: &SlotPosition, params: &RoundParams, rng: &mut R) -> Option<BitString> {
        let (word, payload) = match (pos.slot, &self.phase) {
            (1, ReceiverPhase::Reply { key_a }) => {
                self.key_b = BitString::random(params.key_len, rng);
                let payload = Payload::KeyReply {
                    fresh: self.key_b.clone(),
                    key: key_a.clone(),
                };
                let word = encode_word(&payload, params, rng).expect("payload sized for the round");
                self.phase = ReceiverPhase::AwaitChunk;
                (word, Some(payload))
            }
            (1, ReceiverPhase::NoiseThenIdle) => {
                self.phase = ReceiverPhase::Idle;
                (noise_word(params.word_len, rng), None)
            }
            (3, ReceiverPhase::NoiseOnFeedback) => {
                self.phase = ReceiverPhase::Idle;
                (noise_word(params.word_len, rng), None)
            }
            _ => return None,
        };
        self.events.push(WireEvent::Drove {
            round: pos.round,
            slot: pos.slot,
            payload,
        });
        Some(word)
    }

    /// Called after slot 3.
    pub fn end_round(&mut self) {
        self.phase = ReceiverPhase::Listening;
    }
}
