use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SlotPosition, WireEvent};
use crate::bits::BitString;
use crate::coding::{decode_word, encode_word, Payload, PayloadKind, RoundParams};
use crate::netsim::Reception;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SenderPhase {
    Idle,
    SentKeyRequest,
    HaveKey,
    SentChunk,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SendOutcome {
    /// Every chunk was acknowledged by silence.
    Delivered,
    /// The key request was answered by silence.
    ReceiverSilent,
}

#[derive(Debug, Clone)]
struct Job {
    message: BitString,
    cursor: usize,
    key_a: BitString,
    key_b: BitString,
    chunk_len: usize,
    outcome: Option<SendOutcome>,
}

/// Sending side of one channel.
#[derive(Debug, Clone)]
pub struct Sender {
    parity: bool,
    phase: SenderPhase,
    job: Option<Job>,
    events: Vec<WireEvent>,
}

impl Default for Sender {
    fn default() -> Self {
        Self::new()
    }
}

impl Sender {
    pub fn new() -> Self {
        // the receiver's parity starts at 0, so the first chunk must carry 1
        Self {
            parity: true,
            phase: SenderPhase::Idle,
            job: None,
            events: Vec::new(),
        }
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    pub fn phase(&self) -> SenderPhase {
        self.phase
    }

    pub fn is_active(&self) -> bool {
        self.job.is_some()
    }

    /// Bits of the active message already acknowledged.
    pub fn cursor(&self) -> Option<usize> {
        self.job.as_ref().map(|j| j.cursor)
    }

    pub fn events(&self) -> &[WireEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<WireEvent> {
        std::mem::take(&mut self.events)
    }

    /// Starts a send at the next round boundary.
    pub fn start(&mut self, message: BitString) {
        assert!(self.job.is_none(), "one send per channel at a time");
        assert!(!message.is_empty(), "messages are nonempty");
        self.job = Some(Job {
            message,
            cursor: 0,
            key_a: BitString::new(),
            key_b: BitString::new(),
            chunk_len: 0,
            outcome: None,
        });
        self.phase = SenderPhase::Idle;
    }

    pub fn drive<R: Rng + ?Sized>(&mut self, pos: &SlotPosition, params: &RoundParams, rng: &mut R) -> Option<BitString> {
        let job = self.job.as_mut()?;
        let payload = match (pos.slot, self.phase) {
            (0, SenderPhase::Idle) => {
                job.key_a = BitString::random(params.key_len, rng);
                self.phase = SenderPhase::SentKeyRequest;
                Payload::KeyRequest { key: job.key_a.clone() }
            }
            (2, SenderPhase::HaveKey) => {
                let end = (job.cursor + params.key_len).min(job.message.len());
                let chunk = job.message.slice(job.cursor, end);
                job.chunk_len = chunk.len();
                self.phase = SenderPhase::SentChunk;
                Payload::MessageChunk {
                    chunk,
                    parity: self.parity,
                    key: job.key_b.clone(),
                }
            }
            _ => return None,
        };
        let word = encode_word(&payload, params, rng).expect("payload sized for the round");
        self.events.push(WireEvent::Drove {
            round: pos.round,
            slot: pos.slot,
            payload: Some(payload),
        });
        Some(word)
    }

    pub fn hear(&mut self, pos: &SlotPosition, params: &RoundParams, heard: &Reception) {
        let Some(job) = self.job.as_mut() else { return };
        match (pos.slot, self.phase) {
            (1, SenderPhase::SentKeyRequest) => {
                if heard.is_silence() {
                    // the receiver has terminated
                    self.parity = !self.parity;
                    job.outcome = Some(SendOutcome::ReceiverSilent);
                    self.phase = SenderPhase::Done;
                    return;
                }
                match decode_word(&heard.to_bits(), params, PayloadKind::KeyReply) {
                    Some(Payload::KeyReply { fresh, key }) if key == job.key_a => {
                        self.events.push(WireEvent::Accepted {
                            round: pos.round,
                            slot: pos.slot,
                            payload: Payload::KeyReply { fresh: fresh.clone(), key },
                        });
                        job.key_b = fresh;
                        self.phase = SenderPhase::HaveKey;
                    }
                    _ => self.phase = SenderPhase::Idle,
                }
            }
            (3, SenderPhase::SentChunk) => {
                if heard.is_silence() {
                    job.cursor += job.chunk_len;
                    self.parity = !self.parity;
                    if job.cursor >= job.message.len() {
                        job.outcome = Some(SendOutcome::Delivered);
                        self.phase = SenderPhase::Done;
                        return;
                    }
                }
                self.phase = SenderPhase::Idle;
            }
            _ => {}
        }
    }

    /// Called after slot 3; returns the outcome if the send returned this round.
    pub fn end_round(&mut self) -> Option<SendOutcome> {
        let outcome = self.job.as_ref().and_then(|j| j.outcome);
        if outcome.is_some() {
            self.job = None;
        }
        self.phase = SenderPhase::Idle;
        outcome
    }
}
