//! The global round clock.
//!
//! Steps are numbered from 1. Round `r` starts at `τ(r)` with `τ(1) = 1` and
//! `τ(r + 1) = τ(r) + 4·w_r`; slot `i` of round `r` covers
//! `[τ(r) + i·w_r, τ(r) + (i + 1)·w_r)`.

use crate::coding::{round_params, CodingError, RoundParams};

pub const SLOTS_PER_ROUND: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotPosition {
    pub round: u64,
    pub slot: u8,
    /// First step of the slot.
    pub start: u64,
    pub word_len: u64,
}

impl SlotPosition {
    pub fn end(&self) -> u64 {
        self.start + self.word_len
    }
}

#[derive(Debug, Clone)]
pub struct RoundSchedule {
    n: usize,
    delta: f64,
    params: Vec<RoundParams>,
    starts: Vec<u64>,
}

impl RoundSchedule {
    pub fn new(n: usize, delta: f64) -> Result<Self, CodingError> {
        let first = round_params(n, delta, 1)?;
        Ok(Self {
            n,
            delta,
            params: vec![first],
            starts: vec![1],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn extend_to(&mut self, round: u64) {
        while (self.params.len() as u64) < round {
            let last = self.params.last().expect("round 1 exists");
            let next_start = self.starts.last().expect("round 1 exists") + 4 * last.word_len as u64;
            let r = self.params.len() as u64 + 1;
            let p = round_params(self.n, self.delta, r).expect("validated at construction");
            self.params.push(p);
            self.starts.push(next_start);
        }
    }

    pub fn params(&mut self, round: u64) -> &RoundParams {
        assert!(round >= 1, "rounds start at 1");
        self.extend_to(round);
        &self.params[round as usize - 1]
    }

    /// `τ(r)`.
    pub fn start(&mut self, round: u64) -> u64 {
        assert!(round >= 1, "rounds start at 1");
        self.extend_to(round);
        self.starts[round as usize - 1]
    }

    pub fn slot(&mut self, round: u64, slot: u8) -> SlotPosition {
        let start = self.start(round);
        let w = self.params(round).word_len as u64;
        SlotPosition {
            round,
            slot,
            start: start + slot as u64 * w,
            word_len: w,
        }
    }

    /// The slot containing `clock`.
    pub fn locate(&mut self, clock: u64) -> SlotPosition {
        assert!(clock >= 1, "steps start at 1");
        let mut r = self.params.len() as u64;
        while self.start(r) + 4 * self.params(r).word_len as u64 <= clock {
            r += 1;
        }
        let idx = self.starts[..r as usize].partition_point(|&s| s <= clock);
        let round = idx as u64;
        let w = self.params[idx - 1].word_len as u64;
        let slot = ((clock - self.starts[idx - 1]) / w) as u8;
        self.slot(round, slot)
    }

    pub fn next(&mut self, pos: SlotPosition) -> SlotPosition {
        if pos.slot + 1 < SLOTS_PER_ROUND as u8 {
            self.slot(pos.round, pos.slot + 1)
        } else {
            self.slot(pos.round + 1, 0)
        }
    }
}
