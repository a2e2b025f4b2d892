//! Per-channel round protocol.
//!
//! Each channel has a sender (the endpoint that starts its rounds) and a
//! receiver. A round is four words:
//!
//! | slot | driven by | content                                   |
//! |------|-----------|-------------------------------------------|
//! | 0    | sender    | key request carrying a fresh key `k_A`    |
//! | 1    | receiver  | key reply `(k_B, k_A)`, or noise          |
//! | 2    | sender    | next chunk of the message with parity `b` |
//! | 3    | receiver  | silence on acceptance, noise otherwise    |
//!
//! Single-bit messages are the special case of a language of one-bit words.

mod language;
mod receiver;
mod schedule;
mod sender;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::coding::Payload;

pub use language::{Completeness, Language, LanguageError};
pub use receiver::{Receiver, ReceiverPhase};
pub use schedule::{RoundSchedule, SlotPosition, SLOTS_PER_ROUND};
pub use sender::{SendOutcome, Sender, SenderPhase};

/// Uniformly random bits.
pub fn noise_word<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitString {
    BitString::random(len, rng)
}

/// A word a machine put on the wire or acted upon. Kept for failure
/// diagnosis only; the machines never read it back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireEvent {
    /// `payload` is `None` for noise.
    Drove { round: u64, slot: u8, payload: Option<Payload> },
    Accepted { round: u64, slot: u8, payload: Payload },
}

#[cfg(test)]
mod tests;
