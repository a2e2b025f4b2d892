//! Bit-level channel simulator with a global clock.
//!
//! Every lane carries one bit per step. A lane is *driven* when its source
//! node writes a word during the slot and *silent* otherwise; a listener on a
//! silent lane reads the lane's idle value, which is the last bit it read.
//! The adversary acts through [`AdversaryAction`]s planned once per slot from
//! an [`AdversaryView`] that carries only public information.

mod network;
mod sim;
mod topology;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::coding::is_silence;

pub use network::{AdversaryAction, ActionKind, FlipBudget, Network, RejectedAction};
pub use sim::{Adversary, AdversaryView, ConversionEvent, LaneSlotRecord, NodeProcess, RunTrace, SlotContext, Simulation};
pub use topology::{Lane, Topology};

pub type NodeId = usize;
pub type LaneId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetsimError {
    #[error("topology: {0}")]
    Topology(String),
    #[error("node {0} attached twice")]
    DuplicateAttachment(NodeId),
    #[error("node {0} was never attached")]
    MissingNode(NodeId),
    #[error("node {node} drove lane {lane} it does not own")]
    ForeignLane { node: NodeId, lane: LaneId },
    #[error("lane {lane} driven with {actual} bits in a {expected}-bit slot")]
    WordLength { lane: LaneId, expected: usize, actual: usize },
    #[error("simulation is in the middle of a slot")]
    MidSlot,
    #[error("schedule: {0}")]
    Schedule(#[from] crate::coding::CodingError),
}

/// What a listener read on one lane during one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reception {
    Constant { bit: bool, len: usize },
    Bits(BitString),
}

impl Reception {
    pub fn len(&self) -> usize {
        match self {
            Reception::Constant { len, .. } => *len,
            Reception::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_silence(&self) -> bool {
        match self {
            Reception::Constant { .. } => true,
            Reception::Bits(b) => is_silence(b),
        }
    }

    pub fn to_bits(&self) -> BitString {
        match self {
            Reception::Constant { bit, len } => BitString::constant(*bit, *len),
            Reception::Bits(b) => b.clone(),
        }
    }
}
