use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::automaton::{Action, StateId};
use crate::bits::BitString;
use crate::netsim::NodeId;

/// The `index`-th message recorded on the directed edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MsgRef {
    pub from: NodeId,
    pub to: NodeId,
    pub index: usize,
}

/// One transition taken by a node. Inputs carry the exact message consumed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStep {
    pub clock: u64,
    pub from: StateId,
    pub action: Action,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentMessage {
    pub message: BitString,
    pub enqueue_clock: u64,
    pub start_clock: Option<u64>,
    pub return_clock: Option<u64>,
    /// The last input consumed before this send was enqueued.
    pub cause: Option<MsgRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedMessage {
    pub message: BitString,
    pub clock: u64,
    /// False when it arrived after the receiver terminated.
    pub consumed: bool,
}

/// Everything observable about one execution of a protocol. Clocks are steps
/// for compiled runs and event counters for oracle runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub walks: Vec<Vec<WalkStep>>,
    pub sent: BTreeMap<(NodeId, NodeId), Vec<SentMessage>>,
    pub received: BTreeMap<(NodeId, NodeId), Vec<ReceivedMessage>>,
    /// Output value of each node that reached a terminal state.
    pub outputs: Vec<Option<String>>,
    pub terminated_at: Vec<Option<u64>>,
    /// Recorded messages with no matching input transition.
    pub unmatched_inputs: u64,
    pub truncated: bool,
}

impl Transcript {
    pub fn new(n: usize) -> Self {
        Self {
            walks: vec![Vec::new(); n],
            outputs: vec![None; n],
            terminated_at: vec![None; n],
            ..Self::default()
        }
    }

    pub fn n(&self) -> usize {
        self.walks.len()
    }

    pub fn delivered_messages(&self) -> usize {
        self.received.values().map(Vec::len).sum()
    }

    pub fn delivered_bits(&self) -> usize {
        self.received.values().flatten().map(|r| r.message.len()).sum()
    }

    pub fn all_terminated(&self) -> bool {
        self.terminated_at.iter().all(Option::is_some)
    }

    /// Latency of every maximal causal chain, keyed by its last message.
    ///
    /// A chain starts at a send with no cause and follows causes forward; its
    /// latency runs from the first enqueue to the last recording.
    pub fn path_latencies(&self) -> BTreeMap<MsgRef, u64> {
        let mut origin: BTreeMap<MsgRef, u64> = BTreeMap::new();
        let mut has_child: BTreeMap<MsgRef, bool> = BTreeMap::new();
        // causes always precede their effects in clock order
        let mut order: Vec<(u64, MsgRef, &SentMessage)> = self
            .sent
            .iter()
            .flat_map(|(&(from, to), v)| v.iter().enumerate().map(move |(index, s)| (s.enqueue_clock, MsgRef { from, to, index }, s)))
            .collect();
        order.sort_by_key(|(c, r, _)| (*c, *r));
        for (_, r, s) in &order {
            let start = s.cause.and_then(|c| origin.get(&c).copied()).unwrap_or(s.enqueue_clock);
            if let Some(c) = s.cause {
                has_child.insert(c, true);
            }
            origin.insert(*r, start);
        }
        let mut out = BTreeMap::new();
        for (r, start) in origin {
            if has_child.get(&r).copied().unwrap_or(false) {
                continue;
            }
            if let Some(rec) = self.received.get(&(r.from, r.to)).and_then(|v| v.get(r.index)) {
                out.insert(r, rec.clock.saturating_sub(start));
            }
        }
        out
    }
}
