use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::runtime::Execution;
use crate::coding::Payload;
use crate::exchange::WireEvent;
use crate::netsim::{LaneId, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureKind {
    /// A word decoded to something other than what was driven.
    AmdFailure,
    /// A driven word was read as silence.
    ConversionToSilence,
    /// A keyed word was accepted on a slot its counterpart left silent.
    KeyInstallation,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::AmdFailure => "amd_failure",
            FailureKind::ConversionToSilence => "conversion_to_silence",
            FailureKind::KeyInstallation => "key_installation",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEvent {
    pub kind: FailureKind,
    pub round: u64,
    pub slot: u8,
    pub lane: Option<LaneId>,
    /// `(initiator, responder)` of the channel.
    pub channel: Option<(NodeId, NodeId)>,
}

type Slots<'a> = BTreeMap<(u64, u8), Option<&'a Payload>>;

fn split(events: &[WireEvent]) -> (Slots<'_>, Vec<(u64, u8, &Payload)>) {
    let mut drove = BTreeMap::new();
    let mut accepted = Vec::new();
    for e in events {
        match e {
            WireEvent::Drove { round, slot, payload } => {
                drove.insert((*round, *slot), payload.as_ref());
            }
            WireEvent::Accepted { round, slot, payload } => accepted.push((*round, *slot, payload)),
        }
    }
    (drove, accepted)
}

/// Labels failure events by comparing what each side drove with what the
/// other side accepted and by the simulator's conversion log. Uses knowledge
/// no node has and is meant for analysis only.
pub fn diagnose(exec: &Execution) -> Vec<FailureEvent> {
    let mut out: Vec<FailureEvent> = exec
        .trace
        .conversions
        .iter()
        .map(|c| FailureEvent {
            kind: FailureKind::ConversionToSilence,
            round: c.round,
            slot: c.slot,
            lane: Some(c.lane),
            channel: None,
        })
        .collect();
    for w in &exec.wire {
        let (i_drove, i_acc) = split(&w.initiator_events);
        let (r_drove, r_acc) = split(&w.responder_events);
        let pairs = [(&r_acc, &i_drove), (&i_acc, &r_drove)];
        for (accepted, counterpart) in pairs {
            for &(round, slot, payload) in accepted {
                let kind = match counterpart.get(&(round, slot)) {
                    Some(Some(p)) if *p == payload => continue,
                    Some(_) => FailureKind::AmdFailure,
                    // a forged request with nobody listening on the other side is harmless
                    None if slot == 0 => continue,
                    None => FailureKind::KeyInstallation,
                };
                out.push(FailureEvent {
                    kind,
                    round,
                    slot,
                    lane: None,
                    channel: Some((w.initiator, w.responder)),
                });
            }
        }
    }
    out.sort_by_key(|e| (e.round, e.slot, e.kind));
    out
}
