use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::automaton::{Action, MsgPattern};
use super::protocol::Protocol;
use super::transcript::Transcript;
use crate::bits::BitString;
use crate::netsim::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Recorded sequence on the edge is not a prefix of the sent sequence.
    Fifo { from: NodeId, to: NodeId, index: usize },
    /// More records than sends on the edge.
    Duplicate { from: NodeId, to: NodeId, extra: usize },
    /// A send was never recorded although the receiver was still running when it returned.
    Lost { from: NodeId, to: NodeId, index: usize },
    /// A send never returned.
    Unreturned { from: NodeId, to: NodeId, index: usize },
    /// Recorded outside the interval during which the send was active.
    OutsideInterval { from: NodeId, to: NodeId, index: usize },
    IllegalStep { node: NodeId, step: usize },
    /// The walk's actions on an edge disagree with what was sent or recorded there.
    WalkMismatch { node: NodeId, peer: NodeId },
    UnmatchedInput { count: u64 },
    NotTerminal { node: NodeId },
    Truncated,
}

/// The violated clauses; empty means the run is a valid execution.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations of the delivery clauses: loss, duplication, reordering or a record outside its send.
    pub fn delivery_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| {
                matches!(
                    v,
                    Violation::Fifo { .. } | Violation::Duplicate { .. } | Violation::Lost { .. } | Violation::OutsideInterval { .. }
                )
            })
            .count()
    }
}

fn check_edges(t: &Transcript, out: &mut Vec<Violation>) {
    let empty = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = t.sent.keys().chain(t.received.keys()).copied().collect();
    edges.sort_unstable();
    edges.dedup();
    for (from, to) in edges {
        let sent = t.sent.get(&(from, to)).unwrap_or(&empty);
        let recv = t.received.get(&(from, to)).map(Vec::as_slice).unwrap_or(&[]);
        if recv.len() > sent.len() {
            out.push(Violation::Duplicate { from, to, extra: recv.len() - sent.len() });
        }
        for (index, (s, r)) in sent.iter().zip(recv).enumerate() {
            if s.message != r.message {
                out.push(Violation::Fifo { from, to, index });
                break;
            }
            let inside = s.start_clock.is_some_and(|a| a <= r.clock) && s.return_clock.is_none_or(|b| r.clock <= b);
            if !inside {
                out.push(Violation::OutsideInterval { from, to, index });
            }
        }
        for (index, s) in sent.iter().enumerate().skip(recv.len()) {
            match (s.return_clock, t.terminated_at.get(to).copied().flatten()) {
                (None, _) => out.push(Violation::Unreturned { from, to, index }),
                (Some(ret), Some(done)) if done <= ret => {}
                _ => out.push(Violation::Lost { from, to, index }),
            }
        }
    }
}

fn check_walks(t: &Transcript, protocol: &Protocol, out: &mut Vec<Violation>) {
    for (u, walk) in t.walks.iter().enumerate() {
        let a = &protocol.automata[u];
        let mut cur = a.initial;
        let mut outs: BTreeMap<NodeId, Vec<&BitString>> = BTreeMap::new();
        let mut ins: BTreeMap<NodeId, Vec<&BitString>> = BTreeMap::new();
        for (i, step) in walk.iter().enumerate() {
            let legal = step.from == cur
                && !a.is_terminal(cur)
                && match &step.action {
                    Action::Output { to, message } => {
                        outs.entry(*to).or_default().push(message);
                        a.transitions.iter().any(|tr| tr.from == cur && tr.to == step.to && tr.action == step.action)
                    }
                    Action::Input { from, pattern: MsgPattern::Exact(m) } => {
                        ins.entry(*from).or_default().push(m);
                        a.input_target(cur, *from, m) == Some(step.to)
                    }
                    Action::Input { pattern: MsgPattern::Any, .. } => false,
                };
            if !legal {
                out.push(Violation::IllegalStep { node: u, step: i });
                break;
            }
            cur = step.to;
        }
        for v in 0..t.n() {
            let sent: Vec<&BitString> = t.sent.get(&(u, v)).into_iter().flatten().map(|s| &s.message).collect();
            let consumed: Vec<&BitString> = t
                .received
                .get(&(v, u))
                .into_iter()
                .flatten()
                .filter(|r| r.consumed)
                .map(|r| &r.message)
                .collect();
            let sends_differ = outs.remove(&v).unwrap_or_default() != sent;
            if sends_differ || (t.unmatched_inputs == 0 && ins.remove(&v).unwrap_or_default() != consumed) {
                out.push(Violation::WalkMismatch { node: u, peer: v });
            }
        }
    }
}

/// Checks a transcript against the protocol it claims to execute.
pub fn validate(t: &Transcript, protocol: &Protocol) -> Verdict {
    let mut violations = Vec::new();
    if t.n() != protocol.n() {
        violations.push(Violation::Truncated);
        return Verdict { violations };
    }
    check_edges(t, &mut violations);
    check_walks(t, protocol, &mut violations);
    if t.unmatched_inputs > 0 {
        violations.push(Violation::UnmatchedInput { count: t.unmatched_inputs });
    }
    for (node, done) in t.terminated_at.iter().enumerate() {
        if done.is_none() {
            violations.push(Violation::NotTerminal { node });
        }
    }
    if t.truncated {
        violations.push(Violation::Truncated);
    }
    Verdict { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::generators::ping_pong;
    use crate::compiler::{oracle_run, SchedulerPolicy};

    #[test]
    fn tampering_is_caught() {
        let p = ping_pong(3, 8, 1);
        let good = oracle_run(&p, SchedulerPolicy::Fifo, 1000);
        assert!(validate(&good, &p).pass());

        let mut dup = good.clone();
        let r = dup.received.get_mut(&(0, 1)).unwrap();
        let extra = r[0].clone();
        r.push(extra);
        assert!(validate(&dup, &p).violations.iter().any(|v| matches!(v, Violation::Duplicate { .. })));

        let mut lost = good.clone();
        lost.received.get_mut(&(1, 0)).unwrap().pop();
        assert!(!validate(&lost, &p).pass());

        let mut swapped = good.clone();
        swapped.received.get_mut(&(0, 1)).unwrap().swap(0, 1);
        assert!(!validate(&swapped, &p).pass());

        let mut early = good;
        early.terminated_at[1] = None;
        assert!(validate(&early, &p).violations.contains(&Violation::NotTerminal { node: 1 }));
    }
}
