use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::automaton::{Action, MsgPattern};
use super::protocol::Protocol;
use super::transcript::{MsgRef, ReceivedMessage, SentMessage, Transcript, WalkStep};
use crate::bits::BitString;
use crate::netsim::NodeId;

/// Which enabled event an oracle run takes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulerPolicy {
    /// Outputs first, then the oldest message in flight.
    Fifo,
    /// Uniform over enabled events.
    Random { seed: u64 },
    /// Deliveries before outputs, lowest edge first.
    NeighborOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Output(NodeId),
    Deliver(NodeId, NodeId),
}

struct InFlight {
    message: BitString,
    global_seq: u64,
    index: usize,
}

/// Runs `protocol` over ideal FIFO channels. Clocks in the transcript count events.
pub fn oracle_run(protocol: &Protocol, policy: SchedulerPolicy, max_events: u64) -> Transcript {
    let n = protocol.n();
    let mut t = Transcript::new(n);
    let mut state: Vec<_> = protocol.automata.iter().map(|a| a.initial).collect();
    let mut last_input: Vec<Option<MsgRef>> = vec![None; n];
    let mut queues: BTreeMap<(NodeId, NodeId), VecDeque<InFlight>> = BTreeMap::new();
    let mut rng = match policy {
        SchedulerPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut global_seq = 0u64;
    let mut clock = 0u64;
    for u in 0..n {
        if protocol.automata[u].is_terminal(state[u]) {
            t.terminated_at[u] = Some(0);
        }
    }
    loop {
        let terminal = |u: NodeId, s: &[usize]| protocol.automata[u].is_terminal(s[u]);
        let mut enabled = Vec::new();
        for u in 0..n {
            if !terminal(u, &state) && protocol.automata[u].first_output(state[u]).is_some() {
                enabled.push(Event::Output(u));
            }
        }
        let mut deliveries: Vec<(u64, Event)> = queues
            .iter()
            .filter_map(|(&(u, v), q)| q.front().map(|f| (f.global_seq, Event::Deliver(u, v))))
            .collect();
        let event = match policy {
            SchedulerPolicy::Fifo => enabled.first().copied().or_else(|| {
                deliveries.sort_by_key(|(s, _)| *s);
                deliveries.first().map(|(_, e)| *e)
            }),
            SchedulerPolicy::NeighborOrder => deliveries.first().map(|(_, e)| *e).or(enabled.first().copied()),
            SchedulerPolicy::Random { .. } => {
                enabled.extend(deliveries.iter().map(|(_, e)| *e));
                if enabled.is_empty() {
                    None
                } else {
                    let i = rng.as_mut().expect("seeded above").gen_range(0..enabled.len());
                    Some(enabled[i])
                }
            }
        };
        let Some(event) = event else { break };
        if clock >= max_events {
            t.truncated = true;
            break;
        }
        clock += 1;
        match event {
            Event::Output(u) => {
                let tr = protocol.automata[u].first_output(state[u]).expect("enabled");
                let Action::Output { to, message } = &tr.action else { unreachable!() };
                let log = t.sent.entry((u, *to)).or_default();
                queues.entry((u, *to)).or_default().push_back(InFlight {
                    message: message.clone(),
                    global_seq,
                    index: log.len(),
                });
                global_seq += 1;
                log.push(SentMessage {
                    message: message.clone(),
                    enqueue_clock: clock,
                    start_clock: Some(clock),
                    return_clock: None,
                    cause: last_input[u],
                });
                t.walks[u].push(WalkStep { clock, from: state[u], action: tr.action.clone(), to: tr.to });
                state[u] = tr.to;
            }
            Event::Deliver(u, v) => {
                let m = queues.get_mut(&(u, v)).and_then(VecDeque::pop_front).expect("enabled");
                t.sent.get_mut(&(u, v)).expect("sent before delivered")[m.index].return_clock = Some(clock);
                let consumed = !terminal(v, &state);
                let log = t.received.entry((u, v)).or_default();
                let index = log.len();
                log.push(ReceivedMessage { message: m.message.clone(), clock, consumed });
                if consumed {
                    last_input[v] = Some(MsgRef { from: u, to: v, index });
                    match protocol.automata[v].input_target(state[v], u, &m.message) {
                        Some(to) => {
                            t.walks[v].push(WalkStep {
                                clock,
                                from: state[v],
                                action: Action::Input { from: u, pattern: MsgPattern::Exact(m.message) },
                                to,
                            });
                            state[v] = to;
                        }
                        None => t.unmatched_inputs += 1,
                    }
                }
            }
        }
        for u in 0..n {
            if t.terminated_at[u].is_none() && protocol.automata[u].is_terminal(state[u]) {
                t.terminated_at[u] = Some(clock);
            }
        }
    }
    for u in 0..n {
        if t.terminated_at[u].is_some() {
            t.outputs[u] = protocol.automata[u].terminal.get(&state[u]).cloned().flatten();
        }
    }
    t
}
