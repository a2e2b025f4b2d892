use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::automaton::{Action, Automaton, MsgPattern, StateId};
use super::protocol::Protocol;
use super::transcript::{MsgRef, ReceivedMessage, SentMessage, Transcript, WalkStep};
use super::CompileError;
use crate::bits::BitString;
use crate::exchange::{Language, Receiver, SendOutcome, Sender, WireEvent, SLOTS_PER_ROUND};
use crate::netsim::{Adversary, LaneId, NodeId, NodeProcess, Reception, RunTrace, Simulation, SlotContext, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Hears replies on a channel this node initiates.
    Sender,
    /// Hears requests and chunks on a channel the peer initiates.
    Receiver,
}

struct Queued {
    seq: usize,
    message: BitString,
}

struct Link {
    peer: NodeId,
    /// Lane this node drives as initiator.
    send_lane: LaneId,
    /// Lane this node drives as responder.
    reply_lane: LaneId,
    sender: Sender,
    receiver: Receiver,
    queue: VecDeque<Queued>,
    active: Option<usize>,
}

/// Wire events on one channel, for failure diagnosis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelWire {
    pub initiator: NodeId,
    pub responder: NodeId,
    pub initiator_events: Vec<WireEvent>,
    pub responder_events: Vec<WireEvent>,
}

/// One node of the compiled protocol.
pub struct NodeRuntime<'a> {
    id: NodeId,
    automaton: &'a Automaton,
    state: StateId,
    terminal: bool,
    links: Vec<Link>,
    lane_role: BTreeMap<LaneId, (usize, Role)>,
    rng: ChaCha8Rng,
    last_input: Option<MsgRef>,
    walk: Vec<WalkStep>,
    sent: BTreeMap<NodeId, Vec<SentMessage>>,
    received: BTreeMap<NodeId, Vec<ReceivedMessage>>,
    terminated_at: Option<u64>,
    unmatched_inputs: u64,
}

impl<'a> NodeRuntime<'a> {
    pub fn new(id: NodeId, protocol: &'a Protocol, topology: &Topology, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id as u64);
        let mut links = Vec::new();
        let mut lane_role = BTreeMap::new();
        for peer in topology.neighbors(id) {
            let (send_lane, ack_lane) = topology.channel(id, peer).expect("neighbors share a channel");
            let (req_lane, reply_lane) = topology.channel(peer, id).expect("neighbors share a channel");
            let language = protocol.language(peer, id).cloned().unwrap_or(Language::FixedLength(1));
            lane_role.insert(ack_lane, (links.len(), Role::Sender));
            lane_role.insert(req_lane, (links.len(), Role::Receiver));
            links.push(Link {
                peer,
                send_lane,
                reply_lane,
                sender: Sender::new(),
                receiver: Receiver::new(language),
                queue: VecDeque::new(),
                active: None,
            });
        }
        let automaton = &protocol.automata[id];
        let mut node = Self {
            id,
            automaton,
            state: automaton.initial,
            terminal: false,
            links,
            lane_role,
            rng,
            last_input: None,
            walk: Vec::new(),
            sent: BTreeMap::new(),
            received: BTreeMap::new(),
            terminated_at: None,
            unmatched_inputs: 0,
        };
        node.settle(1);
        node
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn output(&self) -> Option<&str> {
        self.terminal
            .then(|| self.automaton.terminal.get(&self.state).and_then(|v| v.as_deref()))
            .flatten()
    }

    /// Follows output transitions, then checks for termination and starts idle sends.
    fn settle(&mut self, clock: u64) {
        while !self.terminal {
            let Some(t) = self.automaton.first_output(self.state) else { break };
            let Action::Output { to, message } = &t.action else { unreachable!() };
            let link = self.links.iter_mut().find(|l| l.peer == *to).expect("protocol edges exist in the topology");
            let log = self.sent.entry(*to).or_default();
            link.queue.push_back(Queued { seq: log.len(), message: message.clone() });
            log.push(SentMessage {
                message: message.clone(),
                enqueue_clock: clock,
                start_clock: None,
                return_clock: None,
                cause: self.last_input,
            });
            self.walk.push(WalkStep { clock, from: self.state, action: t.action.clone(), to: t.to });
            self.state = t.to;
            self.check_terminal(clock);
        }
        self.check_terminal(clock);
        for link in &mut self.links {
            if link.active.is_none() {
                if let Some(q) = link.queue.pop_front() {
                    link.sender.start(q.message);
                    link.active = Some(q.seq);
                    self.sent.get_mut(&link.peer).expect("logged at enqueue")[q.seq].start_clock = Some(clock);
                }
            }
        }
    }

    fn check_terminal(&mut self, clock: u64) {
        if !self.terminal && self.automaton.is_terminal(self.state) {
            self.terminal = true;
            self.terminated_at = Some(clock);
        }
    }

    fn end_round(&mut self, clock: u64) {
        for link in &mut self.links {
            if let Some(outcome) = link.sender.end_round() {
                let seq = link.active.take().expect("an outcome needs an active send");
                let entry = &mut self.sent.get_mut(&link.peer).expect("logged at enqueue")[seq];
                entry.return_clock = Some(clock);
                debug_assert!(matches!(outcome, SendOutcome::Delivered | SendOutcome::ReceiverSilent));
            }
        }
        let mut inputs = Vec::new();
        for link in &mut self.links {
            link.receiver.end_round();
            for m in link.receiver.take_records() {
                inputs.push((link.peer, m));
            }
        }
        for (from, message) in inputs {
            let log = self.received.entry(from).or_default();
            let index = log.len();
            let consumed = !self.terminal;
            log.push(ReceivedMessage { message: message.clone(), clock, consumed });
            if !consumed {
                continue;
            }
            self.last_input = Some(MsgRef { from, to: self.id, index });
            match self.automaton.input_target(self.state, from, &message) {
                Some(to) => {
                    self.walk.push(WalkStep {
                        clock,
                        from: self.state,
                        action: Action::Input { from, pattern: MsgPattern::Exact(message) },
                        to,
                    });
                    self.state = to;
                    self.check_terminal(clock);
                }
                None => self.unmatched_inputs += 1,
            }
        }
        self.settle(clock);
    }

    fn channel_wire(&mut self) -> Vec<ChannelWire> {
        self.links
            .iter_mut()
            .map(|l| ChannelWire {
                initiator: self.id,
                responder: l.peer,
                initiator_events: l.sender.take_events(),
                responder_events: Vec::new(),
            })
            .collect()
    }

    fn responder_events(&mut self) -> Vec<(NodeId, Vec<WireEvent>)> {
        self.links.iter_mut().map(|l| (l.peer, l.receiver.take_events())).collect()
    }
}

impl NodeProcess for NodeRuntime<'_> {
    fn drive(&mut self, ctx: &SlotContext) -> Vec<(LaneId, BitString)> {
        let mut out = Vec::new();
        let listening = !self.terminal;
        for link in &mut self.links {
            if let Some(w) = link.sender.drive(&ctx.pos, ctx.params, &mut self.rng) {
                out.push((link.send_lane, w));
            }
            if listening {
                if let Some(w) = link.receiver.drive(&ctx.pos, ctx.params, &mut self.rng) {
                    out.push((link.reply_lane, w));
                }
            }
        }
        out
    }

    fn listen(&mut self, ctx: &SlotContext, heard: &[(LaneId, &Reception)]) {
        for &(lane, rec) in heard {
            let Some(&(i, role)) = self.lane_role.get(&lane) else { continue };
            let link = &mut self.links[i];
            match role {
                Role::Sender => link.sender.hear(&ctx.pos, ctx.params, rec),
                Role::Receiver if !self.terminal => link.receiver.hear(&ctx.pos, ctx.params, rec),
                Role::Receiver => {}
            }
        }
        if u64::from(ctx.pos.slot) == SLOTS_PER_ROUND - 1 {
            self.end_round(ctx.pos.end());
        }
    }

    fn finished(&self) -> bool {
        self.terminal && self.links.iter().all(|l| l.active.is_none() && l.queue.is_empty())
    }
}

/// Builds one runtime per node.
pub fn compile<'a>(protocol: &'a Protocol, topology: &Topology, seed: u64) -> Result<Vec<NodeRuntime<'a>>, CompileError> {
    protocol.validate()?;
    protocol.check_topology(topology)?;
    Ok((0..protocol.n()).map(|u| NodeRuntime::new(u, protocol, topology, seed)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub delta: f64,
    pub seed: u64,
    pub budget: u64,
    pub max_steps: u64,
    pub keep_history: bool,
}

/// A finished compiled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub transcript: Transcript,
    pub trace: RunTrace,
    pub wire: Vec<ChannelWire>,
}

/// Compiles `protocol` and runs it against `adversary` until every node is
/// done or `max_steps` is reached.
pub fn execute<'a>(
    protocol: &'a Protocol,
    topology: &Topology,
    adversary: Box<dyn Adversary + 'a>,
    opts: RunOptions,
) -> Result<Execution, CompileError> {
    let nodes = compile(protocol, topology, opts.seed)?;
    let mut sim = Simulation::new(topology.clone(), opts.delta, opts.budget, adversary, Some(protocol), opts.keep_history)?;
    for (u, node) in nodes.into_iter().enumerate() {
        sim.attach(u, node)?;
    }
    sim.run(opts.max_steps)?;
    let (trace, mut nodes) = sim.into_parts();
    let n = protocol.n();
    let mut transcript = Transcript::new(n);
    transcript.truncated = trace.truncated;
    let mut wire: BTreeMap<(NodeId, NodeId), ChannelWire> = BTreeMap::new();
    for node in &mut nodes {
        for w in node.channel_wire() {
            wire.insert((w.initiator, w.responder), w);
        }
    }
    for node in &mut nodes {
        for (peer, events) in node.responder_events() {
            wire.get_mut(&(peer, node.id)).expect("channels come in pairs").responder_events = events;
        }
        let u = node.id;
        transcript.walks[u] = std::mem::take(&mut node.walk);
        transcript.outputs[u] = node.output().map(str::to_string);
        transcript.terminated_at[u] = node.terminated_at;
        transcript.unmatched_inputs += node.unmatched_inputs;
        for (v, s) in std::mem::take(&mut node.sent) {
            transcript.sent.insert((u, v), s);
        }
        for (v, r) in std::mem::take(&mut node.received) {
            transcript.received.insert((v, u), r);
        }
    }
    Ok(Execution {
        n,
        delta: opts.delta,
        seed: opts.seed,
        transcript,
        trace,
        wire: wire.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::generators::{gather, ping_pong, token_ring};
    use crate::compiler::{oracle_run, validate, SchedulerPolicy};
    use crate::netsim::{AdversaryAction, AdversaryView};

    struct Quiet;

    impl Adversary for Quiet {
        fn plan(&mut self, _: &AdversaryView) -> Vec<AdversaryAction> {
            Vec::new()
        }
    }

    fn opts(seed: u64) -> RunOptions {
        RunOptions { delta: 0.1, seed, budget: 0, max_steps: 50_000_000, keep_history: false }
    }

    #[test]
    fn ping_pong_runs_clean() {
        let p = ping_pong(1, 1, 0);
        let exec = execute(&p, &Topology::path(2), Box::new(Quiet), opts(1)).unwrap();
        let v = validate(&exec.transcript, &p);
        assert!(v.pass(), "{v:?}");
        assert_eq!(exec.transcript.delivered_messages(), 2);
        assert_eq!(exec.transcript.outputs, oracle_run(&p, SchedulerPolicy::Fifo, 100).outputs);
    }

    #[test]
    fn outputs_match_the_oracle() {
        for (p, topo) in [
            (ping_pong(6, 1, 2), Topology::path(2)),
            (token_ring(4, 2, 5, 3), Topology::ring(4)),
            (gather(4, 6, 4), Topology::star(4)),
        ] {
            let exec = execute(&p, &topo, Box::new(Quiet), opts(7)).unwrap();
            let v = validate(&exec.transcript, &p);
            assert!(v.pass(), "{v:?}");
            assert_eq!(exec.transcript.outputs, oracle_run(&p, SchedulerPolicy::Fifo, 10_000).outputs);
        }
    }

    #[test]
    fn send_to_terminated_node_returns_on_silence() {
        // node 1 terminates immediately; node 0's message is cut off
        let text = "node 0 {\n states: a, b\n initial: a\n terminal: b = sent\n a --out(1,1)--> b\n}\n\
                    node 1 {\n states: z\n initial: z\n terminal: z = gone\n}\nlanguage 0 -> 1: fixed 1\n";
        let p = Protocol::parse(text).unwrap();
        let exec = execute(&p, &Topology::path(2), Box::new(Quiet), opts(3)).unwrap();
        assert!(validate(&exec.transcript, &p).pass());
        assert_eq!(exec.transcript.delivered_messages(), 0);
        assert_eq!(exec.trace.rounds, 1);
        assert_eq!(exec.transcript.sent[&(0, 1)][0].return_clock, Some(exec.trace.steps + 1));
    }

    #[test]
    fn simultaneous_records_apply_in_neighbor_order() {
        // both leaves deliver in round 1; the hub sees node 1 first
        let p = gather(3, 2, 1);
        let exec = execute(&p, &Topology::star(3), Box::new(Quiet), opts(4)).unwrap();
        let walk = &exec.transcript.walks[0];
        let froms: Vec<NodeId> = walk
            .iter()
            .filter_map(|s| match s.action {
                Action::Input { from, .. } => Some(from),
                _ => None,
            })
            .collect();
        assert_eq!(froms, vec![1, 2]);
        assert_eq!(walk[0].clock, walk[1].clock);
        assert!(validate(&exec.transcript, &p).pass());
        // the other order is also a legal asynchronous run
        let mut alt = exec.transcript.clone();
        let first = alt.walks[0][0].action.clone();
        alt.walks[0][0].action = alt.walks[0][1].action.clone();
        alt.walks[0][1].action = first;
        assert!(validate(&alt, &p).pass());
    }

    #[test]
    fn runs_are_deterministic() {
        let p = token_ring(3, 1, 4, 9);
        let a = execute(&p, &Topology::ring(3), Box::new(Quiet), opts(5)).unwrap();
        let b = execute(&p, &Topology::ring(3), Box::new(Quiet), opts(5)).unwrap();
        assert_eq!(a, b);
    }
}
