use serde::{Deserialize, Serialize};

use super::network::SlotWindow;
use super::{AdversaryAction, LaneId, NetsimError, Network, NodeId, Reception, RejectedAction, Topology};
use crate::bits::BitString;
use crate::coding::RoundParams;
use crate::compiler::Protocol;
use crate::exchange::{RoundSchedule, SlotPosition};

/// What a node learns about the slot it is about to drive or has just heard.
#[derive(Debug, Clone, Copy)]
pub struct SlotContext<'a> {
    pub pos: SlotPosition,
    pub params: &'a RoundParams,
}

/// A node runtime stepped at slot granularity.
pub trait NodeProcess {
    /// Words to drive on owned lanes for the whole slot.
    fn drive(&mut self, ctx: &SlotContext) -> Vec<(LaneId, BitString)>;
    /// What arrived on each incoming lane during the slot.
    fn listen(&mut self, ctx: &SlotContext, heard: &[(LaneId, &Reception)]);
    /// Terminated with every queued send returned.
    fn finished(&self) -> bool;
}

/// Everything the adversary may condition on. Channel contents and node
/// randomness are deliberately absent.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryView<'a> {
    pub clock: u64,
    pub round: u64,
    pub slot: u8,
    pub slot_start: u64,
    pub word_len: u64,
    pub n: usize,
    pub delta: f64,
    pub topology: &'a Topology,
    pub protocol: Option<&'a Protocol>,
}

pub trait Adversary {
    /// Actions for the slot described by `view`, timed inside that slot.
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction>;
}

impl<A: Adversary + ?Sized> Adversary for Box<A> {
    fn plan(&mut self, view: &AdversaryView) -> Vec<AdversaryAction> {
        (**self).plan(view)
    }
}

/// A driven word that its listener read as silence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionEvent {
    pub round: u64,
    pub slot: u8,
    pub lane: LaneId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneSlotRecord {
    pub round: u64,
    pub slot: u8,
    pub lane: LaneId,
    pub driven: bool,
    pub heard: Reception,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// Steps executed.
    pub steps: u64,
    /// Rounds started.
    pub rounds: u64,
    pub truncated: bool,
    pub budget: u64,
    pub spent: u64,
    pub applied: Vec<AdversaryAction>,
    pub rejected: Vec<RejectedAction>,
    /// Bits driven by each node.
    pub driven_bits: Vec<u64>,
    pub conversions: Vec<ConversionEvent>,
    pub history: Option<Vec<LaneSlotRecord>>,
}

struct OpenSlot {
    pos: SlotPosition,
    params: RoundParams,
    window: SlotWindow,
    driven: Vec<bool>,
    actions: Vec<AdversaryAction>,
    next_action: usize,
}

pub struct Simulation<'a, N> {
    topology: Topology,
    schedule: RoundSchedule,
    network: Network,
    nodes: Vec<Option<N>>,
    incoming: Vec<Vec<LaneId>>,
    adversary: Box<dyn Adversary + 'a>,
    protocol: Option<&'a Protocol>,
    clock: u64,
    open: Option<OpenSlot>,
    last_heard: Vec<bool>,
    driven_bits: Vec<u64>,
    conversions: Vec<ConversionEvent>,
    history: Option<Vec<LaneSlotRecord>>,
    rounds: u64,
}

impl<'a, N: NodeProcess> Simulation<'a, N> {
    pub fn new(
        topology: Topology,
        delta: f64,
        budget: u64,
        adversary: Box<dyn Adversary + 'a>,
        protocol: Option<&'a Protocol>,
        keep_history: bool,
    ) -> Result<Self, NetsimError> {
        let n = topology.n();
        let schedule = RoundSchedule::new(n, delta)?;
        let incoming = (0..n).map(|u| topology.incoming(u).collect()).collect();
        let lanes = topology.lanes().len();
        Ok(Self {
            network: Network::new(lanes, budget),
            nodes: (0..n).map(|_| None).collect(),
            incoming,
            adversary,
            protocol,
            clock: 1,
            open: None,
            last_heard: vec![false; lanes],
            driven_bits: vec![0; n],
            conversions: Vec::new(),
            history: keep_history.then(Vec::new),
            rounds: 0,
            schedule,
            topology,
        })
    }

    pub fn attach(&mut self, id: NodeId, node: N) -> Result<(), NetsimError> {
        let slot = self.nodes.get_mut(id).ok_or(NetsimError::MissingNode(id))?;
        if slot.is_some() {
            return Err(NetsimError::DuplicateAttachment(id));
        }
        *slot = Some(node);
        Ok(())
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn node(&self, id: NodeId) -> Option<&N> {
        self.nodes.get(id).and_then(Option::as_ref)
    }

    /// Bit read on `lane` during the most recent step.
    pub fn last_heard(&self, lane: LaneId) -> bool {
        self.last_heard[lane]
    }

    fn check_attached(&self) -> Result<(), NetsimError> {
        match self.nodes.iter().position(Option::is_none) {
            Some(id) => Err(NetsimError::MissingNode(id)),
            None => Ok(()),
        }
    }

    pub fn all_finished(&self) -> bool {
        self.nodes.iter().flatten().all(NodeProcess::finished)
    }

    fn begin_slot(&mut self) -> Result<(), NetsimError> {
        self.check_attached()?;
        let pos = self.schedule.locate(self.clock);
        debug_assert_eq!(pos.start, self.clock, "slots open at their first step");
        let params = self.schedule.params(pos.round).clone();
        self.rounds = self.rounds.max(pos.round);
        let ctx = SlotContext { pos, params: &params };
        let len = pos.word_len as usize;
        let mut drives: Vec<Option<BitString>> = vec![None; self.topology.lanes().len()];
        for (id, node) in self.nodes.iter_mut().enumerate() {
            let node = node.as_mut().expect("checked above");
            for (lane, word) in node.drive(&ctx) {
                if lane >= drives.len() || self.topology.lane(lane).src != id {
                    return Err(NetsimError::ForeignLane { node: id, lane });
                }
                if word.len() != len {
                    return Err(NetsimError::WordLength { lane, expected: len, actual: word.len() });
                }
                self.driven_bits[id] += len as u64;
                drives[lane] = Some(word);
            }
        }
        let driven = drives.iter().map(Option::is_some).collect();
        let view = AdversaryView {
            clock: self.clock,
            round: pos.round,
            slot: pos.slot,
            slot_start: pos.start,
            word_len: pos.word_len,
            n: self.topology.n(),
            delta: self.schedule.delta(),
            topology: &self.topology,
            protocol: self.protocol,
        };
        let mut actions = self.adversary.plan(&view);
        actions.sort_by_key(|a| a.time);
        let window = self.network.open(pos.start, len, drives);
        self.open = Some(OpenSlot {
            pos,
            params,
            window,
            driven,
            actions,
            next_action: 0,
        });
        Ok(())
    }

    fn finish_slot(&mut self) {
        let mut open = self.open.take().expect("a slot is open");
        for &a in &open.actions[open.next_action..] {
            self.network.apply(&mut open.window, a);
        }
        let heard = self.network.close(open.window);
        let pos = open.pos;
        for (lane, rec) in heard.iter().enumerate() {
            self.last_heard[lane] = match rec {
                Reception::Constant { bit, .. } => *bit,
                Reception::Bits(b) => b.get(b.len() - 1),
            };
            if open.driven[lane] && rec.is_silence() {
                self.conversions.push(ConversionEvent { round: pos.round, slot: pos.slot, lane });
            }
        }
        if let Some(history) = self.history.as_mut() {
            history.extend(heard.iter().enumerate().map(|(lane, rec)| LaneSlotRecord {
                round: pos.round,
                slot: pos.slot,
                lane,
                driven: open.driven[lane],
                heard: rec.clone(),
            }));
        }
        let ctx = SlotContext { pos, params: &open.params };
        for (id, node) in self.nodes.iter_mut().enumerate() {
            let view: Vec<(LaneId, &Reception)> = self.incoming[id].iter().map(|&l| (l, &heard[l])).collect();
            node.as_mut().expect("attached").listen(&ctx, &view);
        }
    }

    /// Advances the clock by one step.
    pub fn step(&mut self) -> Result<(), NetsimError> {
        if self.open.is_none() {
            self.begin_slot()?;
        }
        let open = self.open.as_mut().expect("just opened");
        while open.next_action < open.actions.len() && open.actions[open.next_action].time <= self.clock {
            self.network.apply(&mut open.window, open.actions[open.next_action]);
            open.next_action += 1;
        }
        let offset = (self.clock - open.pos.start) as usize;
        for (lane, bit) in self.last_heard.iter_mut().enumerate() {
            *bit = Network::peek(&open.window, lane, offset);
        }
        self.clock += 1;
        if self.clock == open.pos.end() {
            self.finish_slot();
        }
        Ok(())
    }

    /// Advances the clock over one whole slot; same result as stepping through it.
    pub fn advance_slot(&mut self) -> Result<(), NetsimError> {
        if self.open.is_some() {
            return Err(NetsimError::MidSlot);
        }
        self.begin_slot()?;
        self.clock = self.open.as_ref().expect("just opened").pos.end();
        self.finish_slot();
        Ok(())
    }

    /// Runs until every node has finished or the next slot would pass `max_steps`.
    pub fn run(&mut self, max_steps: u64) -> Result<bool, NetsimError> {
        self.check_attached()?;
        while self.open.is_some() {
            self.step()?;
        }
        while !self.all_finished() {
            let pos = self.schedule.locate(self.clock);
            if pos.end() - 1 > max_steps {
                return Ok(false);
            }
            self.advance_slot()?;
        }
        Ok(true)
    }

    pub fn into_parts(self) -> (RunTrace, Vec<N>) {
        let budget = self.network.budget();
        let trace = RunTrace {
            steps: self.clock - 1,
            rounds: self.rounds,
            truncated: !self.nodes.iter().flatten().all(NodeProcess::finished),
            budget: budget.total(),
            spent: budget.spent(),
            applied: self.network.applied().to_vec(),
            rejected: self.network.rejected().to_vec(),
            driven_bits: self.driven_bits,
            conversions: self.conversions,
            history: self.history,
        };
        (trace, self.nodes.into_iter().flatten().collect())
    }
}
