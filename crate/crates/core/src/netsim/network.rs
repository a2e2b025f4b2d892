use serde::{Deserialize, Serialize};

use super::{LaneId, Reception};
use crate::bits::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Flip,
    SetIdle(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdversaryAction {
    pub time: u64,
    pub lane: LaneId,
    pub kind: ActionKind,
}

impl AdversaryAction {
    pub fn flip(time: u64, lane: LaneId) -> Self {
        Self { time, lane, kind: ActionKind::Flip }
    }

    pub fn set_idle(time: u64, lane: LaneId, bit: bool) -> Self {
        Self { time, lane, kind: ActionKind::SetIdle(bit) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    OverBudget,
    OutsideSlot,
    UnknownLane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedAction {
    pub action: AdversaryAction,
    pub reason: RejectReason,
}

/// The adversary's allowance. Only the simulator reads or charges it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipBudget {
    total: u64,
    spent: u64,
}

impl FlipBudget {
    pub fn new(total: u64) -> Self {
        Self { total, spent: 0 }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    fn charge(&mut self) -> bool {
        if self.spent < self.total {
            self.spent += 1;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct LaneState {
    idle: bool,
    /// Whether the most recent step on this lane was driven.
    last_driven: bool,
}

enum Pending {
    Driven(BitString),
    Silent {
        run_start: bool,
        first_idle: bool,
        idle: bool,
        changes: Vec<(usize, bool)>,
    },
}

/// One slot in flight: what each lane carries and how the adversary changed it.
pub(super) struct SlotWindow {
    start: u64,
    len: usize,
    pending: Vec<Pending>,
}

/// Lane state and the flip budget.
#[derive(Debug, Clone)]
pub struct Network {
    lanes: Vec<LaneState>,
    budget: FlipBudget,
    applied: Vec<AdversaryAction>,
    rejected: Vec<RejectedAction>,
}

impl Network {
    pub fn new(lanes: usize, budget: u64) -> Self {
        Self {
            lanes: vec![LaneState { idle: false, last_driven: false }; lanes],
            budget: FlipBudget::new(budget),
            applied: Vec::new(),
            rejected: Vec::new(),
        }
    }

    pub fn budget(&self) -> FlipBudget {
        self.budget
    }

    pub fn applied(&self) -> &[AdversaryAction] {
        &self.applied
    }

    pub fn rejected(&self) -> &[RejectedAction] {
        &self.rejected
    }

    pub(super) fn open(&self, start: u64, len: usize, drives: Vec<Option<BitString>>) -> SlotWindow {
        let pending = drives
            .into_iter()
            .zip(&self.lanes)
            .map(|(d, st)| match d {
                Some(word) => Pending::Driven(word),
                None => Pending::Silent {
                    run_start: st.last_driven || start == 1,
                    first_idle: st.idle,
                    idle: st.idle,
                    changes: Vec::new(),
                },
            })
            .collect();
        SlotWindow { start, len, pending }
    }

    /// Applies one action inside an open window. Actions must arrive in
    /// nondecreasing time order.
    pub(super) fn apply(&mut self, window: &mut SlotWindow, action: AdversaryAction) {
        let reject = |net: &mut Self, reason| net.rejected.push(RejectedAction { action, reason });
        if action.lane >= window.pending.len() {
            return reject(self, RejectReason::UnknownLane);
        }
        if action.time < window.start || action.time >= window.start + window.len as u64 {
            return reject(self, RejectReason::OutsideSlot);
        }
        let offset = (action.time - window.start) as usize;
        let applied = match (&mut window.pending[action.lane], action.kind) {
            (Pending::Driven(word), ActionKind::Flip) => {
                if self.budget.charge() {
                    word.flip(offset);
                    true
                } else {
                    false
                }
            }
            (Pending::Driven(_), ActionKind::SetIdle(_)) => return,
            (Pending::Silent { idle, changes, .. }, ActionKind::Flip) => {
                if self.budget.charge() {
                    *idle = !*idle;
                    changes.push((offset, *idle));
                    true
                } else {
                    false
                }
            }
            (Pending::Silent { run_start, idle, changes, first_idle }, ActionKind::SetIdle(bit)) => {
                if *run_start && offset == 0 {
                    *idle = bit;
                    *first_idle = bit;
                    // earlier actions in the window can only sit at offset 0 too
                    changes.clear();
                    self.applied.push(action);
                    return;
                }
                if bit == *idle {
                    return;
                }
                if self.budget.charge() {
                    *idle = bit;
                    changes.push((offset, bit));
                    true
                } else {
                    false
                }
            }
        };
        if applied {
            self.applied.push(action);
        } else {
            reject(self, RejectReason::OverBudget);
        }
    }

    /// The bit heard at `offset` given the actions applied so far.
    pub(super) fn peek(window: &SlotWindow, lane: LaneId, offset: usize) -> bool {
        match &window.pending[lane] {
            Pending::Driven(word) => word.get(offset),
            Pending::Silent { first_idle, changes, .. } => changes
                .iter()
                .rev()
                .find(|&&(o, _)| o <= offset)
                .map_or(*first_idle, |&(_, b)| b),
        }
    }

    /// Closes the window and returns what each lane delivered.
    pub(super) fn close(&mut self, window: SlotWindow) -> Vec<Reception> {
        let len = window.len;
        window
            .pending
            .into_iter()
            .zip(self.lanes.iter_mut())
            .map(|(p, st)| match p {
                Pending::Driven(word) => {
                    st.idle = word.get(len - 1);
                    st.last_driven = true;
                    Reception::Bits(word)
                }
                Pending::Silent { first_idle, idle, changes, .. } => {
                    st.idle = idle;
                    st.last_driven = false;
                    if changes.is_empty() {
                        return Reception::Constant { bit: first_idle, len };
                    }
                    let mut bits = BitString::with_capacity(len);
                    let mut current = first_idle;
                    let mut next = changes.iter().peekable();
                    for i in 0..len {
                        while let Some(&&(o, b)) = next.peek() {
                            if o > i {
                                break;
                            }
                            current = b;
                            next.next();
                        }
                        bits.push(current);
                    }
                    Reception::Bits(bits)
                }
            })
            .collect()
    }
}
