use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CompileError;
use crate::bits::BitString;
use crate::netsim::NodeId;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MsgPattern {
    Any,
    Exact(BitString),
}

impl MsgPattern {
    pub fn matches(&self, m: &BitString) -> bool {
        match self {
            MsgPattern::Any => true,
            MsgPattern::Exact(e) => e == m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Input { from: NodeId, pattern: MsgPattern },
    Output { to: NodeId, message: BitString },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: StateId,
    pub action: Action,
    pub to: StateId,
}

/// An I/O automaton for one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automaton {
    pub states: Vec<String>,
    pub initial: StateId,
    /// Terminal states and their optional outputs.
    pub terminal: BTreeMap<StateId, Option<String>>,
    pub transitions: Vec<Transition>,
}

impl Automaton {
    pub fn new(states: Vec<String>, initial: StateId) -> Self {
        Self {
            states,
            initial,
            terminal: BTreeMap::new(),
            transitions: Vec::new(),
        }
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.states.push(name.into());
        self.states.len() - 1
    }

    pub fn set_terminal(&mut self, s: StateId, output: Option<String>) {
        self.terminal.insert(s, output);
    }

    pub fn add_output(&mut self, from: StateId, to_node: NodeId, message: BitString, to: StateId) {
        self.transitions.push(Transition {
            from,
            action: Action::Output { to: to_node, message },
            to,
        });
    }

    pub fn add_input(&mut self, from: StateId, from_node: NodeId, pattern: MsgPattern, to: StateId) {
        self.transitions.push(Transition {
            from,
            action: Action::Input { from: from_node, pattern },
            to,
        });
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.terminal.contains_key(&s)
    }

    /// The first declared output transition leaving `s`.
    pub fn first_output(&self, s: StateId) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.from == s && matches!(t.action, Action::Output { .. }))
    }

    /// Target of the input `m` from `from` in state `s`; exact patterns win over `Any`.
    pub fn input_target(&self, s: StateId, from: NodeId, m: &BitString) -> Option<StateId> {
        let inputs = || {
            self.transitions.iter().filter_map(move |t| match &t.action {
                Action::Input { from: f, pattern } if t.from == s && *f == from => Some((pattern, t.to)),
                _ => None,
            })
        };
        inputs()
            .find(|(p, _)| matches!(p, MsgPattern::Exact(e) if e == m))
            .or_else(|| inputs().find(|(p, _)| **p == MsgPattern::Any))
            .map(|(_, to)| to)
    }

    fn has_any_input(&self, s: StateId, from: NodeId) -> bool {
        self.transitions.iter().any(|t| {
            t.from == s && matches!(&t.action, Action::Input { from: f, pattern: MsgPattern::Any } if *f == from)
        })
    }

    /// Adds an `Any` self-loop wherever a non-terminal state lacks one for a sender.
    pub fn complete_inputs(&mut self, senders: &[NodeId]) {
        for s in 0..self.states.len() {
            if self.is_terminal(s) {
                continue;
            }
            for &v in senders {
                if !self.has_any_input(s, v) {
                    self.add_input(s, v, MsgPattern::Any, s);
                }
            }
        }
    }

    pub(super) fn check(&self, node: NodeId, senders: &[NodeId], explicit: &dyn Fn(NodeId) -> Option<Vec<BitString>>) -> Result<(), CompileError> {
        let bad = |msg: String| Err(CompileError::Automaton { node, msg });
        if self.states.is_empty() || self.initial >= self.states.len() {
            return bad("initial state out of range".into());
        }
        for t in &self.transitions {
            if t.from >= self.states.len() || t.to >= self.states.len() {
                return bad("transition references an unknown state".into());
            }
            match &t.action {
                Action::Output { to, .. } | Action::Input { from: to, .. } if *to == node => {
                    return bad("self-addressed action".into());
                }
                _ => {}
            }
        }
        if let Some(&s) = self.terminal.keys().find(|&&s| s >= self.states.len()) {
            return bad(format!("terminal state {s} out of range"));
        }
        for s in (0..self.states.len()).filter(|&s| !self.is_terminal(s)) {
            for &v in senders {
                if self.has_any_input(s, v) {
                    continue;
                }
                let covered = explicit(v).is_some_and(|words| {
                    words.iter().all(|w| self.input_target(s, v, w).is_some())
                });
                if !covered {
                    return bad(format!("state {} is not input-enabled for node {v}", self.states[s]));
                }
            }
        }
        Ok(())
    }
}
