//! A protocol is one automaton per node plus a message language per directed edge.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! node 0 {
//!   states: idle, wait, done
//!   initial: idle
//!   terminal: done = ok
//!   idle --out(1,0110)--> wait
//!   wait --in(1,*)--> done
//!   wait --in(1,01)--> done
//! }
//! language 0 -> 1: fixed 4
//! language 1 -> 0: prefixed 3
//! language 1 -> 2: explicit 0, 10, 11
//! ```
//!
//! `terminal:` may repeat and the `= value` part is optional. Nodes are
//! numbered `0..n` with none missing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::automaton::{Action, Automaton, MsgPattern};
use super::CompileError;
use crate::bits::BitString;
use crate::exchange::Language;
use crate::netsim::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub automata: Vec<Automaton>,
    pub languages: BTreeMap<(NodeId, NodeId), Language>,
}

impl Protocol {
    pub fn n(&self) -> usize {
        self.automata.len()
    }

    /// Directed edges `(u, v)` on which `u` can send.
    pub fn send_edges(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.automata
            .iter()
            .enumerate()
            .flat_map(|(u, a)| {
                a.transitions.iter().filter_map(move |t| match t.action {
                    Action::Output { to, .. } => Some((u, to)),
                    _ => None,
                })
            })
            .collect()
    }

    pub fn senders_to(&self, v: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.send_edges().into_iter().filter(|&(_, d)| d == v).map(|(u, _)| u).collect();
        out.dedup();
        out
    }

    pub fn language(&self, from: NodeId, to: NodeId) -> Option<&Language> {
        self.languages.get(&(from, to))
    }

    /// Adds `Any` self-loops so that every node is input-enabled.
    pub fn complete_inputs(&mut self) {
        for v in 0..self.n() {
            let senders = self.senders_to(v);
            self.automata[v].complete_inputs(&senders);
        }
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        if self.n() < 2 {
            return Err(CompileError::Protocol("at least two nodes are needed".into()));
        }
        for (u, a) in self.automata.iter().enumerate() {
            for t in &a.transitions {
                let (peer, message) = match &t.action {
                    Action::Output { to, message } => ((u, *to), Some(message)),
                    Action::Input { from, .. } => ((*from, u), None),
                };
                if peer.0 >= self.n() || peer.1 >= self.n() {
                    return Err(CompileError::Automaton { node: u, msg: "action names an unknown node".into() });
                }
                let Some(lang) = self.language(peer.0, peer.1) else {
                    return Err(CompileError::Protocol(format!("no language for edge {} -> {}", peer.0, peer.1)));
                };
                if let Some(m) = message {
                    if !lang.contains(m) {
                        return Err(CompileError::Automaton {
                            node: u,
                            msg: format!("message {m} to {} is not in the edge language", peer.1),
                        });
                    }
                }
            }
            let senders = self.senders_to(u);
            let explicit = |v: NodeId| match self.language(v, u) {
                Some(Language::Explicit(set)) => Some(set.iter().cloned().collect()),
                _ => None,
            };
            a.check(u, &senders, &explicit)?;
        }
        Ok(())
    }

    /// Checks that every sending edge exists in `topology`.
    pub fn check_topology(&self, topology: &Topology) -> Result<(), CompileError> {
        if topology.n() != self.n() {
            return Err(CompileError::Protocol(format!(
                "topology has {} nodes, protocol has {}",
                topology.n(),
                self.n()
            )));
        }
        for (u, v) in self.send_edges() {
            if !topology.has_edge(u, v) {
                return Err(CompileError::Protocol(format!("edge {u} -> {v} missing from topology")));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CompileError> {
        Parser::default().run(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (u, a) in self.automata.iter().enumerate() {
            let _ = writeln!(out, "node {u} {{");
            let _ = writeln!(out, "  states: {}", a.states.join(", "));
            let _ = writeln!(out, "  initial: {}", a.states[a.initial]);
            for (s, value) in &a.terminal {
                match value {
                    Some(v) => writeln!(out, "  terminal: {} = {v}", a.states[*s]),
                    None => writeln!(out, "  terminal: {}", a.states[*s]),
                }
                .expect("writing to a String");
            }
            for t in &a.transitions {
                let label = match &t.action {
                    Action::Output { to, message } => format!("out({to},{message})"),
                    Action::Input { from, pattern: MsgPattern::Any } => format!("in({from},*)"),
                    Action::Input { from, pattern: MsgPattern::Exact(m) } => format!("in({from},{m})"),
                };
                let _ = writeln!(out, "  {} --{label}--> {}", a.states[t.from], a.states[t.to]);
            }
            out.push_str("}\n");
        }
        for ((u, v), lang) in &self.languages {
            let body = match lang {
                Language::FixedLength(k) => format!("fixed {k}"),
                Language::LengthPrefixed { header_bits } => format!("prefixed {header_bits}"),
                Language::Explicit(set) => {
                    let words: Vec<String> = set.iter().map(ToString::to_string).collect();
                    format!("explicit {}", words.join(", "))
                }
            };
            let _ = writeln!(out, "language {u} -> {v}: {body}");
        }
        out
    }
}

#[derive(Default)]
struct Parser {
    nodes: BTreeMap<NodeId, Automaton>,
    languages: BTreeMap<(NodeId, NodeId), Language>,
}

struct NodeDraft {
    id: NodeId,
    states: Vec<String>,
    initial: Option<String>,
    terminal: Vec<(String, Option<String>)>,
    transitions: Vec<(String, Action, String)>,
}

fn err(line: usize, msg: impl Into<String>) -> CompileError {
    CompileError::Parse { line, msg: msg.into() }
}

fn parse_bits(line: usize, s: &str) -> Result<BitString, CompileError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(err(line, "empty bit string"));
    }
    BitString::parse(s).ok_or_else(|| err(line, format!("not a bit string: {s}")))
}

fn parse_num(line: usize, s: &str) -> Result<usize, CompileError> {
    s.trim().parse().map_err(|_| err(line, format!("not a number: {}", s.trim())))
}

impl Parser {
    fn run(mut self, text: &str) -> Result<Protocol, CompileError> {
        let mut draft: Option<NodeDraft> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(d) = draft.as_mut() {
                if content == "}" {
                    let d = draft.take().expect("inside a node block");
                    self.finish(line, d)?;
                } else {
                    Self::node_line(line, content, d)?;
                }
                continue;
            }
            if let Some(rest) = content.strip_prefix("node ") {
                let id = rest.trim_end_matches('{').trim();
                if !content.ends_with('{') {
                    return Err(err(line, "expected `{` after node id"));
                }
                draft = Some(NodeDraft {
                    id: parse_num(line, id)?,
                    states: Vec::new(),
                    initial: None,
                    terminal: Vec::new(),
                    transitions: Vec::new(),
                });
            } else if let Some(rest) = content.strip_prefix("language ") {
                self.language_line(line, rest)?;
            } else {
                return Err(err(line, format!("unexpected `{content}`")));
            }
        }
        if draft.is_some() {
            return Err(err(text.lines().count(), "unterminated node block"));
        }
        let n = self.nodes.len();
        if self.nodes.keys().copied().ne(0..n) {
            return Err(CompileError::Protocol("nodes must be numbered 0..n without gaps".into()));
        }
        Ok(Protocol {
            automata: self.nodes.into_values().collect(),
            languages: self.languages,
        })
    }

    fn node_line(line: usize, content: &str, d: &mut NodeDraft) -> Result<(), CompileError> {
        if let Some(rest) = content.strip_prefix("states:") {
            d.states.extend(rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
        } else if let Some(rest) = content.strip_prefix("initial:") {
            d.initial = Some(rest.trim().to_string());
        } else if let Some(rest) = content.strip_prefix("terminal:") {
            match rest.split_once('=') {
                Some((s, v)) => d.terminal.push((s.trim().to_string(), Some(v.trim().to_string()))),
                None => d.terminal.push((rest.trim().to_string(), None)),
            }
        } else if let Some((from, rest)) = content.split_once("--") {
            let (label, to) = rest.split_once("-->").ok_or_else(|| err(line, "expected `-->`"))?;
            let label = label.trim();
            let (kind, args) = label
                .strip_suffix(')')
                .and_then(|l| l.split_once('('))
                .ok_or_else(|| err(line, format!("bad action `{label}`")))?;
            let (peer, msg) = args.split_once(',').ok_or_else(|| err(line, "expected `(node,message)`"))?;
            let peer = parse_num(line, peer)?;
            let action = match kind.trim() {
                "out" => Action::Output { to: peer, message: parse_bits(line, msg)? },
                "in" if msg.trim() == "*" => Action::Input { from: peer, pattern: MsgPattern::Any },
                "in" => Action::Input { from: peer, pattern: MsgPattern::Exact(parse_bits(line, msg)?) },
                other => return Err(err(line, format!("unknown action `{other}`"))),
            };
            d.transitions.push((from.trim().to_string(), action, to.trim().to_string()));
        } else {
            return Err(err(line, format!("unexpected `{content}` in node block")));
        }
        Ok(())
    }

    fn finish(&mut self, line: usize, d: NodeDraft) -> Result<(), CompileError> {
        let lookup = |a: &Automaton, s: &str| a.state_id(s).ok_or_else(|| err(line, format!("unknown state `{s}` in node {}", d.id)));
        let initial = d.initial.as_deref().ok_or_else(|| err(line, format!("node {} has no initial state", d.id)))?;
        let mut a = Automaton::new(d.states.clone(), 0);
        a.initial = lookup(&a, initial)?;
        for (s, v) in &d.terminal {
            let id = lookup(&a, s)?;
            a.set_terminal(id, v.clone());
        }
        for (from, action, to) in d.transitions {
            let (from, to) = (lookup(&a, &from)?, lookup(&a, &to)?);
            a.transitions.push(super::automaton::Transition { from, action, to });
        }
        if self.nodes.insert(d.id, a).is_some() {
            return Err(err(line, format!("node {} defined twice", d.id)));
        }
        Ok(())
    }

    fn language_line(&mut self, line: usize, rest: &str) -> Result<(), CompileError> {
        let (edge, spec) = rest.split_once(':').ok_or_else(|| err(line, "expected `:`"))?;
        let (u, v) = edge.split_once("->").ok_or_else(|| err(line, "expected `u -> v`"))?;
        let (u, v) = (parse_num(line, u)?, parse_num(line, v)?);
        let spec = spec.trim();
        let (kind, arg) = spec.split_once(' ').unwrap_or((spec, ""));
        let lang = match kind {
            "fixed" => Language::fixed(parse_num(line, arg)?),
            "prefixed" => Language::length_prefixed(parse_num(line, arg)?),
            "explicit" => Language::explicit(
                arg.split(',')
                    .map(|w| parse_bits(line, w))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            other => return Err(err(line, format!("unknown language kind `{other}`"))),
        }
        .map_err(|e| err(line, e.to_string()))?;
        if self.languages.insert((u, v), lang).is_some() {
            return Err(err(line, format!("language for {u} -> {v} given twice")));
        }
        Ok(())
    }
}
