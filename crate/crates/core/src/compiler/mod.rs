//! Protocols as I/O automata, the compiled node runtime that carries them
//! over noisy lanes, and a noise-free executor used as ground truth.

mod automaton;
mod diagnose;
pub mod generators;
mod metrics;
mod oracle;
mod protocol;
mod runtime;
mod transcript;
mod validate;

use thiserror::Error;

use crate::netsim::{NetsimError, NodeId};

pub use automaton::{Action, Automaton, MsgPattern, StateId, Transition};
pub use diagnose::{diagnose, FailureEvent, FailureKind};
pub use metrics::{measure, RunMetrics};
pub use oracle::{oracle_run, SchedulerPolicy};
pub use protocol::Protocol;
pub use runtime::{compile, execute, ChannelWire, Execution, NodeRuntime, RunOptions};
pub use transcript::{MsgRef, ReceivedMessage, SentMessage, Transcript, WalkStep};
pub use validate::{validate, Verdict, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("node {node}: {msg}")]
    Automaton { node: NodeId, msg: String },
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Netsim(#[from] NetsimError),
}
