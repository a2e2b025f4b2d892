//! Budget-constrained flip strategies.
//!
//! Every strategy sees only [`AdversaryView`] and its own seeded RNG, so its
//! actions depend only on its `AdversarySpec` and the public schedule.

mod forge;
mod strategies;

use serde::{Deserialize, Serialize};

use crate::netsim::{Adversary, AdversaryView, LaneId};

pub use forge::{forge_actions, jam_silence_actions};
pub use strategies::{Burst, FeedbackJammer, KeyGuesser, NoAdversary, SilenceForger, UniformRandom, WordCorruptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    None,
    UniformRandom,
    Burst,
    WordCorruptor,
    SilenceForger,
    KeyGuesser,
    FeedbackJammer,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 7] = [
        AdversaryKind::None,
        AdversaryKind::UniformRandom,
        AdversaryKind::Burst,
        AdversaryKind::WordCorruptor,
        AdversaryKind::SilenceForger,
        AdversaryKind::KeyGuesser,
        AdversaryKind::FeedbackJammer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::UniformRandom => "uniform_random",
            AdversaryKind::Burst => "burst",
            AdversaryKind::WordCorruptor => "word_corruptor",
            AdversaryKind::SilenceForger => "silence_forger",
            AdversaryKind::KeyGuesser => "key_guesser",
            AdversaryKind::FeedbackJammer => "feedback_jammer",
        }
    }
}

impl std::str::FromStr for AdversaryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown adversary `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub budget: u64,
    pub seed: u64,
    /// Steps over which `uniform_random` spreads its flips.
    pub horizon: Option<u64>,
    /// Consecutive flips per `burst`.
    pub burst_len: usize,
    /// Per-slot attack probability for `burst`.
    pub burst_rate: f64,
    /// Flips per attacked word for `silence_forger`.
    pub pattern_weight: usize,
    /// Lanes to attack; defaults to the lanes the protocol uses.
    pub target_lanes: Option<Vec<LaneId>>,
    /// Inclusive round window to attack in.
    pub rounds: Option<(u64, u64)>,
}

impl Default for AdversarySpec {
    fn default() -> Self {
        Self {
            kind: AdversaryKind::None,
            budget: 0,
            seed: 0,
            horizon: None,
            burst_len: 64,
            burst_rate: 0.25,
            pattern_weight: 64,
            target_lanes: None,
            rounds: None,
        }
    }
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, budget: u64, seed: u64) -> Self {
        Self { kind, budget, seed, ..Self::default() }
    }

    pub fn in_window(&self, round: u64) -> bool {
        self.rounds.is_none_or(|(a, b)| a <= round && round <= b)
    }

    pub fn build(&self) -> Box<dyn Adversary> {
        let s = self.clone();
        match self.kind {
            AdversaryKind::None => Box::new(NoAdversary),
            AdversaryKind::UniformRandom => Box::new(UniformRandom::new(s)),
            AdversaryKind::Burst => Box::new(Burst::new(s)),
            AdversaryKind::WordCorruptor => Box::new(WordCorruptor::new(s)),
            AdversaryKind::SilenceForger => Box::new(SilenceForger::new(s)),
            AdversaryKind::KeyGuesser => Box::new(KeyGuesser::new(s)),
            AdversaryKind::FeedbackJammer => Box::new(FeedbackJammer::new(s)),
        }
    }
}

/// `(initiator lane, reply lane)` of every channel the strategy may attack.
pub(crate) fn target_channels(spec: &AdversarySpec, view: &AdversaryView) -> Vec<(LaneId, LaneId)> {
    let topo = view.topology;
    let mut out: Vec<(LaneId, LaneId)> = match view.protocol {
        Some(p) => p.send_edges().into_iter().filter_map(|(u, v)| topo.channel(u, v)).collect(),
        None => topo
            .edges()
            .iter()
            .flat_map(|&(u, v)| [topo.channel(u, v), topo.channel(v, u)])
            .flatten()
            .collect(),
    };
    if let Some(lanes) = &spec.target_lanes {
        out.retain(|(a, b)| lanes.contains(a) || lanes.contains(b));
    }
    out
}
