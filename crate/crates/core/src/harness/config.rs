//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "pipeline-small"
//! n = 4
//! delta = 0.1
//! seeds = [1, 2, 3]      # or: seed_count = 200, seed_base = 1
//! max_steps = 50000000    # optional; derived from the protocol otherwise
//! keep_traces = false
//!
//! [topology]
//! kind = "complete"       # path | ring | star | tree | edges
//! # edges = [[0, 1], [1, 2]]
//!
//! [pi]
//! generator = "pipeline"  # ping_pong | token_ring | broadcast | gather | file
//! target_bits = 1000
//! lengths = { min = 3, max = 11 }   # or { fixed = 20 }
//! header_bits = 4                   # omit for fixed-length framing
//! seed = 1
//!
//! [adversary]
//! kind = "word_corruptor"
//! budget = 1000
//!
//! [grid]                  # optional: one cell per combination
//! n = [2, 4, 8]
//! L = [100, 1000]
//! adversary = ["uniform_random", "word_corruptor"]
//! T = [0, 100, 1000]
//!
//! [sweep]                 # optional: used by `sweep`
//! vary = "L"              # L | T | alpha
//! values = [16, 64, 256, 1024, 4096]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversaries::{AdversaryKind, AdversarySpec};
use crate::compiler::generators::{self, Framing, LengthDist, PipelineSpec};
use crate::compiler::{CompileError, Protocol};
use crate::netsim::{NodeId, Topology};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    Complete,
    Path,
    Ring,
    Star,
    /// Binary tree in heap order.
    Tree,
    Edges { edges: Vec<(NodeId, NodeId)> },
}

impl TopologySpec {
    pub fn build(&self, n: usize) -> Result<Topology, ConfigError> {
        Ok(match self {
            TopologySpec::Complete => Topology::complete(n),
            TopologySpec::Path => Topology::path(n),
            TopologySpec::Ring => Topology::ring(n),
            TopologySpec::Star => Topology::star(n),
            TopologySpec::Tree => generators::tree_topology(n),
            TopologySpec::Edges { edges } => {
                Topology::new(n, edges.iter().copied()).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LengthsSpec {
    Fixed { fixed: usize },
    Uniform { min: usize, max: usize },
}

impl From<LengthsSpec> for LengthDist {
    fn from(l: LengthsSpec) -> Self {
        match l {
            LengthsSpec::Fixed { fixed } => LengthDist::Fixed(fixed),
            LengthsSpec::Uniform { min, max } => LengthDist::Uniform { min, max },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum PiSpec {
    PingPong {
        exchanges: usize,
        #[serde(default = "one")]
        msg_bits: usize,
        #[serde(default)]
        seed: u64,
    },
    TokenRing {
        laps: usize,
        token_bits: usize,
        #[serde(default)]
        seed: u64,
    },
    Broadcast {
        msg_bits: usize,
        #[serde(default)]
        seed: u64,
    },
    Gather {
        msg_bits: usize,
        #[serde(default)]
        seed: u64,
    },
    Pipeline {
        target_bits: usize,
        lengths: LengthsSpec,
        /// Length header width; fixed-length framing when absent.
        header_bits: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> usize {
    1
}

impl PiSpec {
    /// Relative file paths resolve against `base`.
    pub fn build(&self, n: usize, base: &Path) -> Result<Protocol, ConfigError> {
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(ConfigError::Invalid(what.into())) };
        let p = match *self {
            PiSpec::PingPong { exchanges, msg_bits, seed } => {
                need(n == 2 && exchanges > 0 && msg_bits > 0, "ping_pong needs n = 2 and positive sizes")?;
                generators::ping_pong(exchanges, msg_bits, seed)
            }
            PiSpec::TokenRing { laps, token_bits, seed } => {
                need(laps > 0 && token_bits > 0, "token_ring needs positive sizes")?;
                generators::token_ring(n, laps, token_bits, seed)
            }
            PiSpec::Broadcast { msg_bits, seed } => {
                need(msg_bits > 0, "broadcast needs msg_bits > 0")?;
                generators::broadcast_tree(n, msg_bits, seed)
            }
            PiSpec::Gather { msg_bits, seed } => {
                need(msg_bits > 0, "gather needs msg_bits > 0")?;
                generators::gather(n, msg_bits, seed)
            }
            PiSpec::Pipeline { target_bits, lengths, header_bits, seed } => {
                let framing = match (header_bits, lengths) {
                    (Some(h), LengthsSpec::Uniform { min, max }) => {
                        need((1..=32).contains(&h) && min >= 1 && min <= max && max < 1 << h, "pipeline lengths must fit the header")?;
                        Framing::Prefixed { header_bits: h }
                    }
                    (Some(h), LengthsSpec::Fixed { fixed }) => {
                        need((1..=32).contains(&h) && fixed >= 1 && fixed < 1 << h, "pipeline lengths must fit the header")?;
                        Framing::Prefixed { header_bits: h }
                    }
                    (None, LengthsSpec::Fixed { fixed }) if fixed > 0 => Framing::Fixed(fixed),
                    (None, _) => return Err(ConfigError::Invalid("pipeline without header_bits needs fixed lengths".into())),
                };
                need(target_bits > 0, "target_bits must be positive")?;
                generators::random_pipeline(&PipelineSpec { n, target_bits, lengths: lengths.into(), framing, seed })
            }
            PiSpec::File { ref path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full).map_err(|source| ConfigError::Io { path: full, source })?;
                let mut p = Protocol::parse(&text)?;
                p.complete_inputs();
                p
            }
        };
        p.validate()?;
        if p.n() != n {
            return Err(ConfigError::Invalid(format!("protocol has {} nodes, config says {n}", p.n())));
        }
        Ok(p)
    }

    /// Sets the delivered-length knob: pipeline target bits, or two bits per ping-pong exchange.
    pub fn set_length(&mut self, l: usize) -> Result<(), ConfigError> {
        match self {
            PiSpec::Pipeline { target_bits, .. } => *target_bits = l,
            PiSpec::PingPong { exchanges, msg_bits, .. } => *exchanges = (l / (2 * *msg_bits)).max(1),
            _ => return Err(ConfigError::Invalid("L can only vary for pipeline and ping_pong".into())),
        }
        Ok(())
    }

    /// Sets the message length: fixed-length pipeline messages or ping-pong message size.
    pub fn set_alpha(&mut self, alpha: usize) -> Result<(), ConfigError> {
        match self {
            PiSpec::Pipeline { lengths, header_bits, .. } => {
                *lengths = LengthsSpec::Fixed { fixed: alpha };
                *header_bits = None;
            }
            PiSpec::PingPong { msg_bits, .. } => *msg_bits = alpha,
            _ => return Err(ConfigError::Invalid("alpha can only vary for pipeline and ping_pong".into())),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default, rename = "L")]
    pub l: Vec<usize>,
    #[serde(default)]
    pub adversary: Vec<AdversaryKind>,
    #[serde(default, rename = "T")]
    pub t: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vary {
    L,
    T,
    #[serde(rename = "alpha")]
    Alpha,
}

impl std::str::FromStr for Vary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" => Ok(Vary::L),
            "T" => Ok(Vary::T),
            "alpha" => Ok(Vary::Alpha),
            other => Err(format!("cannot vary `{other}`; use L, T or alpha")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub vary: Vary,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub n: usize,
    pub delta: f64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub seed_count: Option<u64>,
    #[serde(default)]
    pub seed_base: u64,
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub keep_traces: bool,
    pub topology: TopologySpec,
    pub pi: PiSpec,
    #[serde(default)]
    pub adversary: AdversarySpec,
    pub grid: Option<GridSpec>,
    pub sweep: Option<SweepSpec>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "experiment".into()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::Invalid(format!("n = {} < 2", self.n)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.seed_list().is_empty() {
            return Err(ConfigError::Invalid("no seeds".into()));
        }
        let topo = self.topology.build(self.n)?;
        if !topo.is_connected() {
            return Err(ConfigError::Invalid("topology is not connected".into()));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match self.seed_count {
            Some(c) => (self.seed_base..self.seed_base + c).collect(),
            None => self.seeds.clone(),
        }
    }

    /// One config per grid cell, named after the cell; just `self` without a grid.
    pub fn cells(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        let Some(grid) = &self.grid else { return Ok(vec![self.clone()]) };
        let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let ls = if grid.l.is_empty() { vec![None] } else { grid.l.iter().map(|&l| Some(l)).collect() };
        let kinds = if grid.adversary.is_empty() { vec![self.adversary.kind] } else { grid.adversary.clone() };
        let ts = if grid.t.is_empty() { vec![self.adversary.budget] } else { grid.t.clone() };
        let mut out = Vec::new();
        for n in or(&grid.n, self.n) {
            for &l in &ls {
                for &kind in &kinds {
                    for &t in &ts {
                        let mut c = self.clone();
                        c.grid = None;
                        c.n = n;
                        c.adversary.kind = kind;
                        c.adversary.budget = t;
                        let mut name = format!("{}-n{n}", self.name);
                        if let Some(l) = l {
                            c.pi.set_length(l)?;
                            name.push_str(&format!("-L{l}"));
                        }
                        c.name = format!("{name}-{}-T{t}", kind.as_str());
                        c.check()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Copy with the swept quantity set to `value`.
    pub fn with_value(&self, vary: Vary, value: u64) -> Result<ExperimentConfig, ConfigError> {
        let mut c = self.clone();
        c.sweep = None;
        match vary {
            Vary::L => c.pi.set_length(value as usize)?,
            Vary::T => c.adversary.budget = value,
            Vary::Alpha => c.pi.set_alpha(value as usize)?,
        }
        let tag = match vary {
            Vary::L => "L",
            Vary::T => "T",
            Vary::Alpha => "alpha",
        };
        c.name = format!("{}-{tag}{value}", self.name);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "t"
n = 3
delta = 0.1
seed_count = 4
seed_base = 10

[topology]
kind = "complete"

[pi]
generator = "pipeline"
target_bits = 50
lengths = { min = 2, max = 9 }
header_bits = 4

[adversary]
kind = "burst"
budget = 100

[grid]
n = [2, 3]
adversary = ["none", "uniform_random"]
T = [0, 5]
"#;

    #[test]
    fn parses_and_expands() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.seed_list(), vec![10, 11, 12, 13]);
        let cells = c.cells().unwrap();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[3].name, "t-n2-uniform_random-T5");
        assert!(cells.iter().all(|c| c.grid.is_none()));
        let p = cells[0].pi.build(2, Path::new(".")).unwrap();
        assert_eq!(p.n(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("delta = 0.1", "delta = 1.5")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("seed_count = 4", "seed_count = 0")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("kind = \"burst\"", "kind = \"laser\"")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("n = 3\n", "n = 3\nbogus = 1\n")).is_err());
    }
}
