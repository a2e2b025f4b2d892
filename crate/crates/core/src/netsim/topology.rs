use serde::{Deserialize, Serialize};

use super::{LaneId, NetsimError, NodeId};

/// One directed lane. The channel it belongs to is the one whose rounds are
/// started by `initiator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lane {
    pub src: NodeId,
    pub dst: NodeId,
    pub initiator: NodeId,
}

/// Undirected graph with four lanes per edge.
///
/// For edge `e = {u, v}` with `u < v` the lanes are
/// `4e: u→v`, `4e+1: v→u` (channel started by `u`) and
/// `4e+2: v→u`, `4e+3: u→v` (channel started by `v`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    lanes: Vec<Lane>,
}

impl Topology {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, NetsimError> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(NetsimError::Topology(format!("edge ({a}, {b}) outside {n} nodes")));
            }
            if a == b {
                return Err(NetsimError::Topology(format!("self loop at {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let lanes = list
            .iter()
            .flat_map(|&(u, v)| {
                [
                    Lane { src: u, dst: v, initiator: u },
                    Lane { src: v, dst: u, initiator: u },
                    Lane { src: v, dst: u, initiator: v },
                    Lane { src: u, dst: v, initiator: v },
                ]
            })
            .collect();
        Ok(Self { n, edges: list, lanes })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("complete graph is well formed")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("path is well formed")
    }

    pub fn ring(n: usize) -> Self {
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("ring is well formed")
    }

    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (0, v))).expect("star is well formed")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn lane(&self, id: LaneId) -> Lane {
        self.lanes[id]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_index(a, b).is_some()
    }

    fn edge_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// `(forward, backward)` lanes of the channel started by `initiator` towards `other`.
    pub fn channel(&self, initiator: NodeId, other: NodeId) -> Option<(LaneId, LaneId)> {
        let e = self.edge_index(initiator, other)?;
        Some(if initiator < other {
            (4 * e, 4 * e + 1)
        } else {
            (4 * e + 2, 4 * e + 3)
        })
    }

    pub fn neighbors(&self, u: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| match () {
                _ if a == u => Some(b),
                _ if b == u => Some(a),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn incoming(&self, u: NodeId) -> impl Iterator<Item = LaneId> + '_ {
        (0..self.lanes.len()).filter(move |&l| self.lanes[l].dst == u)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
