//! Built-in protocol families.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::automaton::{Automaton, MsgPattern};
use super::protocol::Protocol;
use crate::bits::BitString;
use crate::exchange::Language;
use crate::netsim::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthDist {
    Fixed(usize),
    /// Inclusive range.
    Uniform { min: usize, max: usize },
}

impl LengthDist {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            LengthDist::Fixed(k) => k,
            LengthDist::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }
}

/// How pipeline messages are delimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Framing {
    /// Every message has exactly this many bits; the length distribution is ignored.
    Fixed(usize),
    /// A length header of this many bits in front of a body drawn from the distribution.
    Prefixed { header_bits: usize },
}

fn finish(automata: Vec<Automaton>, languages: BTreeMap<(NodeId, NodeId), Language>) -> Protocol {
    let mut p = Protocol { automata, languages };
    p.complete_inputs();
    debug_assert!(p.validate().is_ok(), "generated protocols are valid");
    p
}

/// Node 0 sends `exchanges` messages to node 1, each answered before the next.
///
/// With one-bit messages node 1 echoes the bit it received and node 0
/// outputs the parity of everything echoed back; otherwise messages are
/// random and the outputs are fixed labels.
pub fn ping_pong(exchanges: usize, msg_bits: usize, seed: u64) -> Protocol {
    assert!(exchanges >= 1 && msg_bits >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let msgs: Vec<BitString> = (0..exchanges).map(|_| BitString::random(msg_bits, &mut rng)).collect();
    let replies: Vec<BitString> = (0..exchanges).map(|_| BitString::random(msg_bits, &mut rng)).collect();
    let mut a = Automaton::new(Vec::new(), 0);
    let mut b = Automaton::new(Vec::new(), 0);
    if msg_bits == 1 {
        // a: (i, parity) send / await states
        let send: Vec<[usize; 2]> = (0..=exchanges)
            .map(|i| [a.add_state(format!("send{i}_p0")), a.add_state(format!("send{i}_p1"))])
            .collect();
        let wait: Vec<[usize; 2]> = (0..exchanges)
            .map(|i| [a.add_state(format!("wait{i}_p0")), a.add_state(format!("wait{i}_p1"))])
            .collect();
        for p in 0..2 {
            a.set_terminal(send[exchanges][p], Some(format!("parity={p}")));
            for i in 0..exchanges {
                a.add_output(send[i][p], 1, msgs[i].clone(), wait[i][p]);
                for bit in 0..2 {
                    a.add_input(wait[i][p], 1, MsgPattern::Exact(BitString::from_uint(bit, 1)), send[i + 1][p ^ bit as usize]);
                }
            }
        }
        a.initial = send[0][0];
        let listen: Vec<usize> = (0..=exchanges).map(|i| b.add_state(format!("listen{i}"))).collect();
        for i in 0..exchanges {
            for bit in 0..2u64 {
                let echo = b.add_state(format!("echo{i}_{bit}"));
                b.add_input(listen[i], 0, MsgPattern::Exact(BitString::from_uint(bit, 1)), echo);
                b.add_output(echo, 0, BitString::from_uint(bit, 1), listen[i + 1]);
            }
        }
        b.set_terminal(listen[exchanges], Some("served".into()));
        b.initial = listen[0];
    } else {
        let send: Vec<usize> = (0..=exchanges).map(|i| a.add_state(format!("send{i}"))).collect();
        let wait: Vec<usize> = (0..exchanges).map(|i| a.add_state(format!("wait{i}"))).collect();
        let listen: Vec<usize> = (0..=exchanges).map(|i| b.add_state(format!("listen{i}"))).collect();
        let reply: Vec<usize> = (0..exchanges).map(|i| b.add_state(format!("reply{i}"))).collect();
        for i in 0..exchanges {
            a.add_output(send[i], 1, msgs[i].clone(), wait[i]);
            a.add_input(wait[i], 1, MsgPattern::Any, send[i + 1]);
            b.add_input(listen[i], 0, MsgPattern::Any, reply[i]);
            b.add_output(reply[i], 0, replies[i].clone(), listen[i + 1]);
        }
        a.set_terminal(send[exchanges], Some("done".into()));
        b.set_terminal(listen[exchanges], Some("served".into()));
        a.initial = send[0];
        b.initial = listen[0];
    }
    let lang = Language::FixedLength(msg_bits);
    finish(vec![a, b], BTreeMap::from([((0, 1), lang.clone()), ((1, 0), lang)]))
}

/// A token travels `laps` times around a ring of `n` nodes starting at node 0.
pub fn token_ring(n: usize, laps: usize, token_bits: usize, seed: u64) -> Protocol {
    assert!(n >= 2 && laps >= 1 && token_bits >= 1);
    let token = BitString::random(token_bits, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut automata = Vec::new();
    for u in 0..n {
        let (prev, next) = ((u + n - 1) % n, (u + 1) % n);
        let mut a = Automaton::new(Vec::new(), 0);
        let mut cur = a.add_state("start");
        for lap in 0..laps {
            if u == 0 {
                let wait = a.add_state(format!("wait{lap}"));
                a.add_output(cur, next, token.clone(), wait);
                let back = a.add_state(format!("back{lap}"));
                a.add_input(wait, prev, MsgPattern::Any, back);
                cur = back;
            } else {
                let got = a.add_state(format!("got{lap}"));
                a.add_input(cur, prev, MsgPattern::Any, got);
                let sent = a.add_state(format!("sent{lap}"));
                a.add_output(got, next, token.clone(), sent);
                cur = sent;
            }
        }
        a.set_terminal(cur, Some(format!("laps={laps}")));
        automata.push(a);
    }
    let languages = (0..n).map(|u| ((u, (u + 1) % n), Language::FixedLength(token_bits))).collect();
    finish(automata, languages)
}

/// Children of `u` in the binary heap layout.
fn heap_children(u: NodeId, n: usize) -> Vec<NodeId> {
    [2 * u + 1, 2 * u + 2].into_iter().filter(|&c| c < n).collect()
}

/// Node 0 floods one message down a binary tree.
pub fn broadcast_tree(n: usize, msg_bits: usize, seed: u64) -> Protocol {
    assert!(n >= 2 && msg_bits >= 1);
    let m = BitString::random(msg_bits, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut automata = Vec::new();
    let mut languages = BTreeMap::new();
    for u in 0..n {
        let mut a = Automaton::new(Vec::new(), 0);
        let mut cur = a.add_state("start");
        if u != 0 {
            let got = a.add_state("got");
            a.add_input(cur, (u - 1) / 2, MsgPattern::Any, got);
            cur = got;
        }
        for c in heap_children(u, n) {
            let next = a.add_state(format!("sent{c}"));
            a.add_output(cur, c, m.clone(), next);
            languages.insert((u, c), Language::FixedLength(msg_bits));
            cur = next;
        }
        a.set_terminal(cur, Some("informed".into()));
        automata.push(a);
    }
    finish(automata, languages)
}

pub fn tree_topology(n: usize) -> Topology {
    Topology::new(n, (1..n).map(|v| ((v - 1) / 2, v))).expect("tree is well formed")
}

/// Every leaf of a star sends one message to node 0, which counts arrivals.
pub fn gather(n: usize, msg_bits: usize, seed: u64) -> Protocol {
    assert!(n >= 2 && msg_bits >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut automata = Vec::new();
    let mut hub = Automaton::new(Vec::new(), 0);
    let counts: Vec<usize> = (0..n).map(|k| hub.add_state(format!("have{k}"))).collect();
    for k in 0..n - 1 {
        for v in 1..n {
            hub.add_input(counts[k], v, MsgPattern::Any, counts[k + 1]);
        }
    }
    hub.set_terminal(counts[n - 1], Some(format!("gathered={}", n - 1)));
    automata.push(hub);
    let mut languages = BTreeMap::new();
    for v in 1..n {
        let mut a = Automaton::new(Vec::new(), 0);
        let start = a.add_state("start");
        let done = a.add_state("done");
        a.add_output(start, 0, BitString::random(msg_bits, &mut rng), done);
        a.set_terminal(done, Some("sent".into()));
        automata.push(a);
        languages.insert((v, 0), Language::FixedLength(msg_bits));
    }
    finish(automata, languages)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub n: usize,
    /// Messages are generated until their total length reaches this.
    pub target_bits: usize,
    pub lengths: LengthDist,
    pub framing: Framing,
    pub seed: u64,
}

/// A single causal chain: message `j + 1` is sent by the receiver of message
/// `j` to a random other node. Needs a complete topology.
pub fn random_pipeline(spec: &PipelineSpec) -> Protocol {
    let n = spec.n;
    assert!(n >= 2 && spec.target_bits >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut hops: Vec<(NodeId, NodeId, BitString)> = Vec::new();
    let mut total = 0usize;
    let mut at = 0usize;
    while total < spec.target_bits {
        let mut to = rng.gen_range(0..n - 1);
        if to >= at {
            to += 1;
        }
        let m = match spec.framing {
            Framing::Fixed(k) => BitString::random(k, &mut rng),
            Framing::Prefixed { header_bits } => {
                let cap = (1usize << header_bits) - 1;
                let body = spec.lengths.sample(&mut rng).min(cap);
                Language::frame(header_bits, &BitString::random(body, &mut rng))
            }
        };
        total += m.len();
        hops.push((at, to, m));
        at = to;
    }
    let lang = match spec.framing {
        Framing::Fixed(k) => Language::FixedLength(k),
        Framing::Prefixed { header_bits } => Language::LengthPrefixed { header_bits },
    };
    let mut automata: Vec<Automaton> = (0..n)
        .map(|_| {
            let mut a = Automaton::new(Vec::new(), 0);
            a.add_state("start");
            a
        })
        .collect();
    let mut cursor = vec![0usize; n];
    for (j, (from, to, m)) in hops.iter().enumerate() {
        let a = &mut automata[*from];
        let next = a.add_state(format!("sent{j}"));
        a.add_output(cursor[*from], *to, m.clone(), next);
        cursor[*from] = next;
        let b = &mut automata[*to];
        let next = b.add_state(format!("got{j}"));
        b.add_input(cursor[*to], *from, MsgPattern::Any, next);
        cursor[*to] = next;
    }
    for (u, a) in automata.iter_mut().enumerate() {
        a.set_terminal(cursor[u], Some("done".into()));
    }
    let languages = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .map(|e| (e, lang.clone()))
        .collect();
    finish(automata, languages)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_protocols_validate() {
        let spec = PipelineSpec {
            n: 4,
            target_bits: 200,
            lengths: LengthDist::Uniform { min: 3, max: 11 },
            framing: Framing::Prefixed { header_bits: 4 },
            seed: 9,
        };
        for p in [
            ping_pong(5, 1, 1),
            ping_pong(3, 7, 2),
            token_ring(4, 2, 3, 3),
            broadcast_tree(7, 5, 4),
            gather(5, 4, 5),
            random_pipeline(&spec),
        ] {
            p.validate().unwrap();
        }
    }

    #[test]
    fn text_round_trip() {
        let p = ping_pong(2, 1, 1);
        let q = Protocol::parse(&p.to_text()).unwrap();
        assert_eq!(p, q);
        let r = broadcast_tree(5, 3, 2);
        assert_eq!(Protocol::parse(&r.to_text()).unwrap(), r);
    }
}
