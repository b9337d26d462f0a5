//! The individual prematching steps. Each function inspects a
//! [`DecodingSubgraph`]; only [`match_isolated_pairs`] mutates it.

use super::subgraph::{DecodingSubgraph, SubEdge};
use super::{Prematch, Step};
use crate::error::Result;
use crate::graph::{DetectorGraph, PathTable};

/// A single-edge candidate held in one of the step registers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub edge: usize,
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Lowest-weight edge per register after one pass over the subgraph.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CandidateRegisters {
    pub s2_1: Option<Candidate>,
    pub s2_2: Option<Candidate>,
    pub s4_1: Option<Candidate>,
    pub s4_2: Option<Candidate>,
}

impl CandidateRegisters {
    pub fn step2_empty(&self) -> bool {
        self.s2_1.is_none() && self.s2_2.is_none()
    }
}

fn edge_prematch(sub: &DecodingSubgraph, e: &SubEdge, step: Step) -> Prematch {
    Prematch::new(sub.detector(e.a), sub.detector(e.b), step, vec![e.id], e.weight)
}

/// Step 1: prematches every two-node component, all at once.
pub fn match_isolated_pairs(sub: &mut DecodingSubgraph) -> Vec<Prematch> {
    let pairs: Vec<SubEdge> =
        sub.active_edges().filter(|e| sub.deg_local(e.a) == 1 && sub.deg_local(e.b) == 1).copied().collect();
    let out = pairs.iter().map(|e| edge_prematch(sub, e, Step::S1)).collect();
    for e in &pairs {
        sub.remove_local(e.a, e.b);
    }
    out
}

fn offer(slot: &mut Option<Candidate>, c: Candidate) {
    // Edges arrive in id order, so strict comparison keeps the lowest id on ties.
    if slot.is_none_or(|cur| c.weight < cur.weight) {
        *slot = Some(c);
    }
}

/// One pass over the live subgraph edges filling the Step 2 and Step 4
/// registers. Singleton-safe edges compete for Step 2, the rest for Step 4;
/// within each, edges with a degree-1 endpoint go to the `.1` register.
pub fn scan_candidates(sub: &DecodingSubgraph) -> CandidateRegisters {
    let mut regs = CandidateRegisters::default();
    for e in sub.active_edges() {
        let c = Candidate { edge: e.id, a: sub.detector(e.a), b: sub.detector(e.b), weight: e.weight };
        let leaf = sub.deg_local(e.a).min(sub.deg_local(e.b)) == 1;
        let safe = !sub.creates_singleton_local(e.a, e.b);
        let slot = match (safe, leaf) {
            (true, true) => &mut regs.s2_1,
            (true, false) => &mut regs.s2_2,
            (false, true) => &mut regs.s4_1,
            (false, false) => &mut regs.s4_2,
        };
        offer(slot, c);
    }
    regs
}

/// Best Step 3 pairing plus the number of singleton paths examined.
#[derive(Clone, Debug, PartialEq)]
pub struct SingletonSearch {
    pub prematch: Option<Prematch>,
    pub paths_examined: usize,
}

/// Step 3: pairs an existing singleton with the unmatched node at the
/// shortest path distance, skipping partners whose removal would strand a
/// degree-1 neighbour.
pub fn step3_singleton_path(sub: &DecodingSubgraph, graph: &DetectorGraph, table: &PathTable) -> Result<SingletonSearch> {
    let singletons: Vec<usize> = sub.active_locals().filter(|&i| sub.deg_local(i) == 0).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    let mut paths = 0;
    for &s in &singletons {
        let sd = sub.detector(s);
        for t in sub.active_locals() {
            if t == s {
                continue;
            }
            paths += 1;
            if sub.neighbors(t).any(|k| sub.deg_local(k) == 1) {
                continue;
            }
            let td = sub.detector(t);
            let key = (table.ranking_weight(sd, td), sd, td);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let prematch = match best {
        Some((_, s, t)) => {
            // Routes run from the lower id, matching the order of a and b.
            let edges = table.reconstruct_path(graph, s.min(t), s.max(t))?;
            Some(Prematch::new(s, t, Step::S3, edges, table.weight(s, t)))
        }
        None => None,
    };
    Ok(SingletonSearch { prematch, paths_examined: paths })
}

/// Alternative singleton test from per-node counters only:
/// `#dependent_i - [deg_j == 1] > 0` or the symmetric term. Agrees with
/// [`DecodingSubgraph::creates_singleton`] on triangle-free subgraphs, which
/// covers every subgraph of the surface-code decoding graph.
pub fn creates_singleton_by_counters(sub: &DecodingSubgraph, a: usize, b: usize) -> Option<bool> {
    let deg_a = sub.degree(a)?;
    let deg_b = sub.degree(b)?;
    let dep_a = sub.dependents(a)?;
    let dep_b = sub.dependents(b)?;
    Some(dep_a > usize::from(deg_b == 1) || dep_b > usize::from(deg_a == 1))
}
