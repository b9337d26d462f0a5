//! Exhaustive minimum-weight matching for low-Hamming-weight syndromes.
//!
//! Enumeration is canonical: the smallest unmatched node is paired with
//! each larger unmatched node in turn, then with the boundary. That order
//! is lexicographic in the pair list, so keeping the first optimum found
//! breaks ties towards the smallest canonical list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DetectorGraph, PathTable};
use crate::noise::{parity_reduce, Syndrome};
use crate::predecoder::{PredecodeResult, Prematch, TimingModel};

/// Hard upper limit on the enumerated weight (bitmask width and runtime).
pub const MAX_HW_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub hw_cap: usize,
    /// When false every boundary weight is treated as infinite.
    pub boundary: bool,
    /// Branch-and-bound: skip partial matchings already heavier than the
    /// best complete one. Leaves the result unchanged but makes
    /// `enumerated` smaller.
    pub prune: bool,
}

impl MatchConfig {
    pub const ASTREA: MatchConfig = MatchConfig { hw_cap: crate::LOW_HW_LIMIT, boundary: true, prune: false };
    pub const ORACLE: MatchConfig = MatchConfig { hw_cap: 14, boundary: true, prune: true };
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self::ASTREA
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingSet {
    pub pairs: Vec<(usize, usize)>,
    pub boundary_matches: Vec<usize>,
    pub total_weight: f64,
    pub correction_edges: Vec<usize>,
    /// Complete matchings examined.
    pub enumerated: u64,
}

impl MatchingSet {
    fn empty() -> Self {
        Self { pairs: Vec::new(), boundary_matches: Vec::new(), total_weight: 0.0, correction_edges: Vec::new(), enumerated: 1 }
    }
}

const BOUNDARY: u32 = u32::MAX;

fn tie_tolerance(w: f64) -> f64 {
    1e-9 * w.abs()
}

struct Search<'a> {
    m: usize,
    w: &'a [f64],
    b: &'a [f64],
    prune: bool,
    stack: Vec<(u32, u32)>,
    best: Option<(f64, Vec<(u32, u32)>)>,
    enumerated: u64,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(w, _)| *w)
    }

    fn recurse(&mut self, used: u32, partial: f64) {
        if self.prune && partial > self.bound() + tie_tolerance(self.bound()) {
            return;
        }
        let full = (1u32 << self.m) - 1;
        if used == full {
            self.enumerated += 1;
            let better = match &self.best {
                None => partial.is_finite(),
                Some((bw, _)) => bw - partial > tie_tolerance(*bw),
            };
            if better {
                self.best = Some((partial, self.stack.clone()));
            }
            return;
        }
        let i = (!used).trailing_zeros() as usize;
        let used_i = used | (1 << i);
        for j in i + 1..self.m {
            if used_i & (1 << j) != 0 {
                continue;
            }
            self.stack.push((i as u32, j as u32));
            self.recurse(used_i | (1 << j), partial + self.w[i * self.m + j]);
            self.stack.pop();
        }
        if self.b[i].is_finite() {
            self.stack.push((i as u32, BOUNDARY));
            self.recurse(used_i, partial + self.b[i]);
            self.stack.pop();
        }
    }
}

/// Minimum-weight matching of `flipped` (detector ids) into pairs and
/// boundary matches by exhaustive enumeration.
pub fn brute_force_mwpm(
    graph: &DetectorGraph,
    table: &PathTable,
    flipped: &[usize],
    cfg: &MatchConfig,
) -> Result<MatchingSet> {
    let cap = cfg.hw_cap.min(MAX_HW_CAP);
    if flipped.len() > cap {
        return Err(Error::HammingWeightCap { hw: flipped.len(), cap });
    }
    if let Some(&bad) = flipped.iter().find(|&&n| n >= table.len()) {
        return Err(Error::UnknownNode(bad));
    }
    let mut nodes = flipped.to_vec();
    nodes.sort_unstable();
    if nodes.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::Config("duplicate node in matching input".into()));
    }
    let m = nodes.len();
    if m == 0 {
        return Ok(MatchingSet::empty());
    }
    let mut w = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            w[i * m + j] = if i == j { 0.0 } else { table.weight(nodes[i], nodes[j]) };
        }
    }
    let b: Vec<f64> =
        nodes.iter().map(|&n| if cfg.boundary { table.boundary_weight(n) } else { f64::INFINITY }).collect();

    let mut search = Search { m, w: &w, b: &b, prune: cfg.prune, stack: Vec::with_capacity(m), best: None, enumerated: 0 };
    search.recurse(0, 0.0);
    let enumerated = search.enumerated;
    let (total_weight, canon) = search.best.ok_or(Error::NoPerfectMatching(m))?;

    let mut pairs = Vec::new();
    let mut boundary_matches = Vec::new();
    let mut edges = Vec::new();
    for (i, j) in canon {
        let a = nodes[i as usize];
        if j == BOUNDARY {
            boundary_matches.push(a);
            edges.extend(table.reconstruct_boundary_path(graph, a)?);
        } else {
            let c = nodes[j as usize];
            pairs.push((a, c));
            edges.extend(table.reconstruct_path(graph, a, c)?);
        }
    }
    Ok(MatchingSet { pairs, boundary_matches, total_weight, correction_edges: parity_reduce(edges), enumerated })
}

/// Combined result of predecoding plus main decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub prematches: Vec<Prematch>,
    /// `None` when an aborted predecode left more than the main decoder
    /// can take.
    pub matching: Option<MatchingSet>,
    pub correction_edges: Vec<usize>,
    /// Infinite when no complete correction exists.
    pub total_weight: f64,
    pub predicted_observable: bool,
    pub logical_failure: bool,
    pub predecode_cycles: u64,
    pub cycles_total: u64,
    pub aborted: bool,
}

/// Serialized form of a [`DecodeOutcome`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub pairs: Vec<(usize, usize)>,
    pub boundary: Vec<usize>,
    pub weight: Option<f64>,
    pub failure: bool,
    pub cycles_total: u64,
    pub aborted: bool,
}

impl DecodeOutcome {
    /// Every matched pair, prematches first.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.prematches.iter().map(|p| (p.a, p.b)).collect();
        if let Some(m) = &self.matching {
            out.extend(m.pairs.iter().copied());
        }
        out
    }

    pub fn boundary_matches(&self) -> &[usize] {
        self.matching.as_ref().map_or(&[], |m| &m.boundary_matches)
    }

    pub fn record(&self) -> DecodeRecord {
        DecodeRecord {
            pairs: self.pairs(),
            boundary: self.boundary_matches().to_vec(),
            weight: self.total_weight.is_finite().then_some(self.total_weight),
            failure: self.logical_failure,
            cycles_total: self.cycles_total,
            aborted: self.aborted,
        }
    }
}

/// Parity of observable-flipping edges in `edges`.
pub fn observable_parity(graph: &DetectorGraph, edges: &[usize]) -> bool {
    edges.iter().filter(|&&e| graph.edge(e).flips_observable).count() % 2 == 1
}

/// Brute-force main decoder with its latency model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MainDecoder {
    pub config: MatchConfig,
    pub timing: TimingModel,
}

impl MainDecoder {
    pub fn new(config: MatchConfig, timing: TimingModel) -> Self {
        Self { config, timing }
    }

    pub fn decode(
        &self,
        graph: &DetectorGraph,
        table: &PathTable,
        syndrome: &Syndrome,
        predecode: Option<&PredecodeResult>,
    ) -> Result<DecodeOutcome> {
        syndrome.validate(graph)?;
        let Some(pre) = predecode else {
            let m = brute_force_mwpm(graph, table, &syndrome.flipped, &self.config)?;
            let predicted = observable_parity(graph, &m.correction_edges);
            return Ok(DecodeOutcome {
                prematches: Vec::new(),
                correction_edges: m.correction_edges.clone(),
                total_weight: m.total_weight,
                predicted_observable: predicted,
                logical_failure: predicted != syndrome.true_observable,
                predecode_cycles: 0,
                cycles_total: self.timing.main_cycles(syndrome.hamming_weight()),
                aborted: false,
                matching: Some(m),
            });
        };

        let residual = &pre.residual.flipped;
        let matching = match brute_force_mwpm(graph, table, residual, &self.config) {
            Ok(m) => Some(m),
            Err(Error::HammingWeightCap { .. }) if pre.aborted => None,
            Err(e) => return Err(e),
        };
        let mut edges = pre.correction_edges();
        let mut total_weight = pre.weight();
        match &matching {
            Some(m) => {
                edges.extend(m.correction_edges.iter().copied());
                total_weight += m.total_weight;
            }
            None => total_weight = f64::INFINITY,
        }
        let correction_edges = parity_reduce(edges);
        let predicted = observable_parity(graph, &correction_edges);
        Ok(DecodeOutcome {
            prematches: pre.prematches.clone(),
            matching,
            correction_edges,
            total_weight,
            predicted_observable: predicted,
            logical_failure: pre.aborted || predicted != syndrome.true_observable,
            predecode_cycles: pre.cycles,
            cycles_total: pre.cycles.saturating_add(self.timing.main_cycles(residual.len())),
            aborted: pre.aborted,
        })
    }
}
