//! Reference decoders: exact full-syndrome matching, a greedy predecoder
//! without singleton avoidance, and matched-chain statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{DetectorGraph, PathTable};
use crate::matching::{DecodeOutcome, MainDecoder, MatchConfig};
use crate::noise::Syndrome;
use crate::predecoder::{self, Policy, PredecodeResult, PromatchConfig, TimingModel};

/// Label used for the greedy baseline in reports.
pub const GREEDY_LABEL: &str = "greedy-nosafety";

pub fn oracle_decoder() -> MainDecoder {
    MainDecoder::new(MatchConfig::ORACLE, TimingModel::default())
}

/// Exact matching on the whole syndrome (HW up to 14), no predecoding.
pub fn oracle_mwpm(graph: &DetectorGraph, table: &PathTable, syndrome: &Syndrome) -> Result<DecodeOutcome> {
    oracle_decoder().decode(graph, table, syndrome, None)
}

/// Isolated pairs first, then repeatedly the lowest-weight subgraph edge
/// regardless of the singletons it leaves. Uses the Promatch stopping rule
/// and cycle accounting; running out of edges before the stopping rule is
/// met counts as an abort.
pub fn greedy_baseline(
    graph: &DetectorGraph,
    table: &PathTable,
    syndrome: &Syndrome,
    cfg: &PromatchConfig,
) -> Result<PredecodeResult> {
    predecoder::run(graph, table, syndrome, cfg, Policy::Greedy)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainBin {
    pub hops: u16,
    pub count: u64,
    pub frequency: f64,
}

/// Counts of matched-chain hop lengths under the oracle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainHistogram {
    counts: BTreeMap<u16, u64>,
}

impl ChainHistogram {
    pub fn add(&mut self, hops: u16) {
        *self.counts.entry(hops).or_default() += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (h, c) in other.counts {
            *self.counts.entry(h).or_default() += c;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, hops: u16) -> u64 {
        self.counts.get(&hops).copied().unwrap_or(0)
    }

    pub fn fraction(&self, hops: u16) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.count(hops) as f64 / t as f64,
        }
    }

    pub fn bins(&self) -> Vec<ChainBin> {
        let total = self.total() as f64;
        self.counts.iter().map(|(&hops, &count)| ChainBin { hops, count, frequency: count as f64 / total }).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for bin in self.bins() {
            w.serialize(bin)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Hop length of every oracle-matched pair (boundary matches use the
/// node-to-boundary hop count) over all `syndromes`.
pub fn chain_length_histogram(
    graph: &DetectorGraph,
    table: &PathTable,
    syndromes: &[Syndrome],
) -> Result<ChainHistogram> {
    let mut hist = ChainHistogram::default();
    for s in syndromes {
        add_chains_to(&mut hist, graph, table, s)?;
    }
    Ok(hist)
}

/// Adds the oracle chain lengths of one syndrome to `hist`.
pub fn add_chains_to(
    hist: &mut ChainHistogram,
    graph: &DetectorGraph,
    table: &PathTable,
    syndrome: &Syndrome,
) -> Result<()> {
    let out = oracle_mwpm(graph, table, syndrome)?;
    if let Some(m) = &out.matching {
        for &(a, b) in &m.pairs {
            hist.add(table.hops(a, b));
        }
        for &a in &m.boundary_matches {
            hist.add(table.boundary_hops(a));
        }
    }
    Ok(())
}
