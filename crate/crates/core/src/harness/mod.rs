//! Experiment runner: decoder chains, direct and stratified LER estimation,
//! and high-Hamming-weight corpora for the predecoder reports.
//!
//! Every trial draws from its own ChaCha8 stream seeded by
//! [`trial_seed`]; results are collected in trial order and reduced
//! serially, so parallel runs are bit-identical to serial ones.

mod reports;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DetectorGraph, PathTable};
use crate::matching::{MainDecoder, MatchConfig};
use crate::noise::{
    inject_k_errors, occurrence_probability, rng_from_seed, sample_iid, syndrome_from_errors, trial_seed,
    truncation_bound, Syndrome,
};
use crate::oracle::greedy_baseline;
use crate::predecoder::{promatch, HwTarget, PredecodeResult, PromatchConfig, Step, TimingModel};
use crate::LOW_HW_LIMIT;

pub use reports::{
    hw_distribution, latency_report, step_usage, write_csv_rows, HwDistribution, HwRow, LatencyReport, StepRow,
    StepUsage,
};

/// Version of the JSON result envelope.
pub const SCHEMA_VERSION: u32 = 1;

/// Smallest injected error count that can exceed Hamming weight 10.
pub const HIGH_HW_MIN_K: usize = LOW_HW_LIMIT / 2 + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredecoderKind {
    Promatch,
    Greedy,
    None,
}

impl PredecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            PredecoderKind::Promatch => "promatch",
            PredecoderKind::Greedy => crate::oracle::GREEDY_LABEL,
            PredecoderKind::None => "none",
        }
    }
}

impl FromStr for PredecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "promatch" => Ok(Self::Promatch),
            "greedy" | "greedy-nosafety" => Ok(Self::Greedy),
            "none" => Ok(Self::None),
            _ => Err(Error::Config(format!("unknown predecoder '{s}'"))),
        }
    }
}

impl fmt::Display for PredecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MainKind {
    /// Exhaustive matching capped at Hamming weight 10.
    Astrea,
    /// Exhaustive matching capped at Hamming weight 14.
    Oracle,
}

impl FromStr for MainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "astrea" => Ok(Self::Astrea),
            "oracle" => Ok(Self::Oracle),
            _ => Err(Error::Config(format!("unknown main decoder '{s}'"))),
        }
    }
}

impl fmt::Display for MainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MainKind::Astrea => "astrea",
            MainKind::Oracle => "oracle",
        })
    }
}

/// How samples in a high-HW corpus are weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every sample counts once.
    Uniform,
    /// A sample with k injected errors counts `P_o(k) / shots_per_k`.
    Occurrence,
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "occurrence" => Ok(Self::Occurrence),
            _ => Err(Error::Config(format!("unknown weighting '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub distance: usize,
    /// Defaults to `distance` when `None`.
    pub rounds: Option<usize>,
    /// Physical error probability per graph edge. Zero is allowed for
    /// sampling; graph weights then use [`ExperimentConfig::FALLBACK_WEIGHT_P`].
    pub p: f64,
    pub predecoder: PredecoderKind,
    pub main: MainKind,
    pub hw_target: HwTarget,
    pub budget_ns: f64,
    pub clock_mhz: f64,
    /// Clipped to the number of graph edges.
    pub k_max: usize,
    pub shots_per_k: u64,
    pub shots_direct: u64,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let timing = TimingModel::default();
        Self {
            distance: 5,
            rounds: None,
            p: 1e-3,
            predecoder: PredecoderKind::Promatch,
            main: MainKind::Astrea,
            hw_target: HwTarget::default(),
            budget_ns: timing.budget_ns,
            clock_mhz: timing.clock_mhz,
            k_max: 24,
            shots_per_k: 100_000,
            shots_direct: 100_000,
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    /// Graph weight probability used when `p` is zero. Weights are uniform,
    /// so the value does not change any matching decision.
    pub const FALLBACK_WEIGHT_P: f64 = 1e-3;

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.distance)
    }

    pub fn timing(&self) -> TimingModel {
        TimingModel { clock_mhz: self.clock_mhz, budget_ns: self.budget_ns, ..TimingModel::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::InvalidProbability(self.p));
        }
        if self.distance < 3 || self.distance.is_multiple_of(2) {
            return Err(Error::InvalidDistance(self.distance));
        }
        if self.rounds() == 0 {
            return Err(Error::InvalidRounds(0));
        }
        if !(self.budget_ns > 0.0 && self.budget_ns.is_finite()) {
            return Err(Error::Config(format!("budget_ns must be positive, got {}", self.budget_ns)));
        }
        if !(self.clock_mhz > 0.0 && self.clock_mhz.is_finite()) {
            return Err(Error::Config(format!("clock_mhz must be positive, got {}", self.clock_mhz)));
        }
        if self.shots_per_k == 0 || self.shots_direct == 0 {
            return Err(Error::Config("shot counts must be positive".into()));
        }
        self.hw_target.validate()
    }
}

/// Predecoder (applied only above Hamming weight 10) plus main decoder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderChain {
    pub predecoder: PredecoderKind,
    pub promatch: PromatchConfig,
    pub main: MainDecoder,
}

impl DecoderChain {
    pub fn new(predecoder: PredecoderKind, main: MainKind, promatch: PromatchConfig) -> Self {
        let config = match main {
            MainKind::Astrea => MatchConfig::ASTREA,
            MainKind::Oracle => MatchConfig::ORACLE,
        };
        Self { predecoder, promatch, main: MainDecoder::new(config, promatch.timing) }
    }

    /// Predecoder output, or `None` when the syndrome goes straight to the
    /// main decoder.
    pub fn predecode(
        &self,
        graph: &DetectorGraph,
        table: &PathTable,
        syndrome: &Syndrome,
    ) -> Result<Option<PredecodeResult>> {
        if syndrome.hamming_weight() <= LOW_HW_LIMIT {
            return Ok(None);
        }
        match self.predecoder {
            PredecoderKind::Promatch => promatch(graph, table, syndrome, &self.promatch).map(Some),
            PredecoderKind::Greedy => greedy_baseline(graph, table, syndrome, &self.promatch).map(Some),
            PredecoderKind::None => Ok(None),
        }
    }

    /// Full decode. A residual above the main decoder's cap is reported
    /// as a logical failure rather than an error.
    pub fn trial(&self, graph: &DetectorGraph, table: &PathTable, syndrome: &Syndrome) -> Result<Trial> {
        let pre = self.predecode(graph, table, syndrome)?;
        let post_hw = pre.as_ref().map_or(syndrome.hamming_weight(), |r| r.residual.hamming_weight());
        let base = Trial {
            pre_hw: syndrome.hamming_weight(),
            post_hw,
            aborted: pre.as_ref().is_some_and(|r| r.aborted),
            deepest_step: pre.as_ref().and_then(PredecodeResult::deepest_step),
            predecode_cycles: pre.as_ref().map_or(0, |r| r.cycles),
            total_cycles: 0,
            weight: f64::INFINITY,
            failure: true,
            over_cap: false,
        };
        match self.main.decode(graph, table, syndrome, pre.as_ref()) {
            Ok(out) => Ok(Trial {
                total_cycles: out.cycles_total,
                weight: out.total_weight,
                failure: out.logical_failure,
                ..base
            }),
            Err(Error::HammingWeightCap { .. }) => Ok(Trial {
                total_cycles: base.predecode_cycles.saturating_add(self.main.timing.main_cycles(post_hw)),
                over_cap: true,
                ..base
            }),
            Err(e) => Err(e),
        }
    }
}

/// Summary of one decoded syndrome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub pre_hw: usize,
    pub post_hw: usize,
    pub aborted: bool,
    pub deepest_step: Option<Step>,
    pub predecode_cycles: u64,
    pub total_cycles: u64,
    /// Combined correction weight; infinite when no correction was produced.
    pub weight: f64,
    pub failure: bool,
    /// The residual exceeded the main decoder's Hamming-weight cap.
    pub over_cap: bool,
}

/// Anything that can decide whether a syndrome is decoded wrongly.
pub trait TrialDecoder: Sync {
    fn fails(&self, graph: &DetectorGraph, table: &PathTable, syndrome: &Syndrome) -> Result<bool>;
}

impl TrialDecoder for DecoderChain {
    fn fails(&self, graph: &DetectorGraph, table: &PathTable, syndrome: &Syndrome) -> Result<bool> {
        Ok(self.trial(graph, table, syndrome)?.failure)
    }
}

/// Graph, path table and decoder chain for one configuration.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub graph: DetectorGraph,
    pub table: PathTable,
    pub chain: DecoderChain,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let weight_p = if config.p > 0.0 { config.p } else { ExperimentConfig::FALLBACK_WEIGHT_P };
        let graph = DetectorGraph::build(config.distance, config.rounds(), weight_p)?;
        let table = PathTable::build(&graph);
        let pcfg = PromatchConfig { hw_target: config.hw_target, timing: config.timing() };
        let chain = DecoderChain::new(config.predecoder, config.main, pcfg);
        Ok(Self { config, graph, table, chain })
    }

    pub fn k_max(&self) -> usize {
        self.config.k_max.min(self.graph.num_edges())
    }

    fn k_seed(&self, k: usize) -> u64 {
        trial_seed(self.config.master_seed, k as u64)
    }

    /// Syndrome of the `s`-th injection of exactly `k` errors.
    pub fn injected(&self, k: usize, s: u64) -> Result<Syndrome> {
        let mut rng = rng_from_seed(trial_seed(self.k_seed(k), s));
        syndrome_from_errors(&self.graph, &inject_k_errors(&self.graph, k, &mut rng)?)
    }

    /// Syndrome of the `i`-th i.i.d. memory-experiment shot.
    pub fn sampled(&self, i: u64) -> Result<Syndrome> {
        let mut rng = rng_from_seed(trial_seed(self.config.master_seed ^ DIRECT_STREAM, i));
        syndrome_from_errors(&self.graph, &sample_iid(&self.graph, Some(self.config.p), &mut rng)?)
    }

    pub fn run_direct(&self) -> Result<LerEstimate> {
        run_direct(self, &self.chain)
    }

    pub fn run_rare_event(&self) -> Result<LerEstimate> {
        run_rare_event(self, &self.chain)
    }

    /// Injected syndromes with Hamming weight above 10, for
    /// `k = 6..=k_max` and `shots_per_k` injections per k.
    pub fn high_hw_corpus(&self, weighting: Weighting) -> Result<Vec<Sample>> {
        let shots = self.config.shots_per_k;
        let jobs: Vec<(usize, u64)> =
            (HIGH_HW_MIN_K..=self.k_max()).flat_map(|k| (0..shots).map(move |s| (k, s))).collect();
        let drawn: Vec<Option<Sample>> = jobs
            .par_iter()
            .map(|&(k, s)| {
                let syndrome = self.injected(k, s)?;
                if syndrome.hamming_weight() <= LOW_HW_LIMIT {
                    return Ok(None);
                }
                let weight = match weighting {
                    Weighting::Uniform => 1.0,
                    Weighting::Occurrence => {
                        occurrence_probability(k, self.graph.num_edges(), self.config.p) / shots as f64
                    }
                };
                Ok(Some(Sample { k, syndrome, weight }))
            })
            .collect::<Result<_>>()?;
        Ok(drawn.into_iter().flatten().collect())
    }

    /// Decodes every sample in order.
    pub fn decode_corpus(&self, samples: &[Sample]) -> Result<Vec<Trial>> {
        samples.par_iter().map(|s| self.chain.trial(&self.graph, &self.table, &s.syndrome)).collect()
    }
}

const DIRECT_STREAM: u64 = 0xD1EC_7000_0000_0000;

/// A corpus syndrome with the number of injected errors and its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub k: usize,
    pub syndrome: Syndrome,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStat {
    pub k: usize,
    pub p_o: f64,
    pub p_f: f64,
    pub failures: u64,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LerEstimate {
    pub ler: f64,
    pub stderr: f64,
    pub failures: u64,
    pub shots: u64,
    /// Per-k strata; empty for direct estimates.
    pub per_k: Vec<KStat>,
    /// Occurrence mass beyond `k_max` that the stratified sum ignores.
    pub truncation_bound: Option<f64>,
}

impl LerEstimate {
    /// `Σ_k P_o(k) P_f(k)` recomputed from the strata.
    pub fn recombined(&self) -> f64 {
        self.per_k.iter().map(|s| s.p_o * s.p_f).sum()
    }
}

fn count_failures<F>(n: u64, fail: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    (0..n).into_par_iter().map(|i| fail(i).map(u64::from)).try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Failure fraction over `shots_direct` i.i.d. shots with its binomial
/// standard error.
pub fn run_direct<D: TrialDecoder>(exp: &Experiment, decoder: &D) -> Result<LerEstimate> {
    let shots = exp.config.shots_direct;
    let failures = count_failures(shots, |i| {
        let s = exp.sampled(i)?;
        if s.is_empty() {
            return Ok(false);
        }
        decoder.fails(&exp.graph, &exp.table, &s)
    })?;
    let ler = failures as f64 / shots as f64;
    Ok(LerEstimate {
        ler,
        stderr: (ler * (1.0 - ler) / shots as f64).sqrt(),
        failures,
        shots,
        per_k: Vec::new(),
        truncation_bound: None,
    })
}

/// Stratified estimate `Σ_{k ≤ k_max} P_o(k) P_f(k)` with `P_f(0) = 0` and
/// `shots_per_k` injections for each `k ≥ 1`.
pub fn run_rare_event<D: TrialDecoder>(exp: &Experiment, decoder: &D) -> Result<LerEstimate> {
    let n = exp.graph.num_edges();
    let p = exp.config.p;
    let shots = exp.config.shots_per_k;
    let k_max = exp.k_max();
    let mut per_k = vec![KStat { k: 0, p_o: occurrence_probability(0, n, p), p_f: 0.0, failures: 0, shots: 0 }];
    for k in 1..=k_max {
        let failures = count_failures(shots, |s| decoder.fails(&exp.graph, &exp.table, &exp.injected(k, s)?))?;
        let p_f = failures as f64 / shots as f64;
        per_k.push(KStat { k, p_o: occurrence_probability(k, n, p), p_f, failures, shots });
    }
    let ler = per_k.iter().map(|s| s.p_o * s.p_f).sum();
    let var: f64 = per_k
        .iter()
        .filter(|s| s.shots > 0)
        .map(|s| s.p_o * s.p_o * s.p_f * (1.0 - s.p_f) / s.shots as f64)
        .sum();
    Ok(LerEstimate {
        ler,
        stderr: var.sqrt(),
        failures: per_k.iter().map(|s| s.failures).sum(),
        shots: per_k.iter().map(|s| s.shots).sum(),
        per_k,
        truncation_bound: Some(truncation_bound(k_max, n, p)),
    })
}
