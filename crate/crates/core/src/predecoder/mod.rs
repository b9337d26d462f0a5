//! The Promatch predecoder.
//!
//! Each round scans the decoding subgraph once: every isolated pair is
//! prematched at once (Step 1), then at most one further pair is chosen by
//! the priority S2.1 > S2.2 > S3 > S4.1 > S4.2. Rounds repeat until the
//! residual Hamming weight and the modeled main-decoder latency both fit.

mod steps;
mod subgraph;
mod timing;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DetectorGraph, PathTable};
use crate::noise::{parity_reduce, Syndrome};

pub use steps::{
    creates_singleton_by_counters, match_isolated_pairs, scan_candidates, step3_singleton_path, Candidate,
    CandidateRegisters, SingletonSearch,
};
pub use subgraph::{DecodingSubgraph, SubEdge};
pub use timing::{astrea_matchings, TimingModel, DEFAULT_CYCLES_PER_MATCHING};

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    S1,
    S2_1,
    S2_2,
    S3,
    S4_1,
    S4_2,
    /// Lowest-weight edge with no singleton check (greedy baseline).
    #[serde(rename = "GREEDY")]
    Greedy,
}

impl Step {
    pub const ALL: [Step; 7] = [Step::S1, Step::S2_1, Step::S2_2, Step::S3, Step::S4_1, Step::S4_2, Step::Greedy];

    pub fn label(self) -> &'static str {
        match self {
            Step::S1 => "S1",
            Step::S2_1 => "S2_1",
            Step::S2_2 => "S2_2",
            Step::S3 => "S3",
            Step::S4_1 => "S4_1",
            Step::S4_2 => "S4_2",
            Step::Greedy => "GREEDY",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One predecoded pair with the edges that correct it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prematch {
    pub a: usize,
    pub b: usize,
    pub step: Step,
    pub weight: f64,
    #[serde(rename = "edges")]
    pub correction_edges: Vec<usize>,
}

impl Prematch {
    /// Endpoints are stored in ascending order.
    pub fn new(a: usize, b: usize, step: Step, correction_edges: Vec<usize>, weight: f64) -> Self {
        Self { a: a.min(b), b: a.max(b), step, weight, correction_edges }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredecodeResult {
    pub prematches: Vec<Prematch>,
    pub residual: Syndrome,
    pub cycles: u64,
    pub aborted: bool,
    pub rounds_executed: usize,
}

/// Serialized form of a [`PredecodeResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredecodeRecord {
    pub prematches: Vec<Prematch>,
    pub residual: Vec<usize>,
    pub cycles: u64,
    pub aborted: bool,
}

impl PredecodeResult {
    /// Result for a syndrome handed to the main decoder untouched.
    pub fn passthrough(syndrome: &Syndrome) -> Self {
        Self { prematches: Vec::new(), residual: syndrome.clone(), cycles: 0, aborted: false, rounds_executed: 0 }
    }

    /// Highest-priority-number step used, `None` when nothing was prematched.
    pub fn deepest_step(&self) -> Option<Step> {
        self.prematches.iter().map(|p| p.step).max()
    }

    pub fn weight(&self) -> f64 {
        self.prematches.iter().map(|p| p.weight).sum()
    }

    /// Parity-reduced union of all prematch corrections.
    pub fn correction_edges(&self) -> Vec<usize> {
        parity_reduce(self.prematches.iter().flat_map(|p| p.correction_edges.iter().copied()).collect())
    }

    pub fn record(&self) -> PredecodeRecord {
        PredecodeRecord {
            prematches: self.prematches.clone(),
            residual: self.residual.flipped.clone(),
            cycles: self.cycles,
            aborted: self.aborted,
        }
    }
}

/// Residual Hamming-weight goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HwTarget {
    /// Predecode until the residual weight is at most `n` and the main
    /// decoder fits the remaining budget, prematching further if it does not.
    Fixed(usize),
    /// Try 10, then 8, then 6, abort if 6 still does not fit.
    Adaptive,
}

impl Default for HwTarget {
    fn default() -> Self {
        HwTarget::Fixed(crate::LOW_HW_LIMIT)
    }
}

impl HwTarget {
    pub const ADAPTIVE_STEPS: [usize; 3] = [10, 8, 6];

    /// Largest residual weight a successful predecode can leave.
    pub fn ceiling(self) -> usize {
        match self {
            HwTarget::Fixed(n) => n,
            HwTarget::Adaptive => Self::ADAPTIVE_STEPS[0],
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            HwTarget::Fixed(n) if n > crate::LOW_HW_LIMIT => {
                Err(Error::Config(format!("hw target {n} exceeds {}", crate::LOW_HW_LIMIT)))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for HwTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HwTarget::Fixed(n) => write!(f, "{n}"),
            HwTarget::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl FromStr for HwTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = if s.eq_ignore_ascii_case("adaptive") {
            HwTarget::Adaptive
        } else {
            HwTarget::Fixed(s.parse().map_err(|_| Error::Config(format!("bad hw target '{s}'")))?)
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PromatchConfig {
    pub hw_target: HwTarget,
    pub timing: TimingModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Check {
    Done,
    Continue,
    Abort,
}

/// Stopping rule: residual weight at or below the current target and
/// enough budget left for the main decoder.
struct Schedule {
    target: HwTarget,
    timing: TimingModel,
    idx: usize,
}

impl Schedule {
    fn new(cfg: &PromatchConfig) -> Self {
        Self { target: cfg.hw_target, timing: cfg.timing, idx: 0 }
    }

    fn current(&self) -> usize {
        match self.target {
            HwTarget::Fixed(n) => n,
            HwTarget::Adaptive => HwTarget::ADAPTIVE_STEPS[self.idx],
        }
    }

    fn check(&mut self, hw: usize, cycles: u64) -> Check {
        loop {
            if hw > self.current() {
                return Check::Continue;
            }
            if self.timing.fits(cycles.saturating_add(self.timing.main_cycles(hw))) {
                return Check::Done;
            }
            match self.target {
                HwTarget::Fixed(_) => return Check::Continue,
                HwTarget::Adaptive if self.idx + 1 < HwTarget::ADAPTIVE_STEPS.len() => self.idx += 1,
                HwTarget::Adaptive => return Check::Abort,
            }
        }
    }
}

/// The pair chosen in one round plus the Step 3 path count it cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub prematch: Option<Prematch>,
    pub paths_examined: usize,
}

/// Stepwise access to the predecoder's working state.
pub struct PromatchState<'a> {
    graph: &'a DetectorGraph,
    table: &'a PathTable,
    sub: DecodingSubgraph,
}

impl<'a> PromatchState<'a> {
    pub fn new(graph: &'a DetectorGraph, table: &'a PathTable, syndrome: &Syndrome) -> Result<Self> {
        Ok(Self { graph, table, sub: DecodingSubgraph::build(graph, syndrome)? })
    }

    pub fn subgraph(&self) -> &DecodingSubgraph {
        &self.sub
    }

    pub fn match_isolated_pairs(&mut self) -> Vec<Prematch> {
        match_isolated_pairs(&mut self.sub)
    }

    /// Promatch choice for the current subgraph; does not modify it.
    pub fn select(&self) -> Result<Selection> {
        let regs = scan_candidates(&self.sub);
        let edge = |c: Candidate, step| Prematch::new(c.a, c.b, step, vec![c.edge], c.weight);
        if let Some(c) = regs.s2_1 {
            return Ok(Selection { prematch: Some(edge(c, Step::S2_1)), paths_examined: 0 });
        }
        if let Some(c) = regs.s2_2 {
            return Ok(Selection { prematch: Some(edge(c, Step::S2_2)), paths_examined: 0 });
        }
        let mut paths = 0;
        if self.sub.singleton_count() > 0 {
            let found = step3_singleton_path(&self.sub, self.graph, self.table)?;
            paths = found.paths_examined;
            if found.prematch.is_some() {
                return Ok(Selection { prematch: found.prematch, paths_examined: paths });
            }
        }
        let fallback = regs.s4_1.map(|c| edge(c, Step::S4_1)).or(regs.s4_2.map(|c| edge(c, Step::S4_2)));
        Ok(Selection { prematch: fallback, paths_examined: paths })
    }

    /// Lowest `(weight, edge id)` live edge, ignoring singleton safety.
    pub fn select_greedy(&self) -> Selection {
        let best = self.sub.active_edges().min_by(|x, y| x.weight.total_cmp(&y.weight).then(x.id.cmp(&y.id)));
        let prematch = best.map(|e| {
            Prematch::new(self.sub.detector(e.a), self.sub.detector(e.b), Step::Greedy, vec![e.id], e.weight)
        });
        Selection { prematch, paths_examined: 0 }
    }

    pub fn apply(&mut self, pm: &Prematch) {
        self.sub.remove_pair(pm.a, pm.b);
    }

    fn residual(&self, true_observable: bool) -> Syndrome {
        Syndrome::new(self.sub.node_ids(), true_observable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Policy {
    Promatch,
    Greedy,
}

/// Runs Promatch on `syndrome`. Aborting is a result state, not an error.
pub fn promatch(
    graph: &DetectorGraph,
    table: &PathTable,
    syndrome: &Syndrome,
    cfg: &PromatchConfig,
) -> Result<PredecodeResult> {
    run(graph, table, syndrome, cfg, Policy::Promatch)
}

pub(crate) fn run(
    graph: &DetectorGraph,
    table: &PathTable,
    syndrome: &Syndrome,
    cfg: &PromatchConfig,
    policy: Policy,
) -> Result<PredecodeResult> {
    cfg.hw_target.validate()?;
    let mut state = PromatchState::new(graph, table, syndrome)?;
    let mut schedule = Schedule::new(cfg);
    let timing = cfg.timing;
    let mut prematches = Vec::new();
    let mut cycles: u64 = 0;
    let mut rounds = 0;

    let aborted = loop {
        match schedule.check(state.sub.hamming_weight(), cycles) {
            Check::Done => break false,
            Check::Abort => break true,
            Check::Continue => {}
        }
        let scan = state.sub.num_edges() as u64;
        cycles += scan;
        rounds += 1;
        if !timing.fits(cycles) {
            break true;
        }

        let isolated = state.match_isolated_pairs();
        if !isolated.is_empty() {
            prematches.extend(isolated);
            match schedule.check(state.sub.hamming_weight(), cycles) {
                Check::Done => break false,
                Check::Abort => break true,
                Check::Continue => {}
            }
        }

        let selection = match policy {
            Policy::Promatch => state.select()?,
            Policy::Greedy => state.select_greedy(),
        };
        let extra = (selection.paths_examined as u64).saturating_sub(scan);
        if extra > 0 {
            cycles += extra;
            if !timing.fits(cycles) {
                break true;
            }
        }
        match selection.prematch {
            Some(pm) => {
                state.apply(&pm);
                prematches.push(pm);
            }
            // Nothing left to prematch: only a final check can still succeed.
            None => break schedule.check(state.sub.hamming_weight(), cycles) != Check::Done,
        }
    };

    Ok(PredecodeResult {
        prematches,
        residual: state.residual(syndrome.true_observable),
        cycles,
        aborted,
        rounds_executed: rounds,
    })
}
