//! Error injection on decoding-graph edges and syndrome extraction.
//!
//! All sampling uses [`ChaCha8Rng`], which produces the same stream on every
//! platform for a given 64-bit seed. Per-trial seeds are derived with
//! [`trial_seed`] (a SplitMix64 mix of the master seed and the trial index),
//! so trials can run in any order or in parallel and still reproduce.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::graph::DetectorGraph;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Edges that suffered an error. Sorted, distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ErrorSet(Vec<usize>);

impl ErrorSet {
    pub fn new(mut edge_ids: Vec<usize>) -> Self {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        Self(edge_ids)
    }

    pub fn edges(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symmetric difference with another edge list (which may repeat ids).
    pub fn symmetric_difference(&self, other: &[usize]) -> ErrorSet {
        ErrorSet(parity_reduce(self.0.iter().chain(other).copied().collect()))
    }
}

/// Sorts and keeps the ids that occur an odd number of times.
pub fn parity_reduce(mut ids: Vec<usize>) -> Vec<usize> {
    ids.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(ids.len());
    for id in ids {
        if out.last() == Some(&id) {
            out.pop();
        } else {
            out.push(id);
        }
    }
    out
}

/// Flipped detectors plus, in simulation, the true observable parity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    pub flipped: Vec<usize>,
    #[serde(rename = "obs", with = "bit")]
    pub true_observable: bool,
}

impl Syndrome {
    pub fn new(mut flipped: Vec<usize>, true_observable: bool) -> Self {
        flipped.sort_unstable();
        flipped.dedup();
        Self { flipped, true_observable }
    }

    pub fn hamming_weight(&self) -> usize {
        self.flipped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty()
    }

    /// Checks every flipped id is a detector (never the boundary) and the
    /// list is strictly increasing.
    pub fn validate(&self, graph: &DetectorGraph) -> Result<()> {
        if let Some(&bad) = self.flipped.iter().find(|&&d| d >= graph.num_detectors()) {
            return Err(Error::UnknownNode(bad));
        }
        if self.flipped.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("flipped detectors must be sorted and distinct".into()));
        }
        Ok(())
    }
}

mod bit {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("observable bit must be 0 or 1, got {other}"))),
        }
    }
}

/// One line of a replayable corpus: `{"errors":[..],"flipped":[..],"obs":0|1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    #[serde(default)]
    pub errors: ErrorSet,
    #[serde(flatten)]
    pub syndrome: Syndrome,
}

/// Independently flips every edge with its own probability, or with
/// `p_override` when given.
pub fn sample_iid(graph: &DetectorGraph, p_override: Option<f64>, rng: &mut impl Rng) -> Result<ErrorSet> {
    if let Some(p) = p_override {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if p == 0.0 {
            return Ok(ErrorSet::default());
        }
    }
    let mut out = Vec::new();
    for e in graph.edges() {
        let p = p_override.unwrap_or(e.probability);
        if rng.random::<f64>() < p {
            out.push(e.id);
        }
    }
    Ok(ErrorSet(out))
}

/// Exactly `k` distinct edges, uniformly at random.
pub fn inject_k_errors(graph: &DetectorGraph, k: usize, rng: &mut impl Rng) -> Result<ErrorSet> {
    let n = graph.num_edges();
    if k > n {
        return Err(Error::TooManyErrors { k, edges: n });
    }
    Ok(ErrorSet::new(index::sample(rng, n, k).into_vec()))
}

/// A detector fires iff an odd number of its incident edges erred.
pub fn syndrome_from_errors(graph: &DetectorGraph, errors: &ErrorSet) -> Result<Syndrome> {
    let mut parity = vec![false; graph.num_detectors() + 1];
    let mut obs = false;
    for &id in errors.edges() {
        if id >= graph.num_edges() {
            return Err(Error::UnknownEdge(id));
        }
        let e = graph.edge(id);
        parity[e.u] ^= true;
        parity[e.v] ^= true;
        obs ^= e.flips_observable;
    }
    let flipped = (0..graph.num_detectors()).filter(|&d| parity[d]).collect();
    Ok(Syndrome { flipped, true_observable: obs })
}

/// Natural log of the binomial pmf `C(n,k) p^k (1-p)^(n-k)`.
pub fn ln_occurrence_probability(k: usize, n: usize, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (kf, nf) = (k as f64, n as f64);
    let term = |count: f64, q: f64| if count == 0.0 { 0.0 } else { count * q.ln() };
    ln_binomial(n as u64, k as u64) + term(kf, p) + term(nf - kf, 1.0 - p)
}

/// Probability that exactly `k` of `n` independent edges err.
pub fn occurrence_probability(k: usize, n: usize, p: f64) -> f64 {
    ln_occurrence_probability(k, n, p).exp()
}

/// `sum_{k > k_max} P_o(k)`, summed term by term in log space so that tiny
/// tails are not lost to cancellation.
pub fn truncation_bound(k_max: usize, n: usize, p: f64) -> f64 {
    let mut total = 0.0;
    for k in (k_max + 1)..=n {
        let term = occurrence_probability(k, n, p);
        total += term;
        // Tail terms decrease monotonically past the mode.
        if term < total * 1e-18 && (k as f64) > n as f64 * p {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3() -> DetectorGraph {
        DetectorGraph::build(3, 3, 0.01).unwrap()
    }

    #[test]
    fn zero_override_is_empty() {
        let g = d3();
        let mut rng = rng_from_seed(1);
        assert!(sample_iid(&g, Some(0.0), &mut rng).unwrap().is_empty());
        assert!(sample_iid(&g, Some(1.0), &mut rng).is_err());
    }

    #[test]
    fn iid_mean_within_three_sigma() {
        let g = d3();
        let n = g.num_edges() as f64;
        let shots = 100_000;
        let mut rng = rng_from_seed(7);
        let total: usize = (0..shots).map(|_| sample_iid(&g, None, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / shots as f64;
        let sigma = (n * 0.01 * 0.99 / shots as f64).sqrt();
        assert!((mean - n * 0.01).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn inject_k_bounds() {
        let g = d3();
        let mut rng = rng_from_seed(3);
        assert!(inject_k_errors(&g, 0, &mut rng).unwrap().is_empty());
        let all = inject_k_errors(&g, g.num_edges(), &mut rng).unwrap();
        assert_eq!(all.edges(), (0..g.num_edges()).collect::<Vec<_>>().as_slice());
        assert_eq!(
            inject_k_errors(&g, g.num_edges() + 1, &mut rng).unwrap_err(),
            Error::TooManyErrors { k: g.num_edges() + 1, edges: g.num_edges() }
        );
    }

    #[test]
    fn single_injection_is_uniform() {
        let g = d3();
        let n = g.num_edges();
        let draws = 100_000;
        let mut counts = vec![0usize; n];
        let mut rng = rng_from_seed(11);
        for _ in 0..draws {
            counts[inject_k_errors(&g, 1, &mut rng).unwrap().edges()[0]] += 1;
        }
        let q = 1.0 / n as f64;
        let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * q).abs() < 4.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn syndrome_parity_rules() {
        let g = d3();
        let internal = g.edges().iter().find(|e| !g.is_boundary(e.v)).unwrap();
        let s = syndrome_from_errors(&g, &ErrorSet::new(vec![internal.id])).unwrap();
        assert_eq!(s.flipped, vec![internal.u, internal.v]);

        let boundary = g.edges().iter().find(|e| g.is_boundary(e.v)).unwrap();
        let s = syndrome_from_errors(&g, &ErrorSet::new(vec![boundary.id])).unwrap();
        assert_eq!(s.flipped, vec![boundary.u]);

        // Two errors sharing a detector cancel there.
        let a = g.edges().iter().find(|e| !g.is_boundary(e.v)).unwrap();
        let b = g.edges().iter().find(|e| e.id != a.id && !g.is_boundary(e.v) && (e.u == a.v || e.v == a.v)).unwrap();
        let s = syndrome_from_errors(&g, &ErrorSet::new(vec![a.id, b.id])).unwrap();
        assert_eq!(s.hamming_weight(), 2);
        assert!(!s.flipped.contains(&a.v));
    }

    #[test]
    fn occurrence_probability_closed_forms() {
        let (n, p) = (35, 0.01);
        assert!((occurrence_probability(0, n, p) - 0.99f64.powi(35)).abs() < 1e-14);
        assert!((occurrence_probability(1, n, p) - 35.0 * 0.01 * 0.99f64.powi(34)).abs() < 1e-14);
        let total: f64 = (0..=n).map(|k| occurrence_probability(k, n, p)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_tail_is_negligible_at_k24() {
        assert!(truncation_bound(24, 10_000, 1e-4) < 1e-12);
        let direct: f64 = (25..=35).map(|k| occurrence_probability(k, 35, 0.2)).sum();
        assert!((truncation_bound(24, 35, 0.2) - direct).abs() < 1e-15);
    }

    #[test]
    fn corpus_line_format() {
        let rec = CorpusRecord { errors: ErrorSet::new(vec![4, 1]), syndrome: Syndrome::new(vec![3, 0], true) };
        let line = serde_json::to_string(&rec).unwrap();
        assert_eq!(line, r#"{"errors":[1,4],"flipped":[0,3],"obs":1}"#);
        let back: CorpusRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(0, 0), trial_seed(0, 1));
        assert_ne!(trial_seed(0, 1), trial_seed(1, 0));
        assert_eq!(trial_seed(42, 9), trial_seed(42, 9));
    }
}
