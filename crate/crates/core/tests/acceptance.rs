//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line each and exits nonzero if any fails.

mod common;

use std::time::Instant;

use common::iid_syndromes;
use promatch::harness::{
    latency_report, step_usage, DecoderChain, Experiment, ExperimentConfig, MainKind, PredecoderKind, Sample,
    Trial, Weighting,
};
use promatch::noise::{
    inject_k_errors, occurrence_probability, rng_from_seed, syndrome_from_errors, trial_seed,
};
use promatch::oracle::{chain_length_histogram, oracle_mwpm};
use promatch::predecoder::{PromatchState, Step};
use promatch::{
    brute_force_mwpm, DetectorGraph, MainDecoder, MatchConfig, PathTable, PromatchConfig, Syndrome, TimingModel,
};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn double_factorial(n: u64) -> u64 {
    (1..=n).rev().step_by(2).product()
}

/// Modeled latencies of every non-aborted decode across the suite.
#[derive(Default)]
struct BudgetLog {
    checked: u64,
    violations: u64,
    worst_cycles: u64,
}

impl BudgetLog {
    fn add(&mut self, timing: &TimingModel, aborted: bool, total_cycles: u64) {
        if aborted {
            return;
        }
        self.checked += 1;
        self.worst_cycles = self.worst_cycles.max(total_cycles);
        if !timing.fits(total_cycles) {
            self.violations += 1;
        }
    }

    fn add_trials(&mut self, timing: &TimingModel, trials: &[Trial]) {
        for t in trials {
            self.add(timing, t.aborted, t.total_cycles);
        }
    }
}

fn c1_matching_counts() -> Outcome {
    let g = DetectorGraph::build(5, 5, 1e-3).unwrap();
    let t = PathTable::build(&g);
    let cfg = MatchConfig { boundary: false, ..MatchConfig::ASTREA };
    let start = Instant::now();
    let mut counts = Vec::new();
    let mut ok = true;
    for m in [2usize, 4, 6, 8, 10] {
        let nodes: Vec<usize> = (0..m).map(|k| 5 * k + 1).collect();
        let r = brute_force_mwpm(&g, &t, &nodes, &cfg).unwrap();
        ok &= r.enumerated == double_factorial(m as u64 - 1);
        counts.push(r.enumerated);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= counts[4] == 945 && elapsed < 1.0;
    outcome(ok, format!("counts {counts:?} for m=2..10, {elapsed:.4}s"))
}

fn c2_oracle_equivalence(budget: &mut BudgetLog) -> Outcome {
    let g = DetectorGraph::build(5, 5, 3e-3).unwrap();
    let t = PathTable::build(&g);
    let syndromes = iid_syndromes(&g, 3e-3, 0xC2, 10_000, 10);
    let main = MainDecoder::default();
    let results: Vec<(f64, f64, u64)> = syndromes
        .par_iter()
        .map(|s| {
            let m = main.decode(&g, &t, s, None).unwrap();
            let o = oracle_mwpm(&g, &t, s).unwrap();
            (m.total_weight, o.total_weight, m.cycles_total)
        })
        .collect();
    let mismatches = results.iter().filter(|(a, b, _)| (a - b).abs() > 1e-9).count();
    for r in &results {
        budget.add(&main.timing, false, r.2);
    }
    let max_hw = syndromes.iter().map(Syndrome::hamming_weight).max().unwrap();
    outcome(mismatches == 0, format!("{} syndromes (max HW {max_hw}), {mismatches} weight mismatches", results.len()))
}

/// Syndromes drawn from the i.i.d. model at rate `p` conditioned on
/// `lo <= HW <= hi`: the error count is drawn from the binomial restricted
/// to `k >= k_min`, then `k` distinct edges are injected.
fn conditioned_syndromes(g: &DetectorGraph, p: f64, k_min: usize, lo: usize, hi: usize, count: usize, seed: u64) -> Vec<Syndrome> {
    let n = g.num_edges();
    let pmf: Vec<f64> = (k_min..=n).map(|k| occurrence_probability(k, n, p)).collect();
    let total: f64 = pmf.iter().sum();
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = rng_from_seed(trial_seed(seed, i));
        i += 1;
        let mut u = rng.random::<f64>() * total;
        let mut k = k_min;
        for (offset, &w) in pmf.iter().enumerate() {
            k = k_min + offset;
            if u < w {
                break;
            }
            u -= w;
        }
        let s = syndrome_from_errors(g, &inject_k_errors(g, k, &mut rng).unwrap()).unwrap();
        if (lo..=hi).contains(&s.hamming_weight()) {
            out.push(s);
        }
    }
    out
}

fn c3_near_optimality(budget: &mut BudgetLog) -> Outcome {
    let g = DetectorGraph::build(5, 5, 5e-3).unwrap();
    let t = PathTable::build(&g);
    let syndromes = conditioned_syndromes(&g, 5e-3, 6, 11, 14, 1000, 0xC3);
    let pcfg = PromatchConfig::default();
    let pro = DecoderChain::new(PredecoderKind::Promatch, MainKind::Astrea, pcfg);
    let greedy = DecoderChain::new(PredecoderKind::Greedy, MainKind::Astrea, pcfg);
    let rows: Vec<(f64, Trial, Trial)> = syndromes
        .par_iter()
        .map(|s| {
            let o = oracle_mwpm(&g, &t, s).unwrap().total_weight;
            (o, pro.trial(&g, &t, s).unwrap(), greedy.trial(&g, &t, s).unwrap())
        })
        .collect();
    let eq = |w: f64, o: f64| (w - o).abs() <= 1e-9 * o;
    let below = rows.iter().filter(|(o, p, _)| p.weight < o - 1e-9 * o).count();
    let pro_eq = rows.iter().filter(|(o, p, _)| eq(p.weight, *o)).count();
    let greedy_eq = rows.iter().filter(|(o, _, q)| eq(q.weight, *o)).count();
    let aborted = rows.iter().filter(|(_, p, _)| p.aborted).count();
    let p_trials: Vec<Trial> = rows.iter().map(|r| r.1).collect();
    let g_trials: Vec<Trial> = rows.iter().map(|r| r.2).collect();
    budget.add_trials(&pcfg.timing, &p_trials);
    budget.add_trials(&pcfg.timing, &g_trials);
    let n = rows.len() as f64;
    let pro_rate = pro_eq as f64 / n;
    let greedy_rate = greedy_eq as f64 / n;
    outcome(
        below == 0 && pro_rate >= 0.80 && greedy_rate < pro_rate,
        format!(
            "{} syndromes: promatch optimal {:.3}, greedy optimal {:.3}, below-oracle {below}, promatch aborts {aborted}",
            rows.len(),
            pro_rate,
            greedy_rate
        ),
    )
}

fn c4_coverage(budget: &mut BudgetLog) -> Outcome {
    let cfg = ExperimentConfig {
        distance: 11,
        p: 1e-4,
        predecoder: PredecoderKind::Promatch,
        main: MainKind::Astrea,
        k_max: 24,
        shots_per_k: 6_000,
        master_seed: 0xC4,
        ..Default::default()
    };
    let exp = Experiment::new(cfg).unwrap();
    let samples = exp.high_hw_corpus(Weighting::Uniform).unwrap();
    let trials = exp.decode_corpus(&samples).unwrap();
    let timing = exp.chain.promatch.timing;
    budget.add_trials(&timing, &trials);
    let aborted = trials.iter().filter(|t| t.aborted).count();
    let over = trials.iter().filter(|t| !t.aborted && t.post_hw > 10).count();
    let rate = aborted as f64 / trials.len() as f64;
    let lat = latency_report(&trials, &timing);
    outcome(
        samples.len() >= 100_000 && over == 0 && rate < 1e-2,
        format!(
            "{} syndromes (k=6..24), residual > 10 in {over}, abort rate {rate:.2e}, max total {:.0} ns",
            samples.len(),
            lat.total_max_ns.unwrap_or(0.0)
        ),
    )
}

fn c5_singleton_invariants() -> Outcome {
    let graphs: Vec<(DetectorGraph, PathTable)> = [(7usize, 7usize), (9, 3), (11, 1)]
        .iter()
        .map(|&(d, r)| {
            let g = DetectorGraph::build(d, r, 1e-3).unwrap();
            let t = PathTable::build(&g);
            (g, t)
        })
        .collect();

    // Returns (rounds, violations, sequence fingerprint).
    let run = |idx: u64| -> (u64, u64, Vec<(usize, usize, Step)>) {
        let (g, t) = &graphs[(idx % 3) as usize];
        let mut rng = rng_from_seed(trial_seed(0xC5, idx));
        let k = rng.random_range(1..=40);
        let s = syndrome_from_errors(g, &inject_k_errors(g, k, &mut rng).unwrap()).unwrap();
        let parity = s.hamming_weight() % 2;
        let mut state = PromatchState::new(g, t, &s).unwrap();
        let (mut rounds, mut bad) = (0u64, 0u64);
        let mut seq = Vec::new();
        loop {
            let before = state.subgraph().singleton_count();
            for pm in state.match_isolated_pairs() {
                seq.push((pm.a, pm.b, pm.step));
            }
            bad += u64::from(state.subgraph().singleton_count() > before);
            let before = state.subgraph().singleton_count();
            let Some(pm) = state.select().unwrap().prematch else { break };
            state.apply(&pm);
            rounds += 1;
            let grew = state.subgraph().singleton_count() > before;
            if grew && matches!(pm.step, Step::S1 | Step::S2_1 | Step::S2_2 | Step::S3) {
                bad += 1;
            }
            bad += u64::from(state.subgraph().hamming_weight() % 2 != parity);
            bad += u64::from(!state.subgraph().is_consistent());
            seq.push((pm.a, pm.b, pm.step));
        }
        (rounds, bad, seq)
    };

    let mut rounds = 0;
    let mut violations = 0;
    let mut nondeterministic = 0;
    let mut idx = 0u64;
    while rounds < 100_000 {
        let batch: Vec<u64> = (idx..idx + 2000).collect();
        idx += 2000;
        let res: Vec<_> = batch.par_iter().map(|&i| (run(i), run(i))).collect();
        for ((r, b, seq), (_, _, again)) in res {
            rounds += r;
            violations += b;
            nondeterministic += u64::from(seq != again);
        }
    }
    outcome(
        violations == 0 && nondeterministic == 0,
        format!("{rounds} prematch rounds over {idx} syndromes, {violations} violations, {nondeterministic} non-reproducible"),
    )
}

fn c6_chain_lengths() -> Outcome {
    let g = DetectorGraph::build(7, 7, 1e-4).unwrap();
    let t = PathTable::build(&g);
    let syndromes = iid_syndromes(&g, 1e-4, 0xC6, 10_000, 14);
    let hist = syndromes
        .par_chunks(500)
        .map(|chunk| chain_length_histogram(&g, &t, chunk).unwrap())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Default::default(), promatch::oracle::ChainHistogram::merge);
    let f = hist.fraction(1);
    outcome(f > 0.85, format!("{} syndromes, {} chains, length-1 fraction {f:.4}", syndromes.len(), hist.total()))
}

fn c7_estimator_consistency() -> Outcome {
    let cfg = ExperimentConfig {
        distance: 3,
        p: 0.01,
        predecoder: PredecoderKind::None,
        main: MainKind::Oracle,
        shots_direct: 400_000,
        shots_per_k: 40_000,
        master_seed: 0xC7,
        ..Default::default()
    };
    let exp = Experiment::new(cfg).unwrap();
    let direct = exp.run_direct().unwrap();
    let rare = exp.run_rare_event().unwrap();
    let se = (direct.stderr.powi(2) + rare.stderr.powi(2)).sqrt();
    let gap = (direct.ler - rare.ler).abs();
    outcome(
        gap <= 3.0 * se,
        format!(
            "direct {:.4e} ± {:.1e}, rare-event {:.4e} ± {:.1e}, gap {:.2} σ, truncation {:.1e}",
            direct.ler,
            direct.stderr,
            rare.ler,
            rare.stderr,
            gap / se,
            rare.truncation_bound.unwrap()
        ),
    )
}

fn c8_step_usage(budget: &mut BudgetLog) -> Outcome {
    let cfg = ExperimentConfig {
        distance: 11,
        p: 1e-4,
        predecoder: PredecoderKind::Promatch,
        main: MainKind::Astrea,
        shots_per_k: 2_000,
        master_seed: 0xC8,
        ..Default::default()
    };
    let exp = Experiment::new(cfg).unwrap();
    let samples: Vec<Sample> = exp.high_hw_corpus(Weighting::Occurrence).unwrap();
    let trials = exp.decode_corpus(&samples).unwrap();
    budget.add_trials(&exp.chain.promatch.timing, &trials);
    let usage = step_usage(&samples, &trials);
    let weighted = usage.weighted_frequency(Step::S1);
    outcome(
        weighted > 0.95,
        format!(
            "{} decoded samples: Step-1-only {:.4} occurrence-weighted ({:.4} unweighted)",
            usage.decoded,
            weighted,
            usage.frequency(Step::S1)
        ),
    )
}

fn main() {
    let mut budget = BudgetLog::default();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("C1 matching-count exactness", c1_matching_counts()),
        ("C2 oracle equivalence at low HW", c2_oracle_equivalence(&mut budget)),
        ("C3 predecoder near-optimality", c3_near_optimality(&mut budget)),
        ("C4 coverage guarantee", c4_coverage(&mut budget)),
        ("C5 singleton invariants", c5_singleton_invariants()),
        ("C6 chain-length statistic", c6_chain_lengths()),
        ("C7 estimator consistency", c7_estimator_consistency()),
        ("C8 step-usage dominance", c8_step_usage(&mut budget)),
    ];
    let timing = TimingModel::default();
    let c9 = outcome(
        budget.violations == 0 && budget.checked > 0,
        format!(
            "{} non-aborted decodes, worst {:.0} ns of {:.0} ns, {} over budget",
            budget.checked,
            timing.ns(budget.worst_cycles),
            timing.effective_budget_ns(),
            budget.violations
        ),
    );
    let mut failed = 0;
    for (name, o) in criteria.iter().chain(std::iter::once(&("C9 budget enforcement", c9))) {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
