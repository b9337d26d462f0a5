//! Aggregates over decoded high-HW corpora. Inputs are the per-sample
//! [`Trial`]s in corpus order; all sums run serially in that order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Sample, Trial};
use crate::predecoder::{Step, TimingModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HwRow {
    pub hw: usize,
    pub pre_count: u64,
    pub post_count: u64,
    pub pre_weighted: f64,
    pub post_weighted: f64,
}

/// Hamming weights before and after predecoding. Post-predecode weights
/// are counted for non-aborted samples only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HwDistribution {
    pub samples: u64,
    pub aborted: u64,
    pub rows: Vec<HwRow>,
}

impl HwDistribution {
    /// Largest post-predecode weight observed, if any.
    pub fn max_post_hw(&self) -> Option<usize> {
        self.rows.iter().filter(|r| r.post_count > 0).map(|r| r.hw).max()
    }
}

pub fn hw_distribution(samples: &[Sample], trials: &[Trial]) -> HwDistribution {
    let mut rows: BTreeMap<usize, HwRow> = BTreeMap::new();
    let total_w: f64 = samples.iter().map(|s| s.weight).sum();
    let kept_w: f64 = samples.iter().zip(trials).filter(|(_, t)| !t.aborted).map(|(s, _)| s.weight).sum();
    let mut aborted = 0;
    for (s, t) in samples.iter().zip(trials) {
        bump(&mut rows, t.pre_hw, |r| {
            r.pre_count += 1;
            r.pre_weighted += s.weight / total_w;
        });
        if t.aborted {
            aborted += 1;
        } else {
            bump(&mut rows, t.post_hw, |r| {
                r.post_count += 1;
                r.post_weighted += s.weight / kept_w;
            });
        }
    }
    HwDistribution { samples: samples.len() as u64, aborted, rows: rows.into_values().collect() }
}

fn bump(rows: &mut BTreeMap<usize, HwRow>, hw: usize, f: impl FnOnce(&mut HwRow)) {
    f(rows.entry(hw).or_insert(HwRow { hw, pre_count: 0, post_count: 0, pre_weighted: 0.0, post_weighted: 0.0 }));
}

/// Modeled latencies in nanoseconds. Maxima and means cover non-aborted
/// samples; `None` when there are none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub samples: u64,
    pub aborted: u64,
    pub abort_rate: f64,
    pub budget_ns: f64,
    pub predecode_max_ns: Option<f64>,
    pub predecode_mean_ns: Option<f64>,
    pub total_max_ns: Option<f64>,
    pub total_mean_ns: Option<f64>,
    /// Non-aborted samples whose total exceeded the budget.
    pub over_budget: u64,
}

pub fn latency_report(trials: &[Trial], timing: &TimingModel) -> LatencyReport {
    let kept: Vec<&Trial> = trials.iter().filter(|t| !t.aborted).collect();
    let aborted = (trials.len() - kept.len()) as u64;
    let stat = |f: &dyn Fn(&Trial) -> u64| -> (Option<f64>, Option<f64>) {
        if kept.is_empty() {
            return (None, None);
        }
        let max = kept.iter().map(|t| f(t)).max().map(|c| timing.ns(c));
        let mean = kept.iter().map(|t| timing.ns(f(t))).sum::<f64>() / kept.len() as f64;
        (max, Some(mean))
    };
    let (predecode_max_ns, predecode_mean_ns) = stat(&|t| t.predecode_cycles);
    let (total_max_ns, total_mean_ns) = stat(&|t| t.total_cycles);
    LatencyReport {
        samples: trials.len() as u64,
        aborted,
        abort_rate: if trials.is_empty() { 0.0 } else { aborted as f64 / trials.len() as f64 },
        budget_ns: timing.effective_budget_ns(),
        predecode_max_ns,
        predecode_mean_ns,
        total_max_ns,
        total_mean_ns,
        over_budget: kept.iter().filter(|t| !timing.fits(t.total_cycles)).count() as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    /// Deepest step used, or "NONE" when nothing was prematched.
    pub step: String,
    pub count: u64,
    pub frequency: f64,
    pub weighted_frequency: f64,
}

/// Deepest step per non-aborted sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepUsage {
    pub decoded: u64,
    pub rows: Vec<StepRow>,
}

impl StepUsage {
    pub fn frequency(&self, step: Step) -> f64 {
        self.rows.iter().find(|r| r.step == step.label()).map_or(0.0, |r| r.frequency)
    }

    pub fn weighted_frequency(&self, step: Step) -> f64 {
        self.rows.iter().find(|r| r.step == step.label()).map_or(0.0, |r| r.weighted_frequency)
    }
}

pub fn step_usage(samples: &[Sample], trials: &[Trial]) -> StepUsage {
    let mut counts: BTreeMap<Option<Step>, (u64, f64)> = BTreeMap::new();
    let mut decoded = 0;
    let mut total_w = 0.0;
    for (s, t) in samples.iter().zip(trials).filter(|(_, t)| !t.aborted) {
        decoded += 1;
        total_w += s.weight;
        let slot = counts.entry(t.deepest_step).or_default();
        slot.0 += 1;
        slot.1 += s.weight;
    }
    let rows = counts
        .into_iter()
        .map(|(step, (count, w))| StepRow {
            step: step.map_or("NONE", Step::label).to_string(),
            count,
            frequency: count as f64 / decoded as f64,
            weighted_frequency: if total_w > 0.0 { w / total_w } else { 0.0 },
        })
        .collect();
    StepUsage { decoded, rows }
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv_rows<W: std::io::Write, T: Serialize>(out: W, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
