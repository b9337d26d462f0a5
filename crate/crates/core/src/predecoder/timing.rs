use serde::{Deserialize, Serialize};

/// Cycle-count latency model for the predecoder pipeline and the
/// brute-force main decoder.
///
/// The predecoder pipeline consumes one subgraph edge per cycle. The main
/// decoder is charged `cycles_per_matching` cycles for every perfect
/// matching it has to examine at the residual Hamming weight. The default
/// is calibrated so a Hamming-weight-10 syndrome (945 matchings) costs
/// 114 cycles, i.e. 456 ns at 250 MHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub clock_mhz: f64,
    /// Full decode window.
    pub budget_ns: f64,
    /// Cycles held back from the window for the final hand-off.
    pub reserve_cycles: u64,
    pub cycles_per_matching: f64,
}

pub const DEFAULT_CYCLES_PER_MATCHING: f64 = 114.0 / 945.0;

impl Default for TimingModel {
    fn default() -> Self {
        Self { clock_mhz: 250.0, budget_ns: 1000.0, reserve_cycles: 10, cycles_per_matching: DEFAULT_CYCLES_PER_MATCHING }
    }
}

/// Number of perfect matchings a brute-force decoder enumerates for `hw`
/// flipped bits: `(hw-1)!!` for even `hw`; odd weights get one virtual
/// boundary node, giving `hw!!`.
pub fn astrea_matchings(hw: usize) -> f64 {
    if hw == 0 {
        return 0.0;
    }
    let top = if hw.is_multiple_of(2) { hw - 1 } else { hw };
    (1..=top).rev().step_by(2).map(|k| k as f64).product()
}

impl TimingModel {
    pub fn period_ns(&self) -> f64 {
        1000.0 / self.clock_mhz
    }

    /// Usable cycles: the window minus the reserve. Negative when the
    /// window is shorter than the reserve.
    pub fn budget_cycles(&self) -> i64 {
        (self.budget_ns * self.clock_mhz / 1000.0 + 1e-9).floor() as i64 - self.reserve_cycles as i64
    }

    pub fn effective_budget_ns(&self) -> f64 {
        self.budget_cycles() as f64 * self.period_ns()
    }

    pub fn main_cycles(&self, hw: usize) -> u64 {
        let c = astrea_matchings(hw) * self.cycles_per_matching;
        if c >= u64::MAX as f64 {
            u64::MAX
        } else {
            (c - 1e-9).ceil().max(0.0) as u64
        }
    }

    #[inline]
    pub fn fits(&self, cycles: u64) -> bool {
        i64::try_from(cycles).is_ok_and(|c| c <= self.budget_cycles())
    }

    pub fn ns(&self, cycles: u64) -> f64 {
        cycles as f64 * self.period_ns()
    }
}
