//! Analytical performance model: throughput and runtime-versus-data curves
//! for the single-cycle processor and the multi-cycle design it is compared
//! against, from their published clock and cycle constants.
//!
//! Runtimes are computed in integer thousandths of a nanosecond (the clock
//! periods are exact milli-ns values), so the emitted curves are exactly
//! affine in the block count with no floating-point drift.

/// Clock period plus per-phase cycle counts of one processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessorProfile {
    pub name: &'static str,
    /// Clock period in thousandths of a nanosecond.
    pub clock_period_millins: u64,
    /// Cycles to produce the first block, including subkey generation.
    pub cycles_first_block: u64,
    /// Cycles per block once the subkeys exist.
    pub cycles_steady_block: u64,
}

impl ProcessorProfile {
    /// Clock period in nanoseconds.
    pub fn clock_period_ns(&self) -> f64 {
        self.clock_period_millins as f64 / 1000.0
    }

    /// Clock frequency in MHz derived from the period.
    pub fn clock_mhz(&self) -> f64 {
        1000.0 / self.clock_period_ns()
    }

    /// Steady-state cost of one block, in milli-ns.
    pub fn steady_block_millins(&self) -> u64 {
        self.cycles_steady_block * self.clock_period_millins
    }
}

/// The proposed single-cycle processor (1 CPI, long clock period).
pub const PROPOSED: ProcessorProfile = ProcessorProfile {
    name: "proposed",
    clock_period_millins: 51_911,
    cycles_first_block: 422,
    cycles_steady_block: 221,
};

/// The earlier multi-cycle, accumulator-based crypto processor.
pub const PREVIOUS: ProcessorProfile = ProcessorProfile {
    name: "previous",
    clock_period_millins: 14_795,
    cycles_first_block: 800,
    cycles_steady_block: 763,
};

/// Throughput in Mbps: bits times clock frequency over consumed cycles.
pub fn throughput_mbps(n_bits: u64, clock_freq_mhz: f64, cycles: u64) -> f64 {
    assert!(cycles > 0, "cycle count must be positive");
    n_bits as f64 * clock_freq_mhz / cycles as f64
}

/// Exact runtime in milli-ns to process `n` blocks on a profile.
pub fn runtime_millins(profile: &ProcessorProfile, n: u64) -> u64 {
    assert!(n >= 1, "need at least one block");
    (profile.cycles_first_block + (n - 1) * profile.cycles_steady_block)
        * profile.clock_period_millins
}

/// Runtime in nanoseconds to process `1..=n_blocks` blocks, one point per
/// block count. Affine: first-block cost plus a steady per-block slope.
pub fn runtime_curve(profile: &ProcessorProfile, n_blocks: u64) -> Vec<(u64, f64)> {
    (1..=n_blocks)
        .map(|n| (n, runtime_millins(profile, n) as f64 / 1000.0))
        .collect()
}

fn millins_decimal(v: u64) -> String {
    format!("{}.{:03}", v / 1000, v % 1000)
}

/// Renders the two shipped profiles as `blocks,proposed_ns,previous_ns` CSV.
pub fn runtime_csv(n_blocks: u64) -> String {
    let mut out = String::from("blocks,proposed_ns,previous_ns\n");
    for n in 1..=n_blocks {
        out.push_str(&format!(
            "{n},{},{}\n",
            millins_decimal(runtime_millins(&PROPOSED, n)),
            millins_decimal(runtime_millins(&PREVIOUS, n)),
        ));
    }
    out
}
