//! Program latency accounting for the two program steps.

use crate::error::{Error, Result};

/// Per-operation times in arbitrary units. Transfer times are for one 8KB
/// page and scale with page size.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingTable {
    pub sense: f64,
    pub ispp_lsb: f64,
    pub ispp_msb: f64,
    pub transfer_common: f64,
    pub transfer_min: f64,
    pub transfer_max: f64,
}

impl Default for TimingTable {
    fn default() -> Self {
        TimingTable {
            sense: 50.0,
            ispp_lsb: 600.0,
            ispp_msb: 1200.0,
            transfer_common: 61.0,
            transfer_min: 17.0,
            transfer_max: 196.0,
        }
    }
}

pub const REFERENCE_PAGE_BITS: usize = 65536;

impl TimingTable {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("timing_sense", self.sense),
            ("timing_ispp_lsb", self.ispp_lsb),
            ("timing_ispp_msb", self.ispp_msb),
            ("timing_transfer_common", self.transfer_common),
            ("timing_transfer_min", self.transfer_min),
            ("timing_transfer_max", self.transfer_max),
        ];
        for (k, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(k, "must be a nonnegative number"));
            }
        }
        if self.sense + self.ispp_msb <= 0.0 {
            return Err(Error::param("timing_ispp_msb", "second-step time must be positive"));
        }
        if !(self.transfer_min <= self.transfer_common && self.transfer_common <= self.transfer_max) {
            return Err(Error::param("timing_transfer_common", "must lie within [min, max]"));
        }
        Ok(())
    }

    /// Transfer time of one page of `bits` bits at the common speed.
    pub fn transfer(&self, bits: usize) -> f64 {
        self.transfer_common * bits as f64 / REFERENCE_PAGE_BITS as f64
    }

    /// Second-step time without any LSB transfer.
    pub fn second_step(&self) -> f64 {
        self.sense + self.ispp_msb
    }
}

/// Overhead of controller-side LSB buffering, in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overhead {
    pub common: f64,
    pub min: f64,
    pub max: f64,
}

/// Extra second-step time from sending the buffered LSB page back to the
/// chip, relative to the unbuffered second step, over the transfer-speed
/// range. Zero when buffering is off.
pub fn latency_overhead(buffered: bool, page_bits: usize, timing: &TimingTable) -> Overhead {
    if !buffered {
        return Overhead { common: 0.0, min: 0.0, max: 0.0 };
    }
    let scale = page_bits as f64 / REFERENCE_PAGE_BITS as f64;
    let pct = |t: f64| 100.0 * t * scale / timing.second_step();
    Overhead {
        common: pct(timing.transfer_common),
        min: pct(timing.transfer_min),
        max: pct(timing.transfer_max),
    }
}

/// Accumulated time of one program step kind.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepTime {
    pub steps: u64,
    pub data_transfer: f64,
    pub lsb_transfer: f64,
    pub sense: f64,
    pub ispp: f64,
    pub pulses: u64,
}

impl StepTime {
    /// Time excluding the step's own data transfer.
    pub fn core(&self) -> f64 {
        self.lsb_transfer + self.sense + self.ispp
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LatencyAccount {
    pub first_step: StepTime,
    pub second_step: StepTime,
    pub reads: u64,
    pub learning_reads: u64,
}

impl LatencyAccount {
    pub fn total(&self) -> f64 {
        let f = &self.first_step;
        let s = &self.second_step;
        f.data_transfer + f.core() + s.data_transfer + s.core()
    }

    /// Percent change of second-step time of `self` against `baseline`.
    pub fn overhead_vs(&self, baseline: &LatencyAccount) -> f64 {
        let b = baseline.second_step.core();
        if b == 0.0 {
            return 0.0;
        }
        100.0 * (self.second_step.core() - b) / b
    }
}
