//! Read-retry sweeps and the learned LSB reference of partially-programmed
//! wordlines.

use crate::array::{Block, Phase};
use crate::disturb::{apply_read_disturb_repeated, DisturbParams, PassThroughMode};
use crate::error::{Error, Result};

/// References `v_min + k*step` for `k = 0..=n`, covering `[v_min, v_max]`.
pub fn retry_references(v_min: f64, v_max: f64, step: f64) -> Vec<f64> {
    let n = ((v_max - v_min) / step - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|k| v_min + k as f64 * step).collect()
}

/// Number of cells of `wl` below each retry reference. Every reference is
/// one read, and each read disturbs the other wordlines.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn read_retry_histogram(
    block: &mut Block,
    wl: usize,
    v_min: f64,
    v_max: f64,
    step: f64,
    params: &DisturbParams,
    mode: PassThroughMode,
) -> Result<Vec<u64>> {
    if !(v_min < v_max) {
        return Err(Error::param("v_min", "must be below v_max"));
    }
    if !(step > 0.0) {
        return Err(Error::param("retry_step", "must be positive"));
    }
    let refs = retry_references(v_min, v_max, step);
    let mut sorted = block.vth(wl).to_vec();
    sorted.sort_by(f64::total_cmp);
    let counts = refs.iter().map(|&r| sorted.partition_point(|&v| v < r) as u64).collect();
    apply_read_disturb_repeated(block, wl, params, mode, refs.len() as u64);
    Ok(counts)
}

/// Differences of a cumulative sweep: cells in `[r_k, r_k+1)`.
pub fn bins(cumulative: &[u64]) -> Vec<u64> {
    cumulative.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Valley of a histogram: the longest run of bins holding the minimum count
/// (the first such run on a tie). Returns `(first_bin, run_length)`.
pub fn select_valley(bins: &[u64]) -> (usize, usize) {
    let min = bins.iter().copied().min().unwrap_or(0);
    let mut best = (0, 0);
    let mut i = 0;
    while i < bins.len() {
        if bins[i] == min {
            let start = i;
            while i < bins.len() && bins[i] == min {
                i += 1;
            }
            if i - start > best.1 {
                best = (start, i - start);
            }
        } else {
            i += 1;
        }
    }
    best
}

/// Outcome of learning one wordline's LSB reference.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedReference {
    pub vref: f64,
    /// Position of `vref` in half retry steps above the sweep start.
    pub half_steps: u16,
    pub bins: Vec<u64>,
    pub reads: u64,
}

/// Learns the LSB reference of a partially-programmed wordline: sweep
/// `[mean_ER, mean_TP]` at `step`, difference into bins, and take the middle
/// of the valley run.
pub fn adaptive_lsb_vref(
    block: &mut Block,
    wl: usize,
    step: f64,
    params: &DisturbParams,
    mode: PassThroughMode,
) -> Result<LearnedReference> {
    if block.phase(wl) != Phase::PartiallyProgrammed {
        return Err(Error::Phase {
            wordline: wl,
            found: block.phase(wl),
            expected: "PartiallyProgrammed",
        });
    }
    let (lo, hi) = (block.model().mean_er, block.model().mean_tp);
    let cum = read_retry_histogram(block, wl, lo, hi, step, params, mode)?;
    let b = bins(&cum);
    let (start, len) = select_valley(&b);
    let half_steps = (2 * start + len) as u16;
    Ok(LearnedReference {
        vref: lo + half_steps as f64 * step / 2.0,
        half_steps,
        bins: b,
        reads: cum.len() as u64,
    })
}

/// Learned references kept per block: 16 entries of (wordline, half-step
/// position), 4 bytes each.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnedVrefTable {
    entries: Vec<(u16, u16)>,
}

impl LearnedVrefTable {
    pub const CAPACITY: usize = 16;
    pub const ENTRY_BYTES: usize = 4;

    pub fn footprint_bytes() -> usize {
        Self::CAPACITY * Self::ENTRY_BYTES
    }

    pub fn get(&self, wl: usize) -> Option<u16> {
        self.entries.iter().find(|e| e.0 as usize == wl).map(|e| e.1)
    }

    /// Stores an entry, evicting the oldest when full.
    pub fn insert(&mut self, wl: usize, half_steps: u16) {
        self.remove(wl);
        if self.entries.len() == Self::CAPACITY {
            self.entries.remove(0);
        }
        self.entries.push((wl as u16, half_steps));
    }

    pub fn remove(&mut self, wl: usize) {
        self.entries.retain(|e| e.0 as usize != wl);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
