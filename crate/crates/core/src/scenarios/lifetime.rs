//! Lifetime in P/E cycles under a read-heavy workload.
//!
//! One P/E cycle of the workload: write the first page of a fresh block, read
//! it `reads_per_cycle` times while the rest of the block is still erased,
//! then fill the block. The worst page's raw RBER must stay within the ECC
//! correction limit.

use crate::config::SimConfig;
use crate::controller::{Controller, MitigationConfig};
use crate::disturb::PassThroughMode;
use crate::error::{Error, Result};
use crate::report::{fixed, sci, Table};
use crate::rng::derive;

use super::{random_page, salt, worn_block};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Workload {
    pub reads_per_cycle: u64,
}

/// Worst raw page RBER of one workload cycle on a block worn to `pe`.
pub fn worst_page_rber(
    cfg: &SimConfig,
    workload: Workload,
    mitigations: MitigationConfig,
    seed: u64,
    pe: u32,
) -> Result<f64> {
    let (w, c) = (cfg.lifetime_wordlines, cfg.lifetime_cells);
    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), pe)?;
    let data_seed = derive(seed, salt::DATA);
    let mut ctl = Controller::new(&mut block, cfg.controller(mitigations));
    for idx in 0..2 * w {
        let kind = ctl.block().order()[idx].kind;
        ctl.write_page(&random_page(data_seed, kind as u64, idx, c))?;
        if idx == 0 && workload.reads_per_cycle > 0 {
            ctl.read_page_repeated(0, workload.reads_per_cycle)?;
        }
    }
    let mut worst = 0usize;
    for idx in 0..2 * w {
        let slot = block.order()[idx];
        let e = block.raw_errors(slot).ok_or(Error::Unwritten(idx))?;
        worst = worst.max(e);
    }
    Ok(worst as f64 / c as f64)
}

/// Largest wear in `[0, lifetime_max_pe]` at which the worst page stays
/// within the ECC limit. Returns 0 if even a fresh block fails.
pub fn estimate_lifetime(cfg: &SimConfig, workload: Workload, mitigations: MitigationConfig, seed: u64) -> Result<u32> {
    cfg.validate()?;
    if cfg.ecc.t == 0 {
        return Err(Error::param("ecc_t", "lifetime needs a nonzero correction capability"));
    }
    let limit = cfg.ecc.rber_limit();
    let ok = |pe: u32| -> Result<bool> { Ok(worst_page_rber(cfg, workload, mitigations, seed, pe)? <= limit) };
    if !ok(0)? {
        return Ok(0);
    }
    let (mut lo, mut hi) = (0u32, cfg.lifetime_max_pe);
    if ok(hi)? {
        return Ok(hi);
    }
    // Invariant: ok(lo) and !ok(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LifetimeReport {
    pub reads_per_cycle: u64,
    pub single: u32,
    pub multiple: u32,
}

impl LifetimeReport {
    /// Relative lifetime gain of the multiple pass-through policy.
    pub fn gain(&self) -> f64 {
        if self.single == 0 {
            return if self.multiple == 0 { 0.0 } else { f64::INFINITY };
        }
        self.multiple as f64 / self.single as f64 - 1.0
    }

    pub fn table(&self, cfg: &SimConfig) -> Table {
        let mut t = Table::new(&["pass_through", "reads_per_cycle", "rber_limit", "lifetime_pe_cycles", "gain"]);
        for (mode, pe, gain) in [
            (PassThroughMode::Single, self.single, 0.0),
            (PassThroughMode::Multiple, self.multiple, self.gain()),
        ] {
            t.push(vec![
                mode.name().into(),
                self.reads_per_cycle.to_string(),
                sci(cfg.ecc.rber_limit()),
                pe.to_string(),
                fixed(gain),
            ]);
        }
        t
    }
}

/// Lifetime under each pass-through policy, all other mitigations as given.
pub fn lifetime_report(cfg: &SimConfig, mitigations: MitigationConfig, reads_per_cycle: u64, seed: u64) -> Result<LifetimeReport> {
    let wl = Workload { reads_per_cycle };
    let with = |p| MitigationConfig { pass_through: p, ..mitigations };
    Ok(LifetimeReport {
        reads_per_cycle,
        single: estimate_lifetime(cfg, wl, with(PassThroughMode::Single), seed)?,
        multiple: estimate_lifetime(cfg, wl, with(PassThroughMode::Multiple), seed)?,
    })
}
