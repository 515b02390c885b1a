//! Characterization experiments, exploit timelines, lifetime estimation and
//! knob calibration.

mod calibrate;
mod exploits;
mod interference;
mod lifetime;
mod read_disturb;

pub use calibrate::{calibrate, CalibrationStep};
pub use exploits::{run_interference_exploit, run_read_disturb_exploit, ExploitKind, ExploitReport};
pub use interference::{
    compare_one_shot, run_interference_characterization, ConditionResult, InterferenceReport, OneShotComparison,
};
pub use lifetime::{estimate_lifetime, lifetime_report, worst_page_rber, LifetimeReport, Workload};
pub use read_disturb::{
    disturbed_benchmark_block, run_read_disturb_characterization, AdaptiveBenchmark, ClassResult,
    ReadDisturbLayout, ReadDisturbOptions, ReadDisturbReport, WordlineClass,
};

use crate::array::{Block, PageData};
use crate::config::SimConfig;
use crate::error::Result;
use crate::rng::{derive, stream, Stream};

/// Fresh block of the configured model at `pe` cycles of wear.
pub(crate) fn worn_block(cfg: &SimConfig, wordlines: usize, cells: usize, seed: u64, pe: u32) -> Result<Block> {
    Block::at_wear(wordlines, cells, cfg.model.clone(), seed, cfg.disturb.pe_sigma_growth, pe)
}

/// Uniform random page keyed by `(seed, salt, index)`.
pub(crate) fn random_page(seed: u64, salt: u64, index: usize, cells: usize) -> PageData {
    let mut rng = stream(derive(seed, salt), Stream::Data, 0, index as u64);
    PageData::random(cells, &mut rng)
}

/// Salts separating the independent seeds a scenario derives.
pub(crate) mod salt {
    pub const BLOCK: u64 = 1;
    pub const DATA: u64 = 2;
    pub const VICTIM: u64 = 3;
    pub const ATTACKER: u64 = 4;
}
