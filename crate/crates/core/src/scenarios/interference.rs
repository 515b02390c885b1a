//! Program-interference characterization of a partially-programmed LSB page.
//!
//! Victims are wordlines `n` with `n % 3 == 1`, so each victim owns its two
//! neighbors. The LSB of `n-1` is written all-1s in every run. Conditions,
//! measured on the victim LSB at `vref_partial`:
//!
//! * A: right after LSB(n)
//! * B: after MSB(n-1), random data
//! * C: after LSB(n+1), random data
//! * D: after MSB(n-1) and LSB(n+1) written all-0s
//!
//! A, B and C come from one run and D from a second run that shares the
//! block seed and every other page.

use crate::array::{PageData, PageKind};
use crate::config::SimConfig;
use crate::controller::{Controller, MitigationConfig};
use crate::disturb::{apply_program_interference, worst_case_pattern};
use crate::error::{Error, Result};
use crate::program::program_one_shot;
use crate::report::{fixed, sci, Table};
use crate::rng::derive;

use super::{random_page, salt, worn_block};

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub label: &'static str,
    pub errors: u64,
    pub bits: u64,
    pub rber: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceReport {
    pub conditions: Vec<ConditionResult>,
    pub victims: usize,
    pub pe_cycles: u32,
}

impl InterferenceReport {
    pub fn normalized(&self, label: &str) -> f64 {
        self.conditions.iter().find(|c| c.label == label).map_or(f64::NAN, |c| c.normalized)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["condition", "victims", "bits", "errors", "raw_rber", "normalized_rber"]);
        for c in &self.conditions {
            t.push(vec![
                c.label.to_string(),
                self.victims.to_string(),
                c.bits.to_string(),
                c.errors.to_string(),
                sci(c.rber),
                fixed(c.normalized),
            ]);
        }
        t
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Run {
    Random,
    WorstCase,
}

fn victims(w: usize) -> Vec<usize> {
    (1..w).filter(|n| n % 3 == 1 && n + 1 < w).collect()
}

/// Errors summed over victims at each measurement point of one run.
fn run(cfg: &SimConfig, seed: u64, which: Run) -> Result<[u64; 3]> {
    let (w, c) = (cfg.wordlines, cfg.cells_per_wordline);
    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), cfg.char_pe_cycles)?;
    let mut settings = cfg.controller(MitigationConfig::baseline());
    // Isolate coupling from the single on-chip read in the window.
    settings.disturb.alpha_rd = 0.0;
    let vs = victims(w);
    let is_victim = |n: usize| n < w && vs.contains(&n);
    let pattern = worst_case_pattern(c);
    let data_seed = derive(seed, salt::DATA);
    // Measurement points, keyed by page index: (victim, slot 0..3).
    let mut probes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 2 * w];
    for &n in &vs {
        probes[2 * n - 1].push((n, 0));
        probes[2 * n].push((n, 1));
        probes[2 * n + 1].push((n, 2));
    }
    let mut totals = [0u64; 3];
    let mut ctl = Controller::new(&mut block, settings);
    for (idx, probe) in probes.iter().enumerate() {
        let slot = ctl.block().order()[idx];
        let n = slot.wordline;
        let data = match slot.kind {
            PageKind::Lsb if is_victim(n + 1) => pattern.prep[0].clone(),
            PageKind::Msb if is_victim(n + 1) && which == Run::WorstCase => pattern.attack[0].clone(),
            PageKind::Lsb if n >= 1 && is_victim(n - 1) && which == Run::WorstCase => pattern.attack[1].clone(),
            _ => random_page(data_seed, slot.kind as u64, n, c),
        };
        ctl.write_page(&data)?;
        for &(v, k) in probe {
            let errs = ctl
                .block()
                .raw_errors(crate::array::PageSlot::lsb(v))
                .ok_or_else(|| Error::Invariant(format!("victim {v} unwritten at probe")))?;
            totals[k] += errs as u64;
        }
    }
    Ok(totals)
}

/// Runs conditions A to D and normalizes to A.
pub fn run_interference_characterization(cfg: &SimConfig, seed: u64) -> Result<InterferenceReport> {
    cfg.validate()?;
    let r = run(cfg, seed, Run::Random)?;
    let d = run(cfg, seed, Run::WorstCase)?;
    if r[0] != d[0] {
        return Err(Error::Invariant(format!(
            "condition A differs between runs ({} vs {})",
            r[0], d[0]
        )));
    }
    let nv = victims(cfg.wordlines).len();
    let bits = (nv * cfg.cells_per_wordline) as u64;
    let base = r[0] as f64 / bits as f64;
    let mk = |label, errors: u64| {
        let rber = errors as f64 / bits as f64;
        ConditionResult {
            label,
            errors,
            bits,
            rber,
            normalized: if errors == 0 && r[0] == 0 { 1.0 } else { rber / base },
        }
    };
    Ok(InterferenceReport {
        conditions: vec![mk("A", r[0]), mk("B", r[1]), mk("C", r[2]), mk("D", d[2])],
        victims: nv,
        pe_cycles: cfg.char_pe_cycles,
    })
}

/// Mean voltage shift a wordline receives after it is fully programmed,
/// under two-step shadow programming and under sequential one-shot
/// programming of the same data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneShotComparison {
    pub two_step_shift: f64,
    pub one_shot_shift: f64,
}

impl OneShotComparison {
    pub fn ratio(&self) -> f64 {
        self.two_step_shift / self.one_shot_shift
    }
}

pub fn compare_one_shot(cfg: &SimConfig, seed: u64) -> Result<OneShotComparison> {
    let (w, c) = (cfg.wordlines, cfg.cells_per_wordline);
    let data_seed = derive(seed, salt::DATA);
    let lsb: Vec<PageData> = (0..w).map(|n| random_page(data_seed, 0, n, c)).collect();
    let msb: Vec<PageData> = (0..w).map(|n| random_page(data_seed, 1, n, c)).collect();
    let mut settings = cfg.controller(MitigationConfig { buffer_lsb_in_controller: true, ..MitigationConfig::baseline() });
    settings.disturb.alpha_rd = 0.0;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let interior = 1..w - 1;

    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), 0)?;
    let mut at_full = vec![0.0; w];
    {
        let mut ctl = Controller::new(&mut block, settings.clone());
        for idx in 0..2 * w {
            let slot = ctl.block().order()[idx];
            let data = match slot.kind {
                PageKind::Lsb => &lsb[slot.wordline],
                PageKind::Msb => &msb[slot.wordline],
            };
            ctl.write_page(data)?;
            if slot.kind == PageKind::Msb {
                at_full[slot.wordline] = sum(ctl.block().vth(slot.wordline));
            }
        }
    }
    let two: f64 = interior.clone().map(|n| sum(block.vth(n)) - at_full[n]).sum();

    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), 0)?;
    for n in 0..w {
        let out = program_one_shot(&mut block, n, &msb[n], &lsb[n])?;
        apply_program_interference(&mut block, n, &out.delta, &settings.disturb);
        at_full[n] = sum(block.vth(n));
    }
    let one: f64 = interior.clone().map(|n| sum(block.vth(n)) - at_full[n]).sum();
    let cells = (interior.len() * c) as f64;
    Ok(OneShotComparison { two_step_shift: two / cells, one_shot_shift: one / cells })
}
