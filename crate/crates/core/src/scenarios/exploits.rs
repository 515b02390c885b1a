//! End-to-end exploit timelines run through the controller write path.
//!
//! Each exploit runs twice on identical blocks and data: the attack run and
//! a control run where the attacker's effect is removed (all-1s attack data,
//! or zero reads). Flips are attributed to the attack only when they exceed
//! the control.

use crate::array::{PageData, PageKind};
use crate::config::SimConfig;
use crate::controller::{Controller, MitigationConfig};
use crate::error::Result;
use crate::report::Table;
use crate::rng::derive;

use super::{random_page, salt, worn_block};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploitKind {
    Interference,
    ReadDisturb,
}

impl ExploitKind {
    pub fn name(self) -> &'static str {
        match self {
            ExploitKind::Interference => "interference",
            ExploitKind::ReadDisturb => "read-disturb",
        }
    }
}

/// Outcome for one victim page.
#[derive(Clone, Debug, PartialEq)]
pub struct VictimPage {
    pub page_index: usize,
    pub wordline: usize,
    pub kind: PageKind,
    /// Raw bit errors seen by the controller in the attack run.
    pub bit_flips: u64,
    pub control_bit_flips: u64,
    /// Bits still wrong after ECC.
    pub residual_flips: u64,
    pub uncorrectable: u64,
    pub control_uncorrectable: u64,
    /// LSB program errors on this page's wordline (LSB pages only).
    pub program_errors: u64,
}

impl VictimPage {
    pub fn induced(&self) -> u64 {
        self.bit_flips.saturating_sub(self.control_bit_flips)
    }

    pub fn corrupted(&self) -> bool {
        self.bit_flips > self.control_bit_flips || self.uncorrectable > self.control_uncorrectable
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExploitReport {
    pub kind: ExploitKind,
    pub mitigations: String,
    pub reads: u64,
    pub pages: Vec<VictimPage>,
}

impl ExploitReport {
    pub fn victim_bit_flips(&self) -> u64 {
        self.pages.iter().map(|p| p.bit_flips).sum()
    }

    pub fn control_bit_flips(&self) -> u64 {
        self.pages.iter().map(|p| p.control_bit_flips).sum()
    }

    pub fn induced(&self) -> u64 {
        self.pages.iter().map(VictimPage::induced).sum()
    }

    pub fn program_errors(&self) -> u64 {
        self.pages.iter().map(|p| p.program_errors).sum()
    }

    pub fn uncorrectable(&self) -> u64 {
        self.pages.iter().map(|p| p.uncorrectable).sum()
    }

    pub fn corrupted_pages(&self) -> usize {
        self.pages.iter().filter(|p| p.corrupted()).count()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "exploit",
            "mitigations",
            "reads",
            "page_index",
            "wordline",
            "page",
            "bit_flips",
            "control_bit_flips",
            "induced_flips",
            "residual_flips",
            "uncorrectable_codewords",
            "control_uncorrectable_codewords",
            "program_errors",
            "corrupted",
        ]);
        for p in &self.pages {
            t.push(vec![
                self.kind.name().into(),
                self.mitigations.clone(),
                self.reads.to_string(),
                p.page_index.to_string(),
                p.wordline.to_string(),
                match p.kind {
                    PageKind::Lsb => "lsb".into(),
                    PageKind::Msb => "msb".into(),
                },
                p.bit_flips.to_string(),
                p.control_bit_flips.to_string(),
                p.induced().to_string(),
                p.residual_flips.to_string(),
                p.uncorrectable.to_string(),
                p.control_uncorrectable.to_string(),
                p.program_errors.to_string(),
                p.corrupted().to_string(),
            ]);
        }
        t
    }
}

struct Observed {
    page_index: usize,
    wordline: usize,
    kind: PageKind,
    raw: u64,
    residual: u64,
    uncorrectable: u64,
    program_errors: u64,
}

/// Drives one block through `plan`, then reads the victim pages.
///
/// `plan(idx)` returns the data for page `idx`; `reads_after` issues repeated
/// reads of a page right after it is written.
fn execute(
    cfg: &SimConfig,
    mitigations: MitigationConfig,
    seed: u64,
    plan: &dyn Fn(usize, PageKind) -> PageData,
    reads_after: Option<(usize, u64)>,
    victims: &[usize],
) -> Result<Vec<Observed>> {
    let (w, c) = (cfg.wordlines, cfg.cells_per_wordline);
    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), cfg.attack_pe_cycles)?;
    let mut settings = cfg.controller(mitigations);
    settings.ecc.t = cfg.ecc_t_demo;
    let mut ctl = Controller::new(&mut block, settings);
    let mut written = Vec::with_capacity(2 * w);
    for idx in 0..2 * w {
        let slot = ctl.block().order()[idx];
        let data = plan(idx, slot.kind);
        ctl.write_page(&data)?;
        written.push(data);
        if let Some((page, n)) = reads_after {
            if page == idx && n > 0 {
                ctl.read_page_repeated(page, n)?;
            }
        }
    }
    let errors = ctl.program_errors().to_vec();
    let mut out = Vec::with_capacity(victims.len());
    for &idx in victims {
        let slot = ctl.block().order()[idx];
        let r = ctl.read_page(idx)?;
        let program_errors = match slot.kind {
            PageKind::Lsb => errors.iter().filter(|e| e.wordline == slot.wordline).count() as u64,
            PageKind::Msb => 0,
        };
        out.push(Observed {
            page_index: idx,
            wordline: slot.wordline,
            kind: slot.kind,
            raw: r.ecc.raw_errors as u64,
            residual: r.data.hamming(&written[idx]) as u64,
            uncorrectable: r.ecc.uncorrectable as u64,
            program_errors,
        });
    }
    Ok(out)
}

fn merge(attack: Vec<Observed>, control: Vec<Observed>) -> Vec<VictimPage> {
    attack
        .into_iter()
        .zip(control)
        .map(|(a, c)| VictimPage {
            page_index: a.page_index,
            wordline: a.wordline,
            kind: a.kind,
            bit_flips: a.raw,
            control_bit_flips: c.raw,
            residual_flips: a.residual,
            uncorrectable: a.uncorrectable,
            control_uncorrectable: c.uncorrectable,
            program_errors: a.program_errors,
        })
        .collect()
}

/// Victim wordline of the interference exploit.
pub(crate) fn interference_victim(w: usize) -> usize {
    w / 2
}

/// The attacker fills the page pair just before the victim's LSB with 1s,
/// the victim writes LSB(n), then the attacker writes 0s to the next pair
/// (MSB(n-1), LSB(n+1)) before the victim's MSB step reads LSB(n) on-chip.
pub fn run_interference_exploit(cfg: &SimConfig, mitigations: MitigationConfig, seed: u64) -> Result<ExploitReport> {
    cfg.validate()?;
    let (w, c) = (cfg.wordlines, cfg.cells_per_wordline);
    let n = interference_victim(w);
    let victim_page = 2 * n - 1;
    let data_seed = derive(seed, salt::DATA);
    let victim_seed = derive(seed, salt::VICTIM);
    let run = |attack_bit: bool| {
        let plan = move |idx: usize, kind: PageKind| {
            if idx == victim_page {
                random_page(victim_seed, 0, idx, c)
            } else if idx + 3 == 2 * n || idx + 2 == 2 * n {
                PageData::ones(c)
            } else if idx == 2 * n || idx == 2 * n + 1 {
                if attack_bit { PageData::ones(c) } else { PageData::zeros(c) }
            } else {
                random_page(data_seed, kind as u64, idx, c)
            }
        };
        execute(cfg, mitigations, seed, &plan, None, &[victim_page])
    };
    let attack = run(false)?;
    let control = run(true)?;
    Ok(ExploitReport {
        kind: ExploitKind::Interference,
        mitigations: mitigations.label(),
        reads: 0,
        pages: merge(attack, control),
    })
}

/// The attacker writes page 0 and reads it `reads` times. The victim then
/// writes pages `1..=victim_pages` onto wordlines that were erased during
/// the attack, and the rest of the block is filled with benign data.
pub fn run_read_disturb_exploit(
    cfg: &SimConfig,
    mitigations: MitigationConfig,
    reads: u64,
    seed: u64,
) -> Result<ExploitReport> {
    cfg.validate()?;
    let c = cfg.cells_per_wordline;
    let last = cfg.victim_pages.min(2 * cfg.wordlines - 1);
    let victims: Vec<usize> = (1..=last).collect();
    let data_seed = derive(seed, salt::DATA);
    let victim_seed = derive(seed, salt::VICTIM);
    let attacker_seed = derive(seed, salt::ATTACKER);
    let plan = |idx: usize, kind: PageKind| {
        if idx == 0 {
            random_page(attacker_seed, 0, 0, c)
        } else if idx <= last {
            random_page(victim_seed, 0, idx, c)
        } else {
            random_page(data_seed, kind as u64, idx, c)
        }
    };
    let attack = execute(cfg, mitigations, seed, &plan, Some((0, reads)), &victims)?;
    let control = execute(cfg, mitigations, seed, &plan, None, &victims)?;
    Ok(ExploitReport { kind: ExploitKind::ReadDisturb, mitigations: mitigations.label(), reads, pages: merge(attack, control) })
}
