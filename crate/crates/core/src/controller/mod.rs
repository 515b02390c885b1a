//! SSD controller model: shadow-sequenced writes, reads through ECC, and the
//! three mitigations (controller-side LSB buffering, learned LSB reference,
//! per-phase pass-through voltages).

mod ecc;
mod latency;
mod retry;
mod scramble;

pub use ecc::{decode, EccConfig, EccReport};
pub use latency::{latency_overhead, LatencyAccount, Overhead, StepTime, TimingTable, REFERENCE_PAGE_BITS};
pub use retry::{
    adaptive_lsb_vref, bins, read_retry_histogram, retry_references, select_valley, LearnedReference,
    LearnedVrefTable,
};
pub use scramble::{keystream, scramble};

pub use crate::disturb::PassThroughMode;

use crate::array::{Block, PageAddress, PageData, PageKind, PageSlot, Phase};
use crate::disturb::{apply_program_interference, apply_read_disturb_repeated, DisturbParams};
use crate::error::{Error, Result};
use crate::program::{program_lsb, program_msb, read_lsb_onchip, InternalLsbBuffer, ProgramError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MitigationConfig {
    pub buffer_lsb_in_controller: bool,
    pub adaptive_vref: bool,
    pub pass_through: PassThroughMode,
    pub scramble: bool,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig::baseline()
    }
}

impl MitigationConfig {
    pub fn baseline() -> Self {
        MitigationConfig {
            buffer_lsb_in_controller: false,
            adaptive_vref: false,
            pass_through: PassThroughMode::Single,
            scramble: false,
        }
    }

    /// Buffering, learned reference and multiple pass-through voltages.
    pub fn all() -> Self {
        MitigationConfig {
            buffer_lsb_in_controller: true,
            adaptive_vref: true,
            pass_through: PassThroughMode::Multiple,
            scramble: false,
        }
    }

    /// Comma-separated names: buffer, adaptive, multi-vpass, scramble, plus
    /// the shorthands all and none.
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut m = MitigationConfig::baseline();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "buffer" => m.buffer_lsb_in_controller = true,
                "adaptive" => m.adaptive_vref = true,
                "multi-vpass" | "multiple" => m.pass_through = PassThroughMode::Multiple,
                "scramble" => m.scramble = true,
                "all" => {
                    m = MitigationConfig { scramble: m.scramble, ..MitigationConfig::all() };
                }
                "none" => m = MitigationConfig::baseline(),
                other => return Err(Error::param("mitigations", format!("unknown mitigation {other:?}"))),
            }
        }
        Ok(m)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.buffer_lsb_in_controller {
            parts.push("buffer");
        }
        if self.adaptive_vref {
            parts.push("adaptive");
        }
        if self.pass_through == PassThroughMode::Multiple {
            parts.push("multi-vpass");
        }
        if self.scramble {
            parts.push("scramble");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

/// Everything a controller session needs besides the block.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerSettings {
    pub mitigations: MitigationConfig,
    pub disturb: DisturbParams,
    pub ecc: EccConfig,
    pub timing: TimingTable,
    pub scramble_seed: u64,
    pub retry_step: f64,
    /// A partially-programmed wordline is learned only after it has seen at
    /// least this many reads while erased or partially programmed.
    pub adaptive_trigger_reads: u64,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        ControllerSettings {
            mitigations: MitigationConfig::baseline(),
            disturb: DisturbParams::default(),
            ecc: EccConfig::default(),
            timing: TimingTable::default(),
            scramble_seed: 0,
            retry_step: 0.01,
            adaptive_trigger_reads: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub page_index: usize,
    pub slot: PageSlot,
    pub program_errors: Vec<ProgramError>,
}

#[derive(Clone, Debug, Default)]
pub struct WriteReport {
    pub pages_written: usize,
    pub program_errors: Vec<ProgramError>,
    pub latency: LatencyAccount,
    /// Peak bytes of LSB pages held by the controller.
    pub buffer_peak_bytes: usize,
}

#[derive(Clone, Debug)]
pub struct ReadOutcome {
    pub data: PageData,
    pub ecc: EccReport,
    pub vref_lsb: Option<f64>,
}

/// One block's controller session.
pub struct Controller<'a> {
    block: &'a mut Block,
    settings: ControllerSettings,
    next: usize,
    lsb_copies: Vec<Option<PageData>>,
    held: usize,
    peak_held: usize,
    learned: LearnedVrefTable,
    account: LatencyAccount,
    program_errors: Vec<ProgramError>,
}

impl<'a> Controller<'a> {
    /// Opens a session on `block`. Writing resumes after the last page that
    /// is already written in shadow order.
    pub fn new(block: &'a mut Block, settings: ControllerSettings) -> Self {
        let next = (0..block.pages())
            .rev()
            .find(|&i| block.is_written(block.order()[i]))
            .map_or(0, |i| i + 1);
        let w = block.wordlines();
        Controller {
            block,
            settings,
            next,
            lsb_copies: vec![None; w],
            held: 0,
            peak_held: 0,
            learned: LearnedVrefTable::default(),
            account: LatencyAccount::default(),
            program_errors: Vec::new(),
        }
    }

    pub fn block(&mut self) -> &mut Block {
        self.block
    }

    pub fn settings(&self) -> &ControllerSettings {
        &self.settings
    }

    pub fn next_page(&self) -> usize {
        self.next
    }

    pub fn account(&self) -> &LatencyAccount {
        &self.account
    }

    pub fn program_errors(&self) -> &[ProgramError] {
        &self.program_errors
    }

    pub fn learned(&self) -> &LearnedVrefTable {
        &self.learned
    }

    fn addr(&self, page_index: usize) -> PageAddress {
        PageAddress { block_id: self.block.id(), page_index }
    }

    fn to_physical(&self, data: &PageData, page_index: usize) -> PageData {
        if self.settings.mitigations.scramble {
            scramble(data, self.addr(page_index), self.settings.scramble_seed)
        } else {
            data.clone()
        }
    }

    /// Reference used for an LSB read of a partially-programmed wordline.
    /// With the learned reference enabled, a wordline that has absorbed
    /// enough reads is swept once and its result cached.
    pub fn lsb_vref(&mut self, wl: usize) -> Result<f64> {
        let m = self.settings.mitigations;
        let step = self.settings.retry_step;
        let start = self.block.model().mean_er;
        if m.adaptive_vref && self.block.disturb_reads(wl) >= self.settings.adaptive_trigger_reads {
            if let Some(h) = self.learned.get(wl) {
                return Ok(start + h as f64 * step / 2.0);
            }
            let r = adaptive_lsb_vref(self.block, wl, step, &self.settings.disturb, m.pass_through)?;
            self.account.learning_reads += r.reads;
            self.learned.insert(wl, r.half_steps);
            return Ok(r.vref);
        }
        Ok(self.block.model().vref_partial)
    }

    /// Programs the next page in shadow order.
    pub fn write_page(&mut self, data: &PageData) -> Result<StepReport> {
        let idx = self.next;
        if idx >= self.block.pages() {
            return Err(Error::Capacity { requested: idx + 1, capacity: self.block.pages() });
        }
        let c = self.block.cells_per_wordline();
        if data.len() != c {
            return Err(Error::Length { found: data.len(), expected: c });
        }
        let slot = self.block.order()[idx];
        let wl = slot.wordline;
        let phys = self.to_physical(data, idx);
        let t = self.settings.timing.clone();
        let xfer = t.transfer(c);
        let mut errors = Vec::new();
        match slot.kind {
            PageKind::Lsb => {
                let out = program_lsb(self.block, wl, &phys)?;
                apply_program_interference(self.block, wl, &out.delta, &self.settings.disturb);
                let s = &mut self.account.first_step;
                s.steps += 1;
                s.data_transfer += xfer;
                s.ispp += t.ispp_lsb;
                s.pulses += out.total_pulses;
                if self.settings.mitigations.buffer_lsb_in_controller {
                    self.lsb_copies[wl] = Some(phys);
                    self.held += 1;
                    self.peak_held = self.peak_held.max(self.held);
                }
            }
            PageKind::Msb => {
                let buffered = self.settings.mitigations.buffer_lsb_in_controller;
                let buf = match self.lsb_copies[wl].take().filter(|_| buffered) {
                    Some(bits) => {
                        self.held -= 1;
                        self.account.second_step.lsb_transfer += xfer;
                        InternalLsbBuffer::supplied(bits)
                    }
                    None => {
                        let vref = self.lsb_vref(wl)?;
                        let mode = self.settings.mitigations.pass_through;
                        read_lsb_onchip(self.block, wl, vref, &self.settings.disturb, mode)?
                    }
                };
                let (out, errs) = program_msb(self.block, wl, &phys, &buf)?;
                apply_program_interference(self.block, wl, &out.delta, &self.settings.disturb);
                self.learned.remove(wl);
                let s = &mut self.account.second_step;
                s.steps += 1;
                s.data_transfer += xfer;
                s.sense += t.sense;
                s.ispp += t.ispp_msb;
                s.pulses += out.total_pulses;
                errors = errs;
            }
        }
        self.program_errors.extend_from_slice(&errors);
        self.next += 1;
        Ok(StepReport { page_index: idx, slot, program_errors: errors })
    }

    /// Programs `pages` in order starting at the next unwritten page.
    pub fn write_pages(&mut self, pages: &[PageData]) -> Result<WriteReport> {
        let room = self.block.pages() - self.next;
        if pages.len() > room {
            return Err(Error::Capacity { requested: pages.len(), capacity: room });
        }
        let before = self.account;
        let mut rep = WriteReport::default();
        for p in pages {
            let s = self.write_page(p)?;
            rep.program_errors.extend(s.program_errors);
            rep.pages_written += 1;
        }
        rep.latency = diff(&self.account, &before);
        rep.buffer_peak_bytes = self.buffer_peak_bytes();
        Ok(rep)
    }

    pub fn buffer_peak_bytes(&self) -> usize {
        self.peak_held * self.block.cells_per_wordline().div_ceil(8)
    }

    /// Reads a page through ECC. The read disturbs every other wordline.
    pub fn read_page(&mut self, page_index: usize) -> Result<ReadOutcome> {
        self.read_page_repeated(page_index, 1)
    }

    /// `reads` back-to-back reads of one page. The addressed wordline is not
    /// disturbed by its own reads, so every read returns the same data.
    pub fn read_page_repeated(&mut self, page_index: usize, reads: u64) -> Result<ReadOutcome> {
        let slot = self.block.slot(page_index)?;
        let truth = self.block.truth(slot).cloned().ok_or(Error::Unwritten(page_index))?;
        let wl = slot.wordline;
        let m = self.block.model().clone();
        let (raw, vref_lsb) = match (slot.kind, self.block.phase(wl)) {
            (PageKind::Msb, _) => (self.block.sense_msb(wl, m.vref_a, m.vref_c), None),
            (PageKind::Lsb, Phase::FullyProgrammed) => (self.block.sense(wl, m.vref_b), Some(m.vref_b)),
            (PageKind::Lsb, _) => {
                let v = self.lsb_vref(wl)?;
                (self.block.sense(wl, v), Some(v))
            }
        };
        let mode = self.settings.mitigations.pass_through;
        apply_read_disturb_repeated(self.block, wl, &self.settings.disturb, mode, reads);
        self.account.reads += reads;
        let (corrected, ecc) = decode(&raw, &truth, &self.settings.ecc);
        let data = self.to_physical(&corrected, page_index);
        Ok(ReadOutcome { data, ecc, vref_lsb })
    }
}

fn diff(a: &LatencyAccount, b: &LatencyAccount) -> LatencyAccount {
    let d = |x: &StepTime, y: &StepTime| StepTime {
        steps: x.steps - y.steps,
        data_transfer: x.data_transfer - y.data_transfer,
        lsb_transfer: x.lsb_transfer - y.lsb_transfer,
        sense: x.sense - y.sense,
        ispp: x.ispp - y.ispp,
        pulses: x.pulses - y.pulses,
    };
    LatencyAccount {
        first_step: d(&a.first_step, &b.first_step),
        second_step: d(&a.second_step, &b.second_step),
        reads: a.reads - b.reads,
        learning_reads: a.learning_reads - b.learning_reads,
    }
}

/// Writes `pages` (logical order) into `block` following shadow order.
pub fn write_block(block: &mut Block, pages: &[PageData], settings: &ControllerSettings) -> Result<WriteReport> {
    if pages.len() > block.pages() {
        return Err(Error::Capacity { requested: pages.len(), capacity: block.pages() });
    }
    Controller::new(block, settings.clone()).write_pages(pages)
}

/// Reads one page in a fresh controller session.
pub fn read_page(block: &mut Block, addr: PageAddress, settings: &ControllerSettings) -> Result<ReadOutcome> {
    Controller::new(block, settings.clone()).read_page(addr.page_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{new_block, StateModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pages(n: usize, c: usize, seed: u64) -> Vec<PageData> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| PageData::random(c, &mut rng)).collect()
    }

    fn settings(m: MitigationConfig) -> ControllerSettings {
        ControllerSettings {
            mitigations: m,
            ecc: EccConfig { codeword_data_bits: 1024, t: 8 },
            ..ControllerSettings::default()
        }
    }

    #[test]
    fn empty_write_is_noop() {
        let mut b = new_block(4, 1024, StateModel::default(), 1).unwrap();
        let before = b.all_vth().to_vec();
        let rep = write_block(&mut b, &[], &settings(MitigationConfig::baseline())).unwrap();
        assert_eq!(rep.pages_written, 0);
        assert_eq!(rep.latency.total(), 0.0);
        assert_eq!(b.all_vth(), &before[..]);
    }

    #[test]
    fn too_many_pages() {
        let mut b = new_block(3, 1024, StateModel::default(), 1).unwrap();
        let p = pages(7, 1024, 1);
        assert!(matches!(
            write_block(&mut b, &p, &settings(MitigationConfig::baseline())),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn round_trip_full_block() {
        for m in [MitigationConfig::baseline(), MitigationConfig::all(), MitigationConfig { scramble: true, ..MitigationConfig::all() }] {
            let mut b = new_block(6, 1024, StateModel::default(), 2).unwrap();
            let p = pages(12, 1024, 2);
            let s = settings(m);
            write_block(&mut b, &p, &s).unwrap();
            let mut ctl = Controller::new(&mut b, s);
            for (i, want) in p.iter().enumerate() {
                let r = ctl.read_page(i).unwrap();
                assert_eq!(&r.data, want, "page {i} {m:?}");
                assert_eq!(r.ecc.uncorrectable, 0);
            }
        }
    }

    #[test]
    fn unwritten_page_read_fails() {
        let mut b = new_block(4, 1024, StateModel::default(), 1).unwrap();
        let s = settings(MitigationConfig::baseline());
        write_block(&mut b, &pages(3, 1024, 1), &s).unwrap();
        let mut ctl = Controller::new(&mut b, s);
        assert_eq!(ctl.next_page(), 3);
        assert!(matches!(ctl.read_page(3), Err(Error::Unwritten(3))));
        assert!(ctl.read_page(99).is_err());
    }

    #[test]
    fn buffered_latency_matches_analytic_overhead() {
        let p = pages(8, 65536, 4);
        let mut b0 = new_block(4, 65536, StateModel::default(), 4).unwrap();
        let mut b1 = b0.clone();
        let base = write_block(&mut b0, &p, &settings(MitigationConfig::baseline())).unwrap();
        let m = MitigationConfig { buffer_lsb_in_controller: true, ..MitigationConfig::baseline() };
        let buf = write_block(&mut b1, &p, &settings(m)).unwrap();
        let want = latency_overhead(true, 65536, &TimingTable::default()).common;
        assert!((buf.latency.overhead_vs(&base.latency) - want).abs() < 1e-9);
        assert_eq!(buf.buffer_peak_bytes, 2 * 8192);
    }

    #[test]
    fn mitigation_list_parsing() {
        assert_eq!(MitigationConfig::parse_list("").unwrap(), MitigationConfig::baseline());
        assert_eq!(MitigationConfig::parse_list("all").unwrap(), MitigationConfig::all());
        let m = MitigationConfig::parse_list("buffer, scramble").unwrap();
        assert!(m.buffer_lsb_in_controller && m.scramble && !m.adaptive_vref);
        assert!(MitigationConfig::parse_list("magic").is_err());
        assert_eq!(MitigationConfig::all().label(), "buffer+adaptive+multi-vpass");
    }
}
