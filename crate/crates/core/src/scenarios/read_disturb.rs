//! Read-disturb characterization by wordline class, multiple pass-through
//! efficacy, and the learned-reference benchmark.
//!
//! The block is laid out as: wordline 0 (the page that is read), a class of
//! fully-programmed wordlines, a class of partially-programmed wordlines and
//! a class of erased wordlines. Every class is measured on its LSB before and
//! after the reads. The class comparison runs at `rd_pe_cycles` of wear; the
//! learned-reference benchmark uses the same layout at `char_pe_cycles`.

use crate::array::{Block, PageData, PageSlot, Phase};
use crate::config::SimConfig;
use crate::controller::{adaptive_lsb_vref, ControllerSettings, MitigationConfig};
use crate::disturb::{apply_program_interference, apply_read_disturb_repeated, PassThroughMode};
use crate::error::{Error, Result};
use crate::program::program_lsb;
use crate::report::{fixed, sci, Table};
use crate::rng::derive;

use super::{random_page, salt, worn_block};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordlineClass {
    Full,
    Partial,
    Unprogrammed,
}

impl WordlineClass {
    pub const ALL: [WordlineClass; 3] = [WordlineClass::Full, WordlineClass::Partial, WordlineClass::Unprogrammed];

    pub fn name(self) -> &'static str {
        match self {
            WordlineClass::Full => "full",
            WordlineClass::Partial => "partial",
            WordlineClass::Unprogrammed => "unprogrammed",
        }
    }
}

/// Wordline ranges of each class.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadDisturbLayout {
    pub read_wordline: usize,
    pub full: std::ops::Range<usize>,
    pub partial: std::ops::Range<usize>,
    pub unprogrammed: std::ops::Range<usize>,
}

impl ReadDisturbLayout {
    pub fn new(w: usize) -> Self {
        let k = (w - 1) / 3;
        ReadDisturbLayout { read_wordline: 0, full: 1..k + 1, partial: k + 1..2 * k + 1, unprogrammed: 2 * k + 1..w }
    }

    pub fn range(&self, c: WordlineClass) -> std::ops::Range<usize> {
        match c {
            WordlineClass::Full => self.full.clone(),
            WordlineClass::Partial => self.partial.clone(),
            WordlineClass::Unprogrammed => self.unprogrammed.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassResult {
    pub class: WordlineClass,
    pub wordlines: usize,
    pub bits: u64,
    pub baseline_errors: u64,
    pub single_errors: u64,
    pub multiple_errors: u64,
}

impl ClassResult {
    pub fn rber(&self, mode: PassThroughMode) -> f64 {
        let e = match mode {
            PassThroughMode::Single => self.single_errors,
            PassThroughMode::Multiple => self.multiple_errors,
        };
        e as f64 / self.bits as f64
    }

    pub fn baseline_rber(&self) -> f64 {
        self.baseline_errors as f64 / self.bits as f64
    }

    /// Errors added by the reads under `mode`.
    pub fn induced(&self, mode: PassThroughMode) -> i64 {
        let e = match mode {
            PassThroughMode::Single => self.single_errors,
            PassThroughMode::Multiple => self.multiple_errors,
        };
        e as i64 - self.baseline_errors as i64
    }

    /// Fractional reduction of read-induced errors from Single to Multiple.
    pub fn reduction(&self) -> f64 {
        let s = self.induced(PassThroughMode::Single);
        if s <= 0 {
            return 0.0;
        }
        1.0 - self.induced(PassThroughMode::Multiple) as f64 / s as f64
    }
}

/// Static versus learned LSB reference on the partially-programmed class.
/// Runs on its own block at `char_pe_cycles` after `adaptive_reads` reads
/// under the single pass-through voltage.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveBenchmark {
    /// Reads of wordline 0 before learning.
    pub reads: u64,
    pub pe_cycles: u32,
    pub wordlines: Vec<usize>,
    pub bits: u64,
    /// Learned position per wordline, in half retry steps above mean_ER.
    pub half_steps: Vec<u16>,
    pub static_errors: u64,
    pub adaptive_errors: u64,
    pub static_vref: f64,
    pub mean_vref: f64,
    pub learning_reads: u64,
}

impl AdaptiveBenchmark {
    pub fn reduction(&self) -> f64 {
        if self.static_errors == 0 {
            return 0.0;
        }
        1.0 - self.adaptive_errors as f64 / self.static_errors as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReadDisturbReport {
    pub reads: u64,
    pub pe_cycles: u32,
    pub layout: ReadDisturbLayout,
    pub classes: Vec<ClassResult>,
    pub adaptive: Option<AdaptiveBenchmark>,
}

impl ReadDisturbReport {
    pub fn class(&self, c: WordlineClass) -> &ClassResult {
        self.classes.iter().find(|r| r.class == c).expect("every class is measured")
    }

    /// Partial over full LSB RBER under Single.
    pub fn partial_full_ratio(&self) -> f64 {
        self.class(WordlineClass::Partial).rber(PassThroughMode::Single)
            / self.class(WordlineClass::Full).rber(PassThroughMode::Single)
    }

    /// Reduction of induced errors pooled over partial and erased classes.
    pub fn pooled_reduction(&self) -> f64 {
        let p = self.class(WordlineClass::Partial);
        let u = self.class(WordlineClass::Unprogrammed);
        let s = p.induced(PassThroughMode::Single) + u.induced(PassThroughMode::Single);
        let m = p.induced(PassThroughMode::Multiple) + u.induced(PassThroughMode::Multiple);
        if s <= 0 {
            return 0.0;
        }
        1.0 - m as f64 / s as f64
    }

    /// One row per wordline class, then the static and learned reference
    /// rows of the benchmark. Cells that do not apply to a row are empty.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "section",
            "class",
            "reference",
            "wordlines",
            "bits",
            "reads",
            "pe_cycles",
            "baseline_rber",
            "single_rber",
            "multiple_rber",
            "single_errors",
            "multiple_errors",
            "single_induced_errors",
            "multiple_induced_errors",
            "reduction",
            "partial_full_ratio",
            "vref",
            "learning_reads",
        ]);
        let ratio = if self.classes.is_empty() { String::new() } else { fixed(self.partial_full_ratio()) };
        for c in &self.classes {
            t.push(vec![
                "class".into(),
                c.class.name().into(),
                "static".into(),
                c.wordlines.to_string(),
                c.bits.to_string(),
                self.reads.to_string(),
                self.pe_cycles.to_string(),
                sci(c.baseline_rber()),
                sci(c.rber(PassThroughMode::Single)),
                sci(c.rber(PassThroughMode::Multiple)),
                c.single_errors.to_string(),
                c.multiple_errors.to_string(),
                c.induced(PassThroughMode::Single).to_string(),
                c.induced(PassThroughMode::Multiple).to_string(),
                fixed(c.reduction()),
                ratio.clone(),
                String::new(),
                String::new(),
            ]);
        }
        if let Some(a) = &self.adaptive {
            let bits = a.bits;
            for (reference, errors, vref, red, lr) in [
                ("static", a.static_errors, a.static_vref, 0.0, 0),
                ("adaptive", a.adaptive_errors, a.mean_vref, a.reduction(), a.learning_reads),
            ] {
                t.push(vec![
                    "benchmark".into(),
                    WordlineClass::Partial.name().into(),
                    reference.into(),
                    a.wordlines.len().to_string(),
                    bits.to_string(),
                    a.reads.to_string(),
                    a.pe_cycles.to_string(),
                    String::new(),
                    sci(errors as f64 / bits as f64),
                    String::new(),
                    errors.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    fixed(red),
                    String::new(),
                    fixed(vref),
                    lr.to_string(),
                ]);
            }
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadDisturbOptions {
    pub classes: bool,
    pub adaptive: bool,
}

impl Default for ReadDisturbOptions {
    fn default() -> Self {
        ReadDisturbOptions { classes: true, adaptive: true }
    }
}

/// Builds the class layout: wordline 0 and the full class written in shadow
/// order, then LSB pages of the partial class, rest erased.
fn prepare(cfg: &SimConfig, seed: u64, pe: u32) -> Result<Block> {
    let (w, c) = (cfg.wordlines, cfg.cells_per_wordline);
    let layout = ReadDisturbLayout::new(w);
    let mut block = worn_block(cfg, w, c, derive(seed, salt::BLOCK), pe)?;
    let data_seed = derive(seed, salt::DATA);
    let settings = cfg.controller(MitigationConfig::baseline());
    let full = crate::array::shadow_order(layout.full.end)?;
    for slot in full {
        let data = random_page(data_seed, slot.kind as u64, slot.wordline, c);
        write_slot(&mut block, &settings, slot, &data)?;
    }
    for wl in layout.partial.clone() {
        let data = random_page(data_seed, 0, wl, c);
        let out = program_lsb(&mut block, wl, &data)?;
        apply_program_interference(&mut block, wl, &out.delta, &settings.disturb);
    }
    Ok(block)
}

/// Baseline program step on an arbitrary slot: on-chip LSB read for MSB
/// steps, coupling onto the neighbors after each step.
fn write_slot(b: &mut Block, s: &ControllerSettings, slot: PageSlot, data: &PageData) -> Result<()> {
    use crate::program::{program_msb, read_lsb_onchip};
    match slot.kind {
        crate::array::PageKind::Lsb => {
            let out = program_lsb(b, slot.wordline, data)?;
            apply_program_interference(b, slot.wordline, &out.delta, &s.disturb);
        }
        crate::array::PageKind::Msb => {
            let vref = b.model().vref_partial;
            let buf = read_lsb_onchip(b, slot.wordline, vref, &s.disturb, s.mitigations.pass_through)?;
            let (out, _) = program_msb(b, slot.wordline, data, &buf)?;
            apply_program_interference(b, slot.wordline, &out.delta, &s.disturb);
        }
    }
    Ok(())
}

/// LSB errors of one wordline at the static references. Erased wordlines
/// count cells at or above `vref_partial` against an all-1s page.
fn lsb_errors(block: &mut Block, wl: usize) -> u64 {
    let m = block.model().clone();
    match block.phase(wl) {
        Phase::Erased => block.vth(wl).iter().filter(|&&v| v >= m.vref_partial).count() as u64,
        _ => block.raw_errors(PageSlot::lsb(wl)).unwrap_or(0) as u64,
    }
}

fn class_errors(block: &mut Block, range: std::ops::Range<usize>) -> u64 {
    range.map(|wl| lsb_errors(block, wl)).sum()
}

/// The prepared block after `reads` reads of wordline 0 under `mode`.
pub fn disturbed_benchmark_block(cfg: &SimConfig, reads: u64, seed: u64, mode: PassThroughMode) -> Result<Block> {
    let mut b = prepare(cfg, seed, cfg.char_pe_cycles)?;
    apply_read_disturb_repeated(&mut b, 0, &cfg.disturb, mode, reads);
    Ok(b)
}

pub fn run_read_disturb_characterization(
    cfg: &SimConfig,
    reads: u64,
    seed: u64,
    opts: ReadDisturbOptions,
) -> Result<ReadDisturbReport> {
    cfg.validate()?;
    let layout = ReadDisturbLayout::new(cfg.wordlines);
    if layout.full.is_empty() || layout.partial.is_empty() || layout.unprogrammed.is_empty() {
        return Err(Error::param("wordlines", "too few wordlines for three classes"));
    }
    let mut base = prepare(cfg, seed, cfg.rd_pe_cycles)?;
    let c = cfg.cells_per_wordline as u64;
    let mut classes = Vec::new();
    if opts.classes {
        let mut single = base.clone();
        apply_read_disturb_repeated(&mut single, 0, &cfg.disturb, PassThroughMode::Single, reads);
        let mut multiple = base.clone();
        apply_read_disturb_repeated(&mut multiple, 0, &cfg.disturb, PassThroughMode::Multiple, reads);
        for class in WordlineClass::ALL {
            let r = layout.range(class);
            classes.push(ClassResult {
                class,
                wordlines: r.len(),
                bits: r.len() as u64 * c,
                baseline_errors: class_errors(&mut base, r.clone()),
                single_errors: class_errors(&mut single, r.clone()),
                multiple_errors: class_errors(&mut multiple, r),
            });
        }
    }
    let adaptive = if opts.adaptive {
        let mut disturbed = disturbed_benchmark_block(cfg, cfg.adaptive_reads, seed, PassThroughMode::Single)?;
        Some(adaptive_benchmark(cfg, &mut disturbed, &layout)?)
    } else {
        None
    };
    Ok(ReadDisturbReport { reads, pe_cycles: cfg.rd_pe_cycles, layout, classes, adaptive })
}

/// Learns each partial wordline as if it were the first one learned after
/// the reads, and compares misreads at the learned and static references.
fn adaptive_benchmark(cfg: &SimConfig, block: &mut Block, layout: &ReadDisturbLayout) -> Result<AdaptiveBenchmark> {
    let mut bench = AdaptiveBenchmark {
        reads: cfg.adaptive_reads,
        pe_cycles: cfg.char_pe_cycles,
        bits: (layout.partial.len() * cfg.cells_per_wordline) as u64,
        wordlines: layout.partial.clone().collect(),
        half_steps: Vec::new(),
        static_errors: 0,
        adaptive_errors: 0,
        static_vref: cfg.model.vref_partial,
        mean_vref: 0.0,
        learning_reads: 0,
    };
    let vref_static = cfg.model.vref_partial;
    for wl in layout.partial.clone() {
        let mut scratch = block.clone();
        let learned = adaptive_lsb_vref(&mut scratch, wl, cfg.retry_step, &cfg.disturb, PassThroughMode::Single)?;
        let truth = block
            .intended_lsb(wl)
            .cloned()
            .ok_or_else(|| Error::Invariant(format!("partial wordline {wl} has no LSB")))?;
        bench.static_errors += block.sense(wl, vref_static).hamming(&truth) as u64;
        bench.adaptive_errors += block.sense(wl, learned.vref).hamming(&truth) as u64;
        bench.mean_vref += learned.vref;
        bench.learning_reads += learned.reads;
        bench.half_steps.push(learned.half_steps);
    }
    bench.mean_vref /= layout.partial.len() as f64;
    Ok(bench)
}
