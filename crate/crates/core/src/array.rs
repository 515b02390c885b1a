//! Block geometry, per-cell state and page addressing.
//!
//! A block holds `W` wordlines of `C` cells. Each wordline stores an LSB and
//! an MSB page, and pages are numbered in shadow program order.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Erased,
    PartiallyProgrammed,
    FullyProgrammed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PageKind {
    Lsb,
    Msb,
}

/// Physical location of a page: a wordline and which of its two bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PageSlot {
    pub wordline: usize,
    pub kind: PageKind,
}

impl PageSlot {
    pub fn lsb(wordline: usize) -> Self {
        PageSlot { wordline, kind: PageKind::Lsb }
    }

    pub fn msb(wordline: usize) -> Self {
        PageSlot { wordline, kind: PageKind::Msb }
    }
}

impl std::fmt::Display for PageSlot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            PageKind::Lsb => "LSB",
            PageKind::Msb => "MSB",
        };
        write!(f, "{k}{}", self.wordline)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PageAddress {
    pub block_id: u64,
    pub page_index: usize,
}

/// Logical threshold-voltage states. `Tp` is the temporary state reached by
/// LSB=0 cells after the first program step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum State {
    Er,
    Tp,
    P1,
    P2,
    P3,
}

impl State {
    pub const FINAL: [State; 4] = [State::Er, State::P1, State::P2, State::P3];

    /// Gray mapping of a fully-programmed cell: ER=11, P1=01, P2=00, P3=10
    /// written as (msb, lsb).
    pub fn from_bits(msb: bool, lsb: bool) -> State {
        match (msb, lsb) {
            (true, true) => State::Er,
            (false, true) => State::P1,
            (false, false) => State::P2,
            (true, false) => State::P3,
        }
    }

    /// Inverse of [`State::from_bits`]. `Tp` reports its LSB (0) and an MSB
    /// of 1, matching how an MSB read classifies it.
    pub fn bits(self) -> (bool, bool) {
        match self {
            State::Er => (true, true),
            State::P1 => (false, true),
            State::P2 => (false, false),
            State::P3 => (true, false),
            State::Tp => (true, false),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            State::Er => "ER",
            State::Tp => "TP",
            State::P1 => "P1",
            State::P2 => "P2",
            State::P3 => "P3",
        }
    }
}

/// Gaussian targets, read references and pass-through voltages, in
/// normalized units where the top of the P3 distribution sits near 1.0.
#[derive(Clone, Debug, PartialEq)]
pub struct StateModel {
    pub mean_er: f64,
    pub sigma_er: f64,
    pub mean_tp: f64,
    pub sigma_tp: f64,
    pub mean_p1: f64,
    pub sigma_p1: f64,
    pub mean_p2: f64,
    pub sigma_p2: f64,
    pub mean_p3: f64,
    pub sigma_p3: f64,
    pub vref_partial: f64,
    pub vref_a: f64,
    pub vref_b: f64,
    pub vref_c: f64,
    pub vpass: f64,
    pub vpass_partial: f64,
    pub vpass_erase: f64,
    pub ispp_step: f64,
}

impl Default for StateModel {
    fn default() -> Self {
        StateModel {
            mean_er: 0.0,
            sigma_er: 0.034,
            mean_tp: 0.375,
            sigma_tp: 0.030,
            mean_p1: 0.34,
            sigma_p1: 0.018,
            mean_p2: 0.60,
            sigma_p2: 0.018,
            mean_p3: 0.90,
            sigma_p3: 0.024,
            vref_partial: 0.20,
            vref_a: 0.25,
            vref_b: 0.485,
            vref_c: 0.76,
            vpass: 1.0,
            // Both fitted by `flashsim calibrate` (seed 1).
            vpass_partial: 0.802025,
            vpass_erase: 0.443025,
            ispp_step: 0.01,
        }
    }
}

impl StateModel {
    pub fn mean(&self, s: State) -> f64 {
        match s {
            State::Er => self.mean_er,
            State::Tp => self.mean_tp,
            State::P1 => self.mean_p1,
            State::P2 => self.mean_p2,
            State::P3 => self.mean_p3,
        }
    }

    pub fn sigma(&self, s: State) -> f64 {
        match s {
            State::Er => self.sigma_er,
            State::Tp => self.sigma_tp,
            State::P1 => self.sigma_p1,
            State::P2 => self.sigma_p2,
            State::P3 => self.sigma_p3,
        }
    }

    /// Top of the fully-programmed range, `mean_P3 + 4 sigma_P3`.
    pub fn full_max(&self) -> f64 {
        self.mean_p3 + 4.0 * self.sigma_p3
    }

    /// Checks ordering, pass-through and placement constraints. The error
    /// names the first offending key.
    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("sigma_er", self.sigma_er),
            ("sigma_tp", self.sigma_tp),
            ("sigma_p1", self.sigma_p1),
            ("sigma_p2", self.sigma_p2),
            ("sigma_p3", self.sigma_p3),
        ];
        if !(self.ispp_step > 0.0 && self.ispp_step.is_finite()) {
            return Err(Error::param("ispp_step", "must be positive"));
        }
        for (key, s) in sigmas {
            // Landed spread adds ispp_step^2/3 to the sampled target spread.
            if !(s.is_finite() && s * s > self.ispp_step * self.ispp_step / 3.0) {
                return Err(Error::param(key, "must exceed ispp_step/sqrt(3)"));
            }
        }
        let order = |key, lo: f64, v: f64, hi: f64| {
            if lo < v && v < hi {
                Ok(())
            } else {
                Err(Error::param(key, format!("must lie in ({lo}, {hi}), got {v}")))
            }
        };
        order("vref_partial", self.mean_er, self.vref_partial, self.mean_tp)?;
        order("vref_a", self.mean_er, self.vref_a, self.mean_p1)?;
        order("vref_b", self.mean_p1, self.vref_b, self.mean_p2)?;
        order("vref_c", self.mean_p2, self.vref_c, self.mean_p3)?;
        if self.mean_tp + 4.0 * self.sigma_tp > 0.5 * self.full_max() {
            return Err(Error::param(
                "mean_tp",
                "mean_tp + 4 sigma_tp must not exceed half of mean_p3 + 4 sigma_p3",
            ));
        }
        if self.vpass <= self.full_max() {
            return Err(Error::param("vpass", "must exceed mean_p3 + 4 sigma_p3"));
        }
        if self.vpass_erase <= self.mean_er + 4.0 * self.sigma_er {
            return Err(Error::param("vpass_erase", "must exceed mean_er + 4 sigma_er"));
        }
        if self.vpass_partial <= self.mean_tp + 4.0 * self.sigma_tp {
            return Err(Error::param("vpass_partial", "must exceed mean_tp + 4 sigma_tp"));
        }
        if !(self.vpass_erase < self.vpass_partial && self.vpass_partial < self.vpass) {
            return Err(Error::param(
                "vpass_partial",
                "requires vpass_erase < vpass_partial < vpass",
            ));
        }
        Ok(())
    }
}

/// Bit vector with one bit per cell of a wordline.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PageData {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for PageData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PageData(len={}, ones={})", self.len, self.count_ones())
    }
}

impl PageData {
    pub fn zeros(len: usize) -> Self {
        PageData { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut p = PageData { words: vec![u64::MAX; len.div_ceil(64)], len };
        p.clear_tail();
        p
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut p = PageData::zeros(len);
        for i in 0..len {
            if f(i) {
                p.set(i, true);
            }
        }
        p
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        PageData::from_fn(bits.len(), |i| bits[i])
    }

    /// Uniform random bits.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut p = PageData {
            words: (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect(),
            len,
        };
        p.clear_tail();
        p
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &PageData) -> PageData {
        assert_eq!(self.len, other.len);
        PageData {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }

    /// Number of differing bits.
    pub fn hamming(&self, other: &PageData) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Differing bits within `[start, end)`.
    pub fn hamming_range(&self, other: &PageData, start: usize, end: usize) -> usize {
        (start..end).filter(|&i| self.get(i) != other.get(i)).count()
    }

    /// Packed little-endian bytes, for hashing and output.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }
}

/// Read-only view of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub vth: f64,
    pub phase: Phase,
    pub pe_count: u32,
}

/// Reads applied to a wordline but not yet folded into its voltages. All
/// queued reads share one pass-through voltage and gain, so they collapse
/// into the closed form of the per-read recurrence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct PendingDisturb {
    alpha: f64,
    vp: f64,
    reads: u64,
}

#[derive(Clone, Debug)]
pub struct Block {
    id: u64,
    wordlines: usize,
    cells: usize,
    model: StateModel,
    seed: u64,
    epoch: u64,
    pe_count: u32,
    wear_growth: f64,
    vth: Vec<f64>,
    phase: Vec<Phase>,
    pending: Vec<PendingDisturb>,
    disturb_reads: Vec<u64>,
    intended_lsb: Vec<Option<PageData>>,
    intended_msb: Vec<Option<PageData>>,
    order: Vec<PageSlot>,
    index_of: Vec<[usize; 2]>,
}

/// Builds an erased block. Equal arguments give bit-identical blocks.
pub fn new_block(wordlines: usize, cells_per_wordline: usize, model: StateModel, seed: u64) -> Result<Block> {
    Block::new(wordlines, cells_per_wordline, model, seed)
}

impl Block {
    pub fn new(wordlines: usize, cells: usize, model: StateModel, seed: u64) -> Result<Block> {
        if cells == 0 {
            return Err(Error::Geometry("cells_per_wordline must be at least 1".into()));
        }
        let order = shadow_order(wordlines)?;
        let mut index_of = vec![[0usize; 2]; wordlines];
        for (i, s) in order.iter().enumerate() {
            index_of[s.wordline][s.kind as usize] = i;
        }
        let mut b = Block {
            id: 0,
            wordlines,
            cells,
            model,
            seed,
            epoch: 0,
            pe_count: 0,
            wear_growth: 0.0,
            vth: vec![0.0; wordlines * cells],
            phase: vec![Phase::Erased; wordlines],
            pending: vec![PendingDisturb::default(); wordlines],
            disturb_reads: vec![0; wordlines],
            intended_lsb: vec![None; wordlines],
            intended_msb: vec![None; wordlines],
            order,
            index_of,
        };
        b.resample_erased();
        Ok(b)
    }

    /// Builder-style block id, used to key the scrambler.
    pub fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }

    /// Fresh block whose cells were sampled at `pe_count` wear under growth
    /// coefficient `growth`. Draws are shared across `pe_count` values, so
    /// only the spread changes.
    pub fn at_wear(wordlines: usize, cells: usize, model: StateModel, seed: u64, growth: f64, pe_count: u32) -> Result<Block> {
        let mut b = Block::new(wordlines, cells, model, seed)?;
        b.wear_growth = growth;
        b.pe_count = pe_count;
        b.resample_erased();
        Ok(b)
    }

    pub(crate) fn resample_erased(&mut self) {
        let mu = self.model.mean_er;
        let sd = self.effective_sigma(State::Er);
        for wl in 0..self.wordlines {
            let mut rng = stream(self.seed, Stream::Erase, self.epoch, wl as u64);
            let row = &mut self.vth[wl * self.cells..(wl + 1) * self.cells];
            for v in row.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = mu + sd * z;
            }
            self.phase[wl] = Phase::Erased;
            self.pending[wl] = PendingDisturb::default();
            self.disturb_reads[wl] = 0;
            self.intended_lsb[wl] = None;
            self.intended_msb[wl] = None;
        }
    }

    pub(crate) fn bump_epoch(&mut self) {
        self.epoch += 1;
        self.pe_count = self.pe_count.saturating_add(1);
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn wordlines(&self) -> usize {
        self.wordlines
    }

    pub fn cells_per_wordline(&self) -> usize {
        self.cells
    }

    pub fn pages(&self) -> usize {
        2 * self.wordlines
    }

    pub fn model(&self) -> &StateModel {
        &self.model
    }

    pub fn pe_count(&self) -> u32 {
        self.pe_count
    }

    /// Explicit wear reset or preset. Takes effect at the next sampling.
    pub fn set_pe_count(&mut self, pe: u32) {
        self.pe_count = pe;
    }

    pub fn wear_growth(&self) -> f64 {
        self.wear_growth
    }

    pub(crate) fn set_wear_growth(&mut self, g: f64) {
        self.wear_growth = g;
    }

    /// Sigma of `s` widened by the current wear.
    pub fn effective_sigma(&self, s: State) -> f64 {
        self.model.sigma(s) * (1.0 + self.wear_growth * self.pe_count as f64)
    }

    pub fn phase(&self, wl: usize) -> Phase {
        self.phase[wl]
    }

    pub(crate) fn set_phase(&mut self, wl: usize, p: Phase) {
        self.phase[wl] = p;
    }

    pub fn cell(&mut self, wl: usize, bitline: usize) -> Cell {
        self.settle(wl);
        Cell {
            vth: self.vth[wl * self.cells + bitline],
            phase: self.phase[wl],
            pe_count: self.pe_count,
        }
    }

    /// Threshold voltages of one wordline with all queued disturb applied.
    pub fn vth(&mut self, wl: usize) -> &[f64] {
        self.settle(wl);
        &self.vth[wl * self.cells..(wl + 1) * self.cells]
    }

    pub(crate) fn vth_mut(&mut self, wl: usize) -> &mut [f64] {
        self.settle(wl);
        &mut self.vth[wl * self.cells..(wl + 1) * self.cells]
    }

    /// Every threshold voltage, wordline-major, with disturb applied.
    pub fn all_vth(&mut self) -> &[f64] {
        for wl in 0..self.wordlines {
            self.settle(wl);
        }
        &self.vth
    }

    pub fn slot(&self, page_index: usize) -> Result<PageSlot> {
        self.order.get(page_index).copied().ok_or(Error::PageOutOfRange {
            index: page_index,
            pages: self.pages(),
        })
    }

    pub fn page_index(&self, slot: PageSlot) -> usize {
        self.index_of[slot.wordline][slot.kind as usize]
    }

    pub fn order(&self) -> &[PageSlot] {
        &self.order
    }

    pub fn intended_lsb(&self, wl: usize) -> Option<&PageData> {
        self.intended_lsb[wl].as_ref()
    }

    pub fn intended_msb(&self, wl: usize) -> Option<&PageData> {
        self.intended_msb[wl].as_ref()
    }

    pub(crate) fn set_intended(&mut self, wl: usize, lsb: Option<PageData>, msb: Option<PageData>) {
        if lsb.is_some() {
            self.intended_lsb[wl] = lsb;
        }
        if msb.is_some() {
            self.intended_msb[wl] = msb;
        }
    }

    /// Ground-truth bits of a written page.
    pub fn truth(&self, slot: PageSlot) -> Option<&PageData> {
        match slot.kind {
            PageKind::Lsb => self.intended_lsb(slot.wordline),
            PageKind::Msb => self.intended_msb(slot.wordline),
        }
    }

    pub fn is_written(&self, slot: PageSlot) -> bool {
        self.truth(slot).is_some()
    }

    /// Reads seen by `wl` while it was erased or partially programmed.
    pub fn disturb_reads(&self, wl: usize) -> u64 {
        self.disturb_reads[wl]
    }

    pub(crate) fn queue_read_disturb(&mut self, wl: usize, alpha: f64, vp: f64, reads: u64) {
        if reads == 0 {
            return;
        }
        if self.phase[wl] != Phase::FullyProgrammed {
            self.disturb_reads[wl] += reads;
        }
        if alpha == 0.0 {
            return;
        }
        let p = self.pending[wl];
        if p.reads > 0 && (p.alpha != alpha || p.vp != vp) {
            self.settle(wl);
        }
        let p = &mut self.pending[wl];
        p.alpha = alpha;
        p.vp = vp;
        p.reads += reads;
    }

    fn settle(&mut self, wl: usize) {
        let p = self.pending[wl];
        if p.reads == 0 {
            return;
        }
        self.pending[wl] = PendingDisturb::default();
        let keep = (1.0 - p.alpha).powf(p.reads as f64);
        let row = &mut self.vth[wl * self.cells..(wl + 1) * self.cells];
        if p.reads == 1 {
            for v in row.iter_mut() {
                if *v < p.vp {
                    *v += p.alpha * (p.vp - *v);
                }
            }
        } else {
            for v in row.iter_mut() {
                if *v < p.vp {
                    *v = p.vp - (p.vp - *v) * keep;
                }
            }
        }
    }

    /// Raw comparison against one reference: bit = 1 iff vth < vref. Pure
    /// sensing with no disturb side effect.
    pub fn sense(&mut self, wl: usize, vref: f64) -> PageData {
        let row = self.vth(wl);
        PageData::from_fn(row.len(), |i| row[i] < vref)
    }

    /// Raw MSB comparison: bit = 1 iff vth < vref_a or vth >= vref_c.
    pub fn sense_msb(&mut self, wl: usize, vref_a: f64, vref_c: f64) -> PageData {
        let row = self.vth(wl);
        PageData::from_fn(row.len(), |i| row[i] < vref_a || row[i] >= vref_c)
    }

    /// Raw sensing of a written page at the model's static references.
    pub fn sense_page(&mut self, slot: PageSlot) -> PageData {
        let m = self.model.clone();
        match (slot.kind, self.phase[slot.wordline]) {
            (PageKind::Msb, _) => self.sense_msb(slot.wordline, m.vref_a, m.vref_c),
            (PageKind::Lsb, Phase::FullyProgrammed) => self.sense(slot.wordline, m.vref_b),
            (PageKind::Lsb, _) => self.sense(slot.wordline, m.vref_partial),
        }
    }

    /// Raw bit errors of a written page at the static references, without
    /// disturbing the block.
    pub fn raw_errors(&mut self, slot: PageSlot) -> Option<usize> {
        let bits = self.sense_page(slot);
        self.truth(slot).map(|t| t.hamming(&bits))
    }
}

/// Shadow program order for `wordlines` wordlines: page 0 is LSB(0), LSB(n)
/// sits at 2n-1 for n >= 1, MSB(0) at 2, MSB(n) at 2n+2 for 1 <= n <= W-2,
/// and MSB(W-1) last.
pub fn shadow_order(wordlines: usize) -> Result<Vec<PageSlot>> {
    if wordlines < 3 {
        return Err(Error::Geometry(format!(
            "shadow sequencing needs at least 3 wordlines, got {wordlines}"
        )));
    }
    let w = wordlines;
    let mut order = vec![PageSlot::lsb(0); 2 * w];
    for n in 1..w {
        order[2 * n - 1] = PageSlot::lsb(n);
    }
    order[2] = PageSlot::msb(0);
    for n in 1..=w - 2 {
        order[2 * n + 2] = PageSlot::msb(n);
    }
    order[2 * w - 1] = PageSlot::msb(w - 1);
    Ok(order)
}

/// Inverse page map of a block.
pub fn page_to_cells(block: &Block, addr: PageAddress) -> Result<PageSlot> {
    block.slot(addr.page_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shadow_order_w4() {
        let o = shadow_order(4).unwrap();
        let names: Vec<String> = o.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["LSB0", "LSB1", "MSB0", "LSB2", "MSB1", "LSB3", "MSB2", "MSB3"]);
    }

    #[test]
    fn shadow_order_w3() {
        let o = shadow_order(3).unwrap();
        let names: Vec<String> = o.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["LSB0", "LSB1", "MSB0", "LSB2", "MSB1", "MSB2"]);
    }

    #[test]
    fn shadow_order_rejects_small() {
        assert!(shadow_order(2).is_err());
        assert!(new_block(2, 8, StateModel::default(), 1).is_err());
        assert!(new_block(3, 0, StateModel::default(), 1).is_err());
    }

    #[test]
    fn page_lookup() {
        let b = new_block(4, 8, StateModel::default(), 1).unwrap();
        let at = |i| page_to_cells(&b, PageAddress { block_id: 0, page_index: i });
        assert_eq!(at(4).unwrap(), PageSlot::msb(1));
        assert_eq!(at(0).unwrap(), PageSlot::lsb(0));
        assert!(matches!(at(8), Err(Error::PageOutOfRange { .. })));
        for i in 0..8 {
            assert_eq!(b.page_index(at(i).unwrap()), i);
        }
    }

    #[test]
    fn gray_round_trip() {
        for s in State::FINAL {
            let (m, l) = s.bits();
            assert_eq!(State::from_bits(m, l), s);
        }
    }

    #[test]
    fn default_model_is_valid() {
        StateModel::default().validate().unwrap();
    }

    #[test]
    fn model_rejects_bad_order() {
        let m = StateModel { vref_b: 0.9, ..StateModel::default() };
        assert!(matches!(m.validate(), Err(Error::Param { key: "vref_b", .. })));
        let m = StateModel { vpass_erase: 0.9, ..StateModel::default() };
        assert!(m.validate().is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let mut a = new_block(3, 8, StateModel::default(), 7).unwrap();
        let mut b = new_block(3, 8, StateModel::default(), 7).unwrap();
        let va: Vec<u64> = a.all_vth().iter().map(|v| v.to_bits()).collect();
        let vb: Vec<u64> = b.all_vth().iter().map(|v| v.to_bits()).collect();
        assert_eq!(va, vb);
        let mut c = new_block(3, 8, StateModel::default(), 8).unwrap();
        assert_ne!(va, c.all_vth().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn page_data_bits() {
        let mut p = PageData::zeros(130);
        p.set(0, true);
        p.set(129, true);
        assert_eq!(p.count_ones(), 2);
        assert!(p.get(129));
        assert_eq!(PageData::ones(130).count_ones(), 130);
        assert_eq!(PageData::ones(130).hamming(&p), 128);
        assert_eq!(p.to_bytes().len(), 17);
    }

    #[test]
    fn pending_disturb_matches_iteration() {
        let mut b = new_block(3, 64, StateModel::default(), 3).unwrap();
        let before: Vec<f64> = b.vth(1).to_vec();
        b.queue_read_disturb(1, 1e-3, 1.0, 500);
        let lazy: Vec<f64> = b.vth(1).to_vec();
        for (v0, v1) in before.iter().zip(&lazy) {
            let mut v = *v0;
            for _ in 0..500 {
                v += 1e-3 * (1.0 - v);
            }
            assert!((v - v1).abs() < 1e-12);
        }
        assert_eq!(b.disturb_reads(1), 500);
    }
}
