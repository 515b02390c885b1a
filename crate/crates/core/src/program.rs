//! Erase, ISPP placement, and the two-step and one-shot program algorithms.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{Block, PageData, Phase, State};
use crate::disturb::{apply_read_disturb, DisturbParams, PassThroughMode};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsbSource {
    OnChipRead,
    ControllerSupplied,
}

/// LSB bits latched on chip for the second program step.
#[derive(Clone, Debug, PartialEq)]
pub struct InternalLsbBuffer {
    pub bits: PageData,
    pub source: LsbSource,
}

impl InternalLsbBuffer {
    pub fn supplied(bits: PageData) -> Self {
        InternalLsbBuffer { bits, source: LsbSource::ControllerSupplied }
    }
}

/// A cell whose final state was chosen from a wrong LSB.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProgramError {
    pub wordline: usize,
    pub cell: usize,
    /// Intended (msb << 1) | lsb.
    pub intended: u8,
    pub landed_state: State,
}

/// Per-cell voltage change of one program step, plus pulse statistics.
#[derive(Clone, Debug, Default)]
pub struct StepOutcome {
    pub delta: Vec<f64>,
    pub max_pulses: u32,
    pub total_pulses: u64,
}

/// Resamples every cell from the erased distribution and bumps the wear
/// counter.
pub fn erase_block(block: &mut Block) {
    block.bump_epoch();
    block.resample_erased();
}

/// Raises `vth` in `step` increments to the first value at or above
/// `target`, then adds Gaussian placement jitter of std `step/2`. A target
/// below the current voltage leaves the cell unchanged. One jitter value is
/// drawn either way. Returns the pulse count.
pub fn ispp_program<R: Rng + ?Sized>(vth: &mut f64, target: f64, step: f64, rng: &mut R) -> u32 {
    let z: f64 = StandardNormal.sample(rng);
    ispp_with_jitter(vth, target, step, 0.5 * step * z)
}

fn ispp_with_jitter(vth: &mut f64, target: f64, step: f64, jitter: f64) -> u32 {
    let v0 = *vth;
    if target < v0 {
        return 0;
    }
    let pulses = ((target - v0) / step).ceil().max(0.0);
    *vth = (v0 + pulses * step + jitter).max(v0);
    pulses as u32
}

/// Places one wordline's cells into their states. `plan[i]` is `None` for
/// cells left alone. Two normals are drawn per cell regardless of the plan so
/// that draws line up across data patterns and wear levels.
fn place(block: &mut Block, wl: usize, kind: Stream, plan: impl Fn(usize) -> Option<State>) -> StepOutcome {
    let step = block.model().ispp_step;
    // Targets are offset so that ramp overshoot (uniform on one step) plus
    // jitter (std step/2) reproduce N(mean_s, sigma_eff) on landing.
    let target_of = |s: State| {
        let sd = block.effective_sigma(s);
        let spread = (sd * sd - step * step / 3.0).max(0.0).sqrt();
        (block.model().mean(s) - 0.5 * step, spread)
    };
    let params: Vec<Option<(f64, f64)>> = [State::Er, State::Tp, State::P1, State::P2, State::P3]
        .iter()
        .map(|&s| if s == State::Er { None } else { Some(target_of(s)) })
        .collect();
    let idx = |s: State| match s {
        State::Er => 0,
        State::Tp => 1,
        State::P1 => 2,
        State::P2 => 3,
        State::P3 => 4,
    };
    let mut rng = stream(block.seed(), kind, block.epoch(), wl as u64);
    let cells = block.cells_per_wordline();
    let mut out = StepOutcome { delta: vec![0.0; cells], ..Default::default() };
    let row = block.vth_mut(wl);
    for (i, v) in row.iter_mut().enumerate() {
        let zt: f64 = StandardNormal.sample(&mut rng);
        let zj: f64 = StandardNormal.sample(&mut rng);
        let Some(state) = plan(i) else { continue };
        let Some((mu, sd)) = params[idx(state)] else { continue };
        let before = *v;
        let pulses = ispp_with_jitter(v, mu + sd * zt, step, 0.5 * step * zj);
        out.delta[i] = *v - before;
        out.max_pulses = out.max_pulses.max(pulses);
        out.total_pulses += pulses as u64;
    }
    out
}

fn expect_phase(block: &Block, wl: usize, want: Phase, expected: &'static str) -> Result<()> {
    if wl >= block.wordlines() {
        return Err(Error::Geometry(format!("wordline {wl} out of range")));
    }
    let found = block.phase(wl);
    if found != want {
        return Err(Error::Phase { wordline: wl, found, expected });
    }
    Ok(())
}

fn expect_len(block: &Block, p: &PageData) -> Result<()> {
    if p.len() != block.cells_per_wordline() {
        return Err(Error::Length { found: p.len(), expected: block.cells_per_wordline() });
    }
    Ok(())
}

/// First program step: LSB=0 cells move to TP, LSB=1 cells stay erased.
pub fn program_lsb(block: &mut Block, wl: usize, data: &PageData) -> Result<StepOutcome> {
    expect_phase(block, wl, Phase::Erased, "Erased")?;
    expect_len(block, data)?;
    let out = place(block, wl, Stream::Lsb, |i| (!data.get(i)).then_some(State::Tp));
    block.set_phase(wl, Phase::PartiallyProgrammed);
    block.set_intended(wl, Some(data.clone()), None);
    Ok(out)
}

/// Second program step. The final state of each cell comes from its MSB bit
/// and the buffered LSB bit; a buffered bit that differs from the intended
/// LSB is a permanent program error.
pub fn program_msb(
    block: &mut Block,
    wl: usize,
    msb: &PageData,
    lsb_source: &InternalLsbBuffer,
) -> Result<(StepOutcome, Vec<ProgramError>)> {
    expect_phase(block, wl, Phase::PartiallyProgrammed, "PartiallyProgrammed")?;
    expect_len(block, msb)?;
    expect_len(block, &lsb_source.bits)?;
    let intended = block
        .intended_lsb(wl)
        .cloned()
        .ok_or_else(|| Error::Invariant(format!("wordline {wl} has no intended LSB")))?;
    let buf = &lsb_source.bits;
    let out = place(block, wl, Stream::Msb, |i| {
        let s = State::from_bits(msb.get(i), buf.get(i));
        (s != State::Er).then_some(s)
    });
    let errors = (0..msb.len())
        .filter(|&i| buf.get(i) != intended.get(i))
        .map(|i| ProgramError {
            wordline: wl,
            cell: i,
            intended: ((msb.get(i) as u8) << 1) | intended.get(i) as u8,
            landed_state: State::from_bits(msb.get(i), buf.get(i)),
        })
        .collect();
    block.set_phase(wl, Phase::FullyProgrammed);
    block.set_intended(wl, None, Some(msb.clone()));
    Ok((out, errors))
}

/// On-chip LSB read into the internal buffer: raw threshold, no ECC. The
/// read disturbs every other wordline of the block.
pub fn read_lsb_onchip(
    block: &mut Block,
    wl: usize,
    vref: f64,
    params: &DisturbParams,
    mode: PassThroughMode,
) -> Result<InternalLsbBuffer> {
    expect_phase(block, wl, Phase::PartiallyProgrammed, "PartiallyProgrammed")?;
    let bits = block.sense(wl, vref);
    apply_read_disturb(block, wl, params, mode);
    Ok(InternalLsbBuffer { bits, source: LsbSource::OnChipRead })
}

/// Single-step programming from erased straight to the final state.
pub fn program_one_shot(block: &mut Block, wl: usize, msb: &PageData, lsb: &PageData) -> Result<StepOutcome> {
    expect_phase(block, wl, Phase::Erased, "Erased")?;
    expect_len(block, msb)?;
    expect_len(block, lsb)?;
    let out = place(block, wl, Stream::OneShot, |i| {
        let s = State::from_bits(msb.get(i), lsb.get(i));
        (s != State::Er).then_some(s)
    });
    block.set_phase(wl, Phase::FullyProgrammed);
    block.set_intended(wl, Some(lsb.clone()), Some(msb.clone()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{new_block, StateModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(w: usize, c: usize) -> Block {
        new_block(w, c, StateModel::default(), 11).unwrap()
    }

    #[test]
    fn ispp_lands_above_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let mut v = 0.0;
            let p = ispp_program(&mut v, 0.40, 0.01, &mut rng);
            assert_eq!(p, 40);
            assert!(v > 0.40 - 0.03 && v < 0.41 + 0.03, "{v}");
        }
    }

    #[test]
    fn ispp_never_lowers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut v = 0.5;
        assert_eq!(ispp_program(&mut v, 0.40, 0.01, &mut rng), 0);
        assert_eq!(v, 0.5);
        for _ in 0..1000 {
            let mut v = 0.3999;
            ispp_program(&mut v, 0.40, 0.01, &mut rng);
            assert!(v >= 0.3999);
        }
    }

    #[test]
    fn erase_resets_phase_and_counts_wear() {
        let mut b = block(4, 16);
        program_lsb(&mut b, 0, &PageData::zeros(16)).unwrap();
        erase_block(&mut b);
        erase_block(&mut b);
        assert!((0..4).all(|w| b.phase(w) == Phase::Erased));
        assert_eq!(b.pe_count(), 2);
        assert!(b.intended_lsb(0).is_none());
    }

    #[test]
    fn lsb_all_ones_moves_nothing() {
        let mut b = block(4, 256);
        let before = b.vth(1).to_vec();
        let out = program_lsb(&mut b, 1, &PageData::ones(256)).unwrap();
        assert_eq!(b.vth(1), &before[..]);
        assert!(out.delta.iter().all(|&d| d == 0.0));
        assert_eq!(b.phase(1), Phase::PartiallyProgrammed);
    }

    #[test]
    fn lsb_all_zeros_reaches_tp() {
        let mut b = block(4, 4096);
        program_lsb(&mut b, 1, &PageData::zeros(4096)).unwrap();
        let v = b.vth(1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.375).abs() < 0.003, "{mean}");
    }

    #[test]
    fn phase_rules() {
        let mut b = block(4, 8);
        let d = PageData::ones(8);
        let buf = InternalLsbBuffer::supplied(d.clone());
        assert!(program_msb(&mut b, 0, &d, &buf).is_err());
        program_lsb(&mut b, 0, &d).unwrap();
        assert!(program_lsb(&mut b, 0, &d).is_err());
        assert!(program_one_shot(&mut b, 0, &d, &d).is_err());
        assert!(program_msb(&mut b, 0, &PageData::ones(7), &buf).is_err());
        program_msb(&mut b, 0, &d, &buf).unwrap();
        assert_eq!(b.phase(0), Phase::FullyProgrammed);
        assert!(read_lsb_onchip(&mut b, 0, 0.20, &DisturbParams::default(), PassThroughMode::Single).is_err());
    }

    #[test]
    fn supplied_lsb_has_no_errors() {
        let mut b = block(4, 512);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lsb = PageData::random(512, &mut rng);
        let msb = PageData::random(512, &mut rng);
        program_lsb(&mut b, 2, &lsb).unwrap();
        // Shift everything far up; supplied bits still give no errors.
        for v in b.vth_mut(2) {
            *v += 0.3;
        }
        let (_, errs) = program_msb(&mut b, 2, &msb, &InternalLsbBuffer::supplied(lsb)).unwrap();
        assert!(errs.is_empty());
    }

    #[test]
    fn disturbed_cell_becomes_program_error() {
        let mut b = block(4, 8);
        let lsb = PageData::ones(8);
        program_lsb(&mut b, 1, &lsb).unwrap();
        b.vth_mut(1)[3] = 0.25;
        let p = DisturbParams::default();
        let buf = read_lsb_onchip(&mut b, 1, 0.20, &p, PassThroughMode::Single).unwrap();
        assert!(!buf.bits.get(3));
        let msb = PageData::ones(8);
        let (_, errs) = program_msb(&mut b, 1, &msb, &buf).unwrap();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].cell, 3);
        assert_eq!(errs[0].intended, 0b11);
        assert!(matches!(errs[0].landed_state, State::P2 | State::P3));
        assert!(b.vth(1)[3] > 0.76);
    }

    #[test]
    fn onchip_threshold_extremes() {
        let mut b = block(4, 64);
        program_lsb(&mut b, 1, &PageData::zeros(64)).unwrap();
        let p = DisturbParams::default();
        let hi = read_lsb_onchip(&mut b, 1, 5.0, &p, PassThroughMode::Single).unwrap();
        assert_eq!(hi.bits.count_ones(), 64);
        let lo = read_lsb_onchip(&mut b, 1, -5.0, &p, PassThroughMode::Single).unwrap();
        assert_eq!(lo.bits.count_ones(), 0);
    }

    #[test]
    fn one_shot_states() {
        let mut b = block(4, 1024);
        program_one_shot(&mut b, 0, &PageData::ones(1024), &PageData::ones(1024)).unwrap();
        assert!(b.vth(0).iter().all(|&v| v < 0.2));
        program_one_shot(&mut b, 1, &PageData::ones(1024), &PageData::zeros(1024)).unwrap();
        let v = b.vth(1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.90).abs() < 0.003);
    }
}
