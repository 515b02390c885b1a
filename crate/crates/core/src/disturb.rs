//! Cell-to-cell program interference, read disturb and wear.

use crate::array::{Block, PageData, Phase, StateModel};

/// Coupling, read-disturb and wear coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DisturbParams {
    /// Fraction of a neighbor's voltage change coupled onto the same bitline
    /// of the adjacent wordlines.
    pub kappa_wl: f64,
    /// Fraction coupled from each diagonally adjacent bitline.
    pub kappa_bl: f64,
    /// Read-disturb gain per read per volt of pass-through overdrive.
    pub alpha_rd: f64,
    /// Per-cycle widening of every state sigma.
    pub pe_sigma_growth: f64,
}

impl Default for DisturbParams {
    fn default() -> Self {
        // Coupling fitted by `flashsim calibrate` (seed 1); the disturb rate
        // and wear growth are fixed inputs.
        DisturbParams {
            kappa_wl: 0.0569278,
            kappa_bl: 0.00431453,
            alpha_rd: 1.6e-5,
            pe_sigma_growth: 4e-4,
        }
    }
}

impl DisturbParams {
    /// Same parameters with all coupling and disturb switched off.
    pub fn quiet() -> Self {
        DisturbParams { kappa_wl: 0.0, kappa_bl: 0.0, alpha_rd: 0.0, ..DisturbParams::default() }
    }
}

/// Pass-through voltage policy for unread wordlines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PassThroughMode {
    /// `vpass` on every unread wordline.
    Single,
    /// `vpass_erase`, `vpass_partial` or `vpass` by wordline phase.
    Multiple,
}

impl PassThroughMode {
    pub fn name(self) -> &'static str {
        match self {
            PassThroughMode::Single => "single",
            PassThroughMode::Multiple => "multiple",
        }
    }
}

pub fn pass_voltage(model: &StateModel, mode: PassThroughMode, phase: Phase) -> f64 {
    match (mode, phase) {
        (PassThroughMode::Single, _) | (PassThroughMode::Multiple, Phase::FullyProgrammed) => model.vpass,
        (PassThroughMode::Multiple, Phase::PartiallyProgrammed) => model.vpass_partial,
        (PassThroughMode::Multiple, Phase::Erased) => model.vpass_erase,
    }
}

/// Couples a program step's per-cell voltage change onto the two adjacent
/// wordlines.
pub fn apply_program_interference(block: &mut Block, programmed_wl: usize, delta: &[f64], params: &DisturbParams) {
    let c = block.cells_per_wordline();
    assert_eq!(delta.len(), c, "delta length must equal cells per wordline");
    if params.kappa_wl == 0.0 && params.kappa_bl == 0.0 {
        return;
    }
    let shift: Vec<f64> = (0..c)
        .map(|b| {
            let left = if b > 0 { delta[b - 1] } else { 0.0 };
            let right = if b + 1 < c { delta[b + 1] } else { 0.0 };
            params.kappa_wl * delta[b] + params.kappa_bl * (left + right)
        })
        .collect();
    let victims = [programmed_wl.checked_sub(1), Some(programmed_wl + 1)];
    let w = block.wordlines();
    for wl in victims.into_iter().flatten().filter(|&n| n < w) {
        for (v, s) in block.vth_mut(wl).iter_mut().zip(&shift) {
            *v += s;
        }
    }
}

/// One read of `read_wl`: every other wordline gets
/// `vth += alpha * max(0, vp - vth)` with `vp` chosen by `mode`.
pub fn apply_read_disturb(block: &mut Block, read_wl: usize, params: &DisturbParams, mode: PassThroughMode) {
    apply_read_disturb_repeated(block, read_wl, params, mode, 1);
}

/// `reads` consecutive reads of `read_wl`, folded into the closed form
/// `vp - (vp - vth)(1 - alpha)^reads`.
pub fn apply_read_disturb_repeated(block: &mut Block, read_wl: usize, params: &DisturbParams, mode: PassThroughMode, reads: u64) {
    for wl in (0..block.wordlines()).filter(|&w| w != read_wl) {
        let vp = pass_voltage(block.model(), mode, block.phase(wl));
        block.queue_read_disturb(wl, params.alpha_rd, vp, reads);
    }
}

/// Attacker data for the interference exploit: all-1s preparation pages
/// keep the attacker cells erased, all-0s attack pages then drive them
/// through the largest transitions reachable from there.
#[derive(Clone, Debug)]
pub struct WorstCasePattern {
    pub prep: [PageData; 2],
    pub attack: [PageData; 2],
}

pub fn worst_case_pattern(cells: usize) -> WorstCasePattern {
    WorstCasePattern {
        prep: [PageData::ones(cells), PageData::ones(cells)],
        attack: [PageData::zeros(cells), PageData::zeros(cells)],
    }
}

/// Makes sampling on `block` use sigmas widened by its P/E count. Voltages
/// already in the array are not touched.
pub fn apply_pe_wear(block: &mut Block, params: &DisturbParams) {
    block.set_wear_growth(params.pe_sigma_growth);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::new_block;
    use crate::program::program_lsb;

    #[test]
    fn zero_delta_no_shift() {
        let mut b = new_block(3, 16, StateModel::default(), 1).unwrap();
        let before = b.all_vth().to_vec();
        apply_program_interference(&mut b, 1, &[0.0; 16], &DisturbParams::default());
        assert_eq!(b.all_vth(), &before[..]);
    }

    #[test]
    fn single_cell_coupling() {
        let mut b = new_block(3, 5, StateModel::default(), 1).unwrap();
        let before = b.all_vth().to_vec();
        let p = DisturbParams { kappa_wl: 0.08, kappa_bl: 0.006, ..DisturbParams::default() };
        let mut d = [0.0; 5];
        d[2] = 0.5;
        apply_program_interference(&mut b, 1, &d, &p);
        let after = b.all_vth().to_vec();
        for wl in [0usize, 2] {
            let s: Vec<f64> = (0..5).map(|i| after[wl * 5 + i] - before[wl * 5 + i]).collect();
            assert!((s[2] - 0.04).abs() < 1e-15);
            assert!((s[1] - 0.003).abs() < 1e-15 && (s[3] - 0.003).abs() < 1e-15);
            assert_eq!(s[0], 0.0);
            assert_eq!(s[4], 0.0);
        }
        for i in 0..5 {
            assert_eq!(after[5 + i], before[5 + i]);
        }
    }

    #[test]
    fn edge_bitlines_use_existing_neighbors() {
        let mut b = new_block(3, 3, StateModel::default(), 1).unwrap();
        let before = b.vth(0).to_vec();
        let p = DisturbParams { kappa_wl: 0.1, kappa_bl: 0.01, ..DisturbParams::default() };
        apply_program_interference(&mut b, 1, &[1.0, 0.0, 0.0], &p);
        let after = b.vth(0).to_vec();
        assert!((after[0] - before[0] - 0.1).abs() < 1e-15);
        assert!((after[1] - before[1] - 0.01).abs() < 1e-15);
        assert_eq!(after[2], before[2]);
    }

    #[test]
    fn read_disturb_clamps_and_favors_low_cells() {
        let mut b = new_block(3, 3, StateModel::default(), 1).unwrap();
        b.vth_mut(1).copy_from_slice(&[0.0, 0.5, 1.2]);
        let p = DisturbParams { alpha_rd: 2e-5, ..DisturbParams::default() };
        apply_read_disturb(&mut b, 0, &p, PassThroughMode::Single);
        let v = b.vth(1).to_vec();
        assert!((v[0] - 2e-5).abs() < 1e-18);
        assert!((v[1] - 0.5 - 1e-5).abs() < 1e-15);
        assert_eq!(v[2], 1.2);
    }

    #[test]
    fn read_disturb_skips_read_wordline() {
        let mut b = new_block(3, 8, StateModel::default(), 1).unwrap();
        let before = b.vth(0).to_vec();
        apply_read_disturb_repeated(&mut b, 0, &DisturbParams::default(), PassThroughMode::Single, 1000);
        assert_eq!(b.vth(0), &before[..]);
        assert_eq!(b.disturb_reads(0), 0);
        assert_eq!(b.disturb_reads(1), 1000);
    }

    #[test]
    fn multiple_policy_voltages() {
        let m = StateModel::default();
        assert_eq!(pass_voltage(&m, PassThroughMode::Single, Phase::Erased), m.vpass);
        assert_eq!(pass_voltage(&m, PassThroughMode::Multiple, Phase::Erased), m.vpass_erase);
        assert_eq!(pass_voltage(&m, PassThroughMode::Multiple, Phase::PartiallyProgrammed), m.vpass_partial);
        assert_eq!(pass_voltage(&m, PassThroughMode::Multiple, Phase::FullyProgrammed), m.vpass);
    }

    #[test]
    fn pattern_bits() {
        let p = worst_case_pattern(100);
        assert!(p.prep.iter().all(|d| d.count_ones() == 100));
        assert!(p.attack.iter().all(|d| d.count_ones() == 0));
    }

    #[test]
    fn wear_widens_new_samples_only() {
        let mut b = new_block(3, 4096, StateModel::default(), 1).unwrap();
        b.set_pe_count(3000);
        let before = b.vth(0).to_vec();
        apply_pe_wear(&mut b, &DisturbParams { pe_sigma_growth: 1e-4, ..DisturbParams::default() });
        assert!((b.effective_sigma(crate::array::State::Er) - 0.034 * 1.3).abs() < 1e-12);
        assert_eq!(b.vth(0), &before[..]);
        program_lsb(&mut b, 1, &PageData::zeros(4096)).unwrap();
        let v = b.vth(1);
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
        assert!((sd - 0.030 * 1.3).abs() < 0.002, "{sd}");
    }
}
