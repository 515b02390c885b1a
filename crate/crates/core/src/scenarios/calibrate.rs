//! Bisection of the free model knobs against the target ratios.
//!
//! Knobs are fitted in dependency order, each with the previous ones fixed:
//!
//! 1. `kappa_wl` (with `kappa_bl` scaled along) for the worst-case
//!    interference ratio
//! 2. `char_reads` for the partial/full read-disturb ratio
//! 3. one guard band above the partial and erased tails, which sets
//!    `vpass_partial` and `vpass_erase`, for the pooled reduction
//! 4. `adaptive_reads` for the learned-reference gain
//! 5. `lifetime_reads` for the lifetime gain
//!
//! The disturb rate `alpha_rd` stays fixed: every read-disturb metric depends
//! on it only through the product with a read count.

use crate::config::SimConfig;
use crate::controller::MitigationConfig;
use crate::error::Result;
use crate::report::{fixed, sci, Table};

use super::{lifetime_report, run_interference_characterization, run_read_disturb_characterization};
use super::ReadDisturbOptions;

pub const TARGET_INTERFERENCE: f64 = 4.9;
pub const TARGET_PARTIAL_FULL_RATIO: f64 = 12.0;
pub const TARGET_PASS_REDUCTION: f64 = 0.72;
pub const TARGET_ADAPTIVE_REDUCTION: f64 = 0.27;
pub const TARGET_LIFETIME_GAIN: f64 = 0.16;

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationStep {
    pub knob: &'static str,
    pub value: f64,
    pub metric: &'static str,
    pub target: f64,
    pub achieved: f64,
    pub evaluations: usize,
}

impl CalibrationStep {
    pub fn table(steps: &[CalibrationStep]) -> Table {
        let mut t = Table::new(&["knob", "value", "metric", "target", "achieved", "evaluations"]);
        for s in steps {
            t.push(vec![
                s.knob.into(),
                sci(s.value),
                s.metric.into(),
                fixed(s.target),
                fixed(s.achieved),
                s.evaluations.to_string(),
            ]);
        }
        t
    }
}

/// Bisects `x` in `[lo, hi]` so that `f(x)` meets `target`, with `f`
/// increasing in `x` when `increasing`. Returns the best point seen.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    increasing: bool,
    iters: usize,
    geometric: bool,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64, usize)> {
    let mut best = (f64::NAN, f64::NAN);
    let mut evals = 0;
    for _ in 0..iters {
        let x = if geometric { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let y = f(x)?;
        evals += 1;
        if best.0.is_nan() || (y - target).abs() < (best.1 - target).abs() {
            best = (x, y);
        }
        if (y < target) == increasing {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok((best.0, best.1, evals))
}

/// Fits the knobs of `base` and returns the calibrated config with the
/// trace of every step.
pub fn calibrate(base: &SimConfig, seed: u64) -> Result<(SimConfig, Vec<CalibrationStep>)> {
    base.validate()?;
    let mut cfg = base.clone();
    let mut steps = Vec::new();

    // Coupling: scale both coefficients together.
    let ratio = if cfg.disturb.kappa_wl > 0.0 { cfg.disturb.kappa_bl / cfg.disturb.kappa_wl } else { 0.0 };
    let (k, d, n) = bisect(0.005, 0.2, TARGET_INTERFERENCE, true, 14, false, |k| {
        let mut c = cfg.clone();
        c.disturb.kappa_wl = k;
        c.disturb.kappa_bl = k * ratio;
        Ok(run_interference_characterization(&c, seed)?.normalized("D"))
    })?;
    cfg.disturb.kappa_wl = k;
    cfg.disturb.kappa_bl = k * ratio;
    steps.push(CalibrationStep {
        knob: "kappa_wl",
        value: k,
        metric: "normalized_rber_d",
        target: TARGET_INTERFERENCE,
        achieved: d,
        evaluations: n,
    });

    // Read count of the class comparison: enough reads that the partial
    // class clearly separates from the fully-programmed one.
    let classes = ReadDisturbOptions { classes: true, adaptive: false };
    let (reads, r, n) = bisect(500.0, 6000.0, TARGET_PARTIAL_FULL_RATIO, true, 12, true, |x| {
        let rep = run_read_disturb_characterization(&cfg, x.round() as u64, seed, classes)?;
        Ok(rep.partial_full_ratio())
    })?;
    cfg.char_reads = reads.round() as u64;
    steps.push(CalibrationStep {
        knob: "char_reads",
        value: cfg.char_reads as f64,
        metric: "partial_full_ratio",
        target: TARGET_PARTIAL_FULL_RATIO,
        achieved: r,
        evaluations: n,
    });

    // Pass voltages: one guard band above each class's upper tail, fitted
    // on the reduction pooled over the partial and erased classes.
    let m = cfg.model.clone();
    let (er_top, tp_top) = (m.mean_er + 4.0 * m.sigma_er, m.mean_tp + 4.0 * m.sigma_tp);
    let apply = |c: &mut SimConfig, g: f64| {
        c.model.vpass_erase = er_top + g;
        c.model.vpass_partial = tp_top + g;
    };
    let (g, r, n) = bisect(0.0, m.vpass - tp_top, TARGET_PASS_REDUCTION, false, 14, false, |g| {
        let mut c = cfg.clone();
        apply(&mut c, g);
        Ok(run_read_disturb_characterization(&c, c.char_reads, seed, classes)?.pooled_reduction())
    })?;
    apply(&mut cfg, g);
    steps.push(CalibrationStep {
        knob: "vpass_guard_band",
        value: g,
        metric: "pass_through_reduction",
        target: TARGET_PASS_REDUCTION,
        achieved: r,
        evaluations: n,
    });

    // Benchmark read count: more disturb moves the erased distribution
    // further from the static reference, so the learned one gains more.
    let adaptive = ReadDisturbOptions { classes: false, adaptive: true };
    let (reads, r, n) = bisect(10.0, 3000.0, TARGET_ADAPTIVE_REDUCTION, true, 12, true, |x| {
        let mut c = cfg.clone();
        c.adaptive_reads = x.round() as u64;
        let rep = run_read_disturb_characterization(&c, c.char_reads, seed, adaptive)?;
        Ok(rep.adaptive.map_or(0.0, |b| b.reduction()))
    })?;
    cfg.adaptive_reads = reads.round() as u64;
    steps.push(CalibrationStep {
        knob: "adaptive_reads",
        value: cfg.adaptive_reads as f64,
        metric: "adaptive_reduction",
        target: TARGET_ADAPTIVE_REDUCTION,
        achieved: r,
        evaluations: n,
    });

    // Lifetime workload: more reads per cycle, more to gain.
    let m = MitigationConfig::baseline();
    let (reads, g, n) = bisect(50.0, 10_000.0, TARGET_LIFETIME_GAIN, true, 12, true, |r| {
        Ok(lifetime_report(&cfg, m, r.round() as u64, seed)?.gain())
    })?;
    cfg.lifetime_reads = reads.round() as u64;
    steps.push(CalibrationStep {
        knob: "lifetime_reads",
        value: cfg.lifetime_reads as f64,
        metric: "lifetime_gain",
        target: TARGET_LIFETIME_GAIN,
        achieved: g,
        evaluations: n,
    });

    cfg.validate()?;
    Ok((cfg, steps))
}
