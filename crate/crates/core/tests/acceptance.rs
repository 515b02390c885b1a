//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use flashsim::config::SimConfig;
use flashsim::controller::{
    adaptive_lsb_vref, latency_overhead, Controller, EccConfig, MitigationConfig, PassThroughMode,
};
use flashsim::oracle::oracle_rber;
use flashsim::program::program_lsb;
use flashsim::scenarios::{
    calibrate, disturbed_benchmark_block, lifetime_report, run_interference_characterization,
    run_interference_exploit, run_read_disturb_characterization, run_read_disturb_exploit, ReadDisturbLayout,
    ReadDisturbOptions, WordlineClass,
};
use flashsim::{shadow_order, Block, PageData, PageKind, StateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    lo <= x && x <= hi
}

fn interference_ratio() -> Outcome {
    let (cfg, _) = calibrate(&SimConfig::default(), 1).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let rep = run_interference_characterization(&cfg, 1).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let v: Vec<f64> = ["A", "B", "C", "D"].iter().map(|l| rep.normalized(l)).collect();
    let monotone = v.windows(2).all(|w| w[0] <= w[1]);
    let d = v[3];
    check(
        within(d, 4.9 * 0.85, 4.9 * 1.15) && monotone && secs < 60.0 && v[0] == 1.0,
        format!("A..D = {v:.3?}, runtime {secs:.1} s"),
    )
}

fn read_disturb_disparity() -> Outcome {
    let cfg = SimConfig::default();
    let opts = ReadDisturbOptions { classes: true, adaptive: false };
    let rep = run_read_disturb_characterization(&cfg, cfg.char_reads, 1, opts).map_err(|e| e.to_string())?;
    let r = rep.partial_full_ratio();
    check(r >= 10.0, format!("partial/full LSB RBER ratio {r:.2} at {} reads", cfg.char_reads))
}

fn multi_vpass_efficacy() -> Outcome {
    let cfg = SimConfig::default();
    let opts = ReadDisturbOptions { classes: true, adaptive: false };
    let rep = run_read_disturb_characterization(&cfg, cfg.char_reads, 1, opts).map_err(|e| e.to_string())?;
    let pooled = rep.pooled_reduction();
    let p = rep.class(WordlineClass::Partial).reduction();
    let u = rep.class(WordlineClass::Unprogrammed).reduction();
    check(
        within(pooled, 0.62, 0.82),
        format!("pooled reduction {:.1}% (partial {:.1}%, unprogrammed {:.1}%)", 100.0 * pooled, 100.0 * p, 100.0 * u),
    )
}

/// Random histories: random geometry, wear, data, policy and bursts of
/// reads between program steps.
fn buffering_histories() -> Outcome {
    let histories = 120;
    let mut buffered_errors = 0usize;
    let mut unbuffered_errors = 0usize;
    for h in 0..histories {
        for buffer in [true, false] {
            let mut rng = ChaCha8Rng::seed_from_u64(0xB0F + h);
            let w = rng.random_range(3..12);
            let c = 512;
            let pe = rng.random_range(0..3000);
            let mut cfg = SimConfig::default();
            cfg.disturb.alpha_rd *= rng.random_range(1.0..10.0);
            let mode = if rng.random_bool(0.5) { PassThroughMode::Single } else { PassThroughMode::Multiple };
            let m = MitigationConfig { buffer_lsb_in_controller: buffer, pass_through: mode, ..MitigationConfig::baseline() };
            let mut s = cfg.controller(m);
            s.ecc = EccConfig { codeword_data_bits: c, t: 8 };
            let mut block = Block::at_wear(w, c, cfg.model.clone(), rng.random(), cfg.disturb.pe_sigma_growth, pe)
                .map_err(|e| e.to_string())?;
            let mut ctl = Controller::new(&mut block, s);
            for idx in 0..2 * w {
                let data = PageData::random(c, &mut rng);
                ctl.write_page(&data).map_err(|e| e.to_string())?;
                if rng.random_bool(0.5) {
                    let page = rng.random_range(0..=idx);
                    let reads = rng.random_range(1..20_000);
                    ctl.read_page_repeated(page, reads).map_err(|e| e.to_string())?;
                }
            }
            let n = ctl.program_errors().len();
            if buffer {
                buffered_errors += n;
            } else {
                unbuffered_errors += n;
            }
        }
    }
    check(
        buffered_errors == 0 && unbuffered_errors > 0,
        format!(
            "{histories} histories: {buffered_errors} program errors buffered, {unbuffered_errors} with on-chip LSB reads"
        ),
    )
}

/// Independent valley search: count each bin straight from the voltages
/// and scan every run.
fn brute_force_half_steps(vth: &[f64], lo: f64, hi: f64, step: f64) -> u16 {
    let mut n = 1;
    while lo + n as f64 * step < hi - 1e-12 {
        n += 1;
    }
    let edge = |k: usize| lo + k as f64 * step;
    let counts: Vec<usize> =
        (0..n).map(|k| vth.iter().filter(|&&v| v >= edge(k) && v < edge(k + 1)).count()).collect();
    let min = *counts.iter().min().unwrap();
    let (mut best_start, mut best_len) = (0, 0);
    for s in 0..n {
        let len = counts[s..].iter().take_while(|&&x| x == min).count();
        if len > best_len {
            best_start = s;
            best_len = len;
        }
    }
    (2 * best_start + best_len) as u16
}

fn adaptive_efficacy() -> Outcome {
    let cfg = SimConfig::default();
    let opts = ReadDisturbOptions { classes: false, adaptive: true };
    let rep = run_read_disturb_characterization(&cfg, cfg.char_reads, 1, opts).map_err(|e| e.to_string())?;
    let bench = rep.adaptive.ok_or("benchmark missing")?;
    let red = bench.reduction();
    let mut block = disturbed_benchmark_block(&cfg, cfg.adaptive_reads, 1, PassThroughMode::Single)
        .map_err(|e| e.to_string())?;
    let layout = ReadDisturbLayout::new(cfg.wordlines);
    let mut mismatches = 0;
    for wl in layout.partial.clone() {
        let vth = block.vth(wl).to_vec();
        let expected = brute_force_half_steps(&vth, cfg.model.mean_er, cfg.model.mean_tp, cfg.retry_step);
        let mut scratch = block.clone();
        let got = adaptive_lsb_vref(&mut scratch, wl, cfg.retry_step, &cfg.disturb, PassThroughMode::Single)
            .map_err(|e| e.to_string())?;
        if got.half_steps != expected {
            mismatches += 1;
        }
    }
    check(
        within(red, 0.21, 0.33) && mismatches == 0,
        format!(
            "reduction {:.1}% over {} wordlines, {} argmin mismatches against brute force",
            100.0 * red,
            layout.partial.len(),
            mismatches
        ),
    )
}

fn latency_accounting() -> Outcome {
    let cfg = SimConfig::default();
    let o = latency_overhead(true, cfg.cells_per_wordline, &cfg.timing);
    // The same figure from an accounted write of a whole block.
    let c = cfg.cells_per_wordline;
    let mut accounts = Vec::new();
    for buffer in [false, true] {
        let mut block = Block::new(8, c, cfg.model.clone(), 3).map_err(|e| e.to_string())?;
        let m = MitigationConfig { buffer_lsb_in_controller: buffer, ..MitigationConfig::baseline() };
        let mut ctl = Controller::new(&mut block, cfg.controller(m));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..16 {
            ctl.write_page(&PageData::random(c, &mut rng)).map_err(|e| e.to_string())?;
        }
        accounts.push(*ctl.account());
    }
    let measured = accounts[1].overhead_vs(&accounts[0]);
    check(
        within(o.common, 4.4, 5.4) && o.min >= 1.3 && o.max <= 15.7 && o.min <= o.max && (measured - o.common).abs() < 1e-9,
        format!("common {:.2}%, min {:.2}%, max {:.2}%, accounted {:.2}%", o.common, o.min, o.max, measured),
    )
}

fn lifetime_gain() -> Outcome {
    let cfg = SimConfig::default();
    let rep = lifetime_report(&cfg, MitigationConfig::baseline(), cfg.lifetime_reads, 1).map_err(|e| e.to_string())?;
    let g = rep.gain();
    check(
        within(g, 0.11, 0.21),
        format!("single {} cycles, multiple {} cycles, gain {:.1}%", rep.single, rep.multiple, 100.0 * g),
    )
}

fn exploits() -> Outcome {
    let cfg = SimConfig::default();
    let e = |x: flashsim::Error| x.to_string();
    let base = MitigationConfig::baseline();
    let all = MitigationConfig::all();
    let pi = run_interference_exploit(&cfg, base, 1).map_err(e)?;
    let rd = run_read_disturb_exploit(&cfg, base, cfg.attack_reads, 1).map_err(e)?;
    let pi_all = run_interference_exploit(&cfg, all, 1).map_err(e)?;
    let rd_all = run_read_disturb_exploit(&cfg, all, cfg.attack_reads, 1).map_err(e)?;
    check(
        pi.induced() > 0
            && rd.induced() > 0
            && rd.corrupted_pages() >= 2
            && pi_all.uncorrectable() == 0
            && rd_all.uncorrectable() == 0,
        format!(
            "interference: {} induced flips; read disturb: {} induced flips over {} corrupted pages; \
             all mitigations: {} + {} uncorrectable codewords",
            pi.induced(),
            rd.induced(),
            rd.corrupted_pages(),
            pi_all.uncorrectable(),
            rd_all.uncorrectable()
        ),
    )
}

/// Monte-Carlo LSB RBER of a partially-programmed block against the
/// two-Gaussian expression.
fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let settings = 12;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for s in 0..settings {
        let mut m = StateModel {
            mean_er: rng.random_range(-0.05..0.05),
            sigma_er: rng.random_range(0.04..0.08),
            mean_tp: rng.random_range(0.25..0.32),
            sigma_tp: rng.random_range(0.03..0.045),
            ..StateModel::default()
        };
        let vref = rng.random_range(m.mean_er + 0.6 * (m.mean_tp - m.mean_er)..m.mean_tp - 0.05);
        m.vref_partial = vref;
        let (w, c) = (3, 65536);
        let mut block = Block::new(w, c, m.clone(), 1000 + s).map_err(|e| e.to_string())?;
        let (mut errors, mut ones) = (0usize, 0usize);
        for wl in 0..w {
            let data = PageData::random(c, &mut rng);
            program_lsb(&mut block, wl, &data).map_err(|e| e.to_string())?;
            ones += data.count_ones();
            errors += block.sense(wl, vref).hamming(&data);
        }
        let n = (w * c) as f64;
        let p = oracle_rber(m.mean_er, m.sigma_er, m.mean_tp, m.sigma_tp, vref, ones as f64 / n)
            .map_err(|e| e.to_string())?;
        let se = (p * (1.0 - p) / n).sqrt();
        let z = (errors as f64 / n - p).abs() / se;
        worst = worst.max(z);
        if z > 3.0 {
            failures += 1;
        }
    }
    check(failures == 0, format!("{settings} settings, worst deviation {worst:.2} standard errors"))
}

const SMALL: &str = "\
wordlines = 16
cells_per_wordline = 8192
lifetime_wordlines = 8
lifetime_cells = 8192
lifetime_max_pe = 4000
victim_pages = 6
";

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).map_err(|e| e.to_string())?;
    let subs = [
        "characterize-interference",
        "characterize-read-disturb",
        "attack-interference",
        "attack-read-disturb",
        "lifetime",
        "calibrate",
    ];
    let mut differing = Vec::new();
    for sub in subs {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{sub}-{run}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_flashsim"))
                .args([sub, "--seed", "7", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{sub} exited with {status}"));
            }
            outs.push(read(&out)?);
        }
        if outs[0] != outs[1] || outs[0].is_empty() {
            differing.push(sub);
        }
    }
    check(differing.is_empty(), format!("{} subcommands, differing: {differing:?}", subs.len()))
}

fn read(p: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn sequencing() -> Outcome {
    for w in 3..=256 {
        let order = shadow_order(w).map_err(|e| e.to_string())?;
        if order.len() != 2 * w {
            return Err(format!("W={w}: {} pages", order.len()));
        }
        let mut pos = vec![[usize::MAX; 2]; w];
        for (i, s) in order.iter().enumerate() {
            let k = s.kind as usize;
            if s.wordline >= w || pos[s.wordline][k] != usize::MAX {
                return Err(format!("W={w}: not a permutation at page {i}"));
            }
            pos[s.wordline][k] = i;
        }
        for (n, p) in pos.iter().enumerate() {
            if p[0] >= p[1] {
                return Err(format!("W={w}: MSB of wordline {n} precedes its LSB"));
            }
            // Program steps on adjacent wordlines after this one is full.
            let after = order[p[1] + 1..].iter().filter(|s| s.wordline.abs_diff(n) == 1).count();
            let expected = usize::from(n + 1 < w);
            if after != expected {
                return Err(format!("W={w}: wordline {n} sees {after} adjacent steps after full programming"));
            }
        }
        if order[0].kind != PageKind::Lsb || order[0].wordline != 0 {
            return Err(format!("W={w}: first page is not LSB of wordline 0"));
        }
    }
    check(true, "W = 3..=256: permutation, LSB before MSB, one adjacent step after full programming".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("interference ratio after calibration", interference_ratio),
        ("read-disturb partial/full disparity", read_disturb_disparity),
        ("multiple pass-through reduction", multi_vpass_efficacy),
        ("buffered LSB eliminates program errors", buffering_histories),
        ("learned LSB reference reduction and argmin", adaptive_efficacy),
        ("buffering latency overhead", latency_accounting),
        ("lifetime gain of multiple pass-through", lifetime_gain),
        ("exploits end to end", exploits),
        ("Monte-Carlo RBER against the analytic oracle", oracle_equivalence),
        ("byte-identical CSV per subcommand", determinism),
        ("shadow program order invariants", sequencing),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
