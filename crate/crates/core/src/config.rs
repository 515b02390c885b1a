//! Flat `key = value` configuration with `#` comments.
//!
//! Omitted keys keep their defaults, unknown keys are rejected, and every
//! error carries the line it came from. [`SimConfig::emit`] writes every key
//! in a fixed order, so `emit(parse(emit(parse(x))))` equals
//! `emit(parse(x))`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::array::StateModel;
use crate::controller::{ControllerSettings, EccConfig, MitigationConfig, PassThroughMode, TimingTable};
use crate::disturb::DisturbParams;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub wordlines: usize,
    pub cells_per_wordline: usize,
    pub model: StateModel,
    pub disturb: DisturbParams,
    pub ecc: EccConfig,
    /// Reduced correction capability used by the exploit scenarios.
    pub ecc_t_demo: usize,
    pub mitigations: MitigationConfig,
    pub timing: TimingTable,
    pub retry_step: f64,
    pub adaptive_trigger_reads: u64,
    /// Wear of the characterization blocks.
    pub char_pe_cycles: u32,
    /// Reads of the read-disturb characterization.
    pub char_reads: u64,
    /// Wear of the read-disturb characterization block.
    pub rd_pe_cycles: u32,
    /// Reads preceding the learned-reference benchmark.
    pub adaptive_reads: u64,
    /// Wear of the exploit blocks.
    pub attack_pe_cycles: u32,
    pub attack_reads: u64,
    /// Pages the read-disturb exploit's victim writes after the attack.
    pub victim_pages: usize,
    pub lifetime_wordlines: usize,
    pub lifetime_cells: usize,
    /// Reads of the first page per P/E cycle in the lifetime workload.
    pub lifetime_reads: u64,
    pub lifetime_max_pe: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            wordlines: 128,
            cells_per_wordline: 65536,
            model: StateModel::default(),
            disturb: DisturbParams::default(),
            ecc: EccConfig::default(),
            ecc_t_demo: 8,
            mitigations: MitigationConfig::baseline(),
            timing: TimingTable::default(),
            retry_step: 0.01,
            adaptive_trigger_reads: 64,
            char_pe_cycles: 2000,
            // Read counts fitted by `flashsim calibrate` (seed 1).
            char_reads: 5528,
            rd_pe_cycles: 1000,
            adaptive_reads: 99,
            attack_pe_cycles: 1000,
            attack_reads: 1000,
            victim_pages: 16,
            lifetime_wordlines: 32,
            lifetime_cells: 16384,
            lifetime_reads: 982,
            lifetime_max_pe: 20000,
        }
    }
}

/// Every accepted key, in emit order.
pub const KEYS: &[&str] = &[
    "seed",
    "wordlines",
    "cells_per_wordline",
    "mean_er",
    "sigma_er",
    "mean_tp",
    "sigma_tp",
    "mean_p1",
    "sigma_p1",
    "mean_p2",
    "sigma_p2",
    "mean_p3",
    "sigma_p3",
    "vref_partial",
    "vref_a",
    "vref_b",
    "vref_c",
    "vpass",
    "vpass_partial",
    "vpass_erase",
    "ispp_step",
    "kappa_wl",
    "kappa_bl",
    "alpha_rd",
    "pe_sigma_growth",
    "ecc_codeword_bits",
    "ecc_t",
    "ecc_t_demo",
    "buffer_lsb_in_controller",
    "adaptive_vref",
    "pass_through",
    "scramble",
    "timing_sense",
    "timing_ispp_lsb",
    "timing_ispp_msb",
    "timing_transfer_common",
    "timing_transfer_min",
    "timing_transfer_max",
    "retry_step",
    "adaptive_trigger_reads",
    "char_pe_cycles",
    "char_reads",
    "rd_pe_cycles",
    "adaptive_reads",
    "attack_pe_cycles",
    "attack_reads",
    "victim_pages",
    "lifetime_wordlines",
    "lifetime_cells",
    "lifetime_reads",
    "lifetime_max_pe",
];

fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("malformed value {v:?}"))
}

fn float(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("value {v:?} is not finite"))
    }
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

impl SimConfig {
    /// Sets one key from its text form. Returns `Ok(false)` for an unknown
    /// key.
    fn set(&mut self, key: &str, v: &str) -> std::result::Result<bool, String> {
        let m = &mut self.model;
        let d = &mut self.disturb;
        let t = &mut self.timing;
        match key {
            "seed" => self.seed = num(v)?,
            "wordlines" => self.wordlines = num(v)?,
            "cells_per_wordline" => self.cells_per_wordline = num(v)?,
            "mean_er" => m.mean_er = float(v)?,
            "sigma_er" => m.sigma_er = float(v)?,
            "mean_tp" => m.mean_tp = float(v)?,
            "sigma_tp" => m.sigma_tp = float(v)?,
            "mean_p1" => m.mean_p1 = float(v)?,
            "sigma_p1" => m.sigma_p1 = float(v)?,
            "mean_p2" => m.mean_p2 = float(v)?,
            "sigma_p2" => m.sigma_p2 = float(v)?,
            "mean_p3" => m.mean_p3 = float(v)?,
            "sigma_p3" => m.sigma_p3 = float(v)?,
            "vref_partial" => m.vref_partial = float(v)?,
            "vref_a" => m.vref_a = float(v)?,
            "vref_b" => m.vref_b = float(v)?,
            "vref_c" => m.vref_c = float(v)?,
            "vpass" => m.vpass = float(v)?,
            "vpass_partial" => m.vpass_partial = float(v)?,
            "vpass_erase" => m.vpass_erase = float(v)?,
            "ispp_step" => m.ispp_step = float(v)?,
            "kappa_wl" => d.kappa_wl = float(v)?,
            "kappa_bl" => d.kappa_bl = float(v)?,
            "alpha_rd" => d.alpha_rd = float(v)?,
            "pe_sigma_growth" => d.pe_sigma_growth = float(v)?,
            "ecc_codeword_bits" => self.ecc.codeword_data_bits = num(v)?,
            "ecc_t" => self.ecc.t = num(v)?,
            "ecc_t_demo" => self.ecc_t_demo = num(v)?,
            "buffer_lsb_in_controller" => self.mitigations.buffer_lsb_in_controller = flag(v)?,
            "adaptive_vref" => self.mitigations.adaptive_vref = flag(v)?,
            "pass_through" => {
                self.mitigations.pass_through = match v {
                    "single" => PassThroughMode::Single,
                    "multiple" => PassThroughMode::Multiple,
                    _ => return Err(format!("expected single or multiple, got {v:?}")),
                }
            }
            "scramble" => self.mitigations.scramble = flag(v)?,
            "timing_sense" => t.sense = float(v)?,
            "timing_ispp_lsb" => t.ispp_lsb = float(v)?,
            "timing_ispp_msb" => t.ispp_msb = float(v)?,
            "timing_transfer_common" => t.transfer_common = float(v)?,
            "timing_transfer_min" => t.transfer_min = float(v)?,
            "timing_transfer_max" => t.transfer_max = float(v)?,
            "retry_step" => self.retry_step = float(v)?,
            "adaptive_trigger_reads" => self.adaptive_trigger_reads = num(v)?,
            "char_pe_cycles" => self.char_pe_cycles = num(v)?,
            "char_reads" => self.char_reads = num(v)?,
            "rd_pe_cycles" => self.rd_pe_cycles = num(v)?,
            "adaptive_reads" => self.adaptive_reads = num(v)?,
            "attack_pe_cycles" => self.attack_pe_cycles = num(v)?,
            "attack_reads" => self.attack_reads = num(v)?,
            "victim_pages" => self.victim_pages = num(v)?,
            "lifetime_wordlines" => self.lifetime_wordlines = num(v)?,
            "lifetime_cells" => self.lifetime_cells = num(v)?,
            "lifetime_reads" => self.lifetime_reads = num(v)?,
            "lifetime_max_pe" => self.lifetime_max_pe = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn get(&self, key: &str) -> String {
        let m = &self.model;
        let d = &self.disturb;
        let t = &self.timing;
        match key {
            "seed" => self.seed.to_string(),
            "wordlines" => self.wordlines.to_string(),
            "cells_per_wordline" => self.cells_per_wordline.to_string(),
            "mean_er" => m.mean_er.to_string(),
            "sigma_er" => m.sigma_er.to_string(),
            "mean_tp" => m.mean_tp.to_string(),
            "sigma_tp" => m.sigma_tp.to_string(),
            "mean_p1" => m.mean_p1.to_string(),
            "sigma_p1" => m.sigma_p1.to_string(),
            "mean_p2" => m.mean_p2.to_string(),
            "sigma_p2" => m.sigma_p2.to_string(),
            "mean_p3" => m.mean_p3.to_string(),
            "sigma_p3" => m.sigma_p3.to_string(),
            "vref_partial" => m.vref_partial.to_string(),
            "vref_a" => m.vref_a.to_string(),
            "vref_b" => m.vref_b.to_string(),
            "vref_c" => m.vref_c.to_string(),
            "vpass" => m.vpass.to_string(),
            "vpass_partial" => m.vpass_partial.to_string(),
            "vpass_erase" => m.vpass_erase.to_string(),
            "ispp_step" => m.ispp_step.to_string(),
            "kappa_wl" => d.kappa_wl.to_string(),
            "kappa_bl" => d.kappa_bl.to_string(),
            "alpha_rd" => d.alpha_rd.to_string(),
            "pe_sigma_growth" => d.pe_sigma_growth.to_string(),
            "ecc_codeword_bits" => self.ecc.codeword_data_bits.to_string(),
            "ecc_t" => self.ecc.t.to_string(),
            "ecc_t_demo" => self.ecc_t_demo.to_string(),
            "buffer_lsb_in_controller" => self.mitigations.buffer_lsb_in_controller.to_string(),
            "adaptive_vref" => self.mitigations.adaptive_vref.to_string(),
            "pass_through" => self.mitigations.pass_through.name().to_string(),
            "scramble" => self.mitigations.scramble.to_string(),
            "timing_sense" => t.sense.to_string(),
            "timing_ispp_lsb" => t.ispp_lsb.to_string(),
            "timing_ispp_msb" => t.ispp_msb.to_string(),
            "timing_transfer_common" => t.transfer_common.to_string(),
            "timing_transfer_min" => t.transfer_min.to_string(),
            "timing_transfer_max" => t.transfer_max.to_string(),
            "retry_step" => self.retry_step.to_string(),
            "adaptive_trigger_reads" => self.adaptive_trigger_reads.to_string(),
            "char_pe_cycles" => self.char_pe_cycles.to_string(),
            "char_reads" => self.char_reads.to_string(),
            "rd_pe_cycles" => self.rd_pe_cycles.to_string(),
            "adaptive_reads" => self.adaptive_reads.to_string(),
            "attack_pe_cycles" => self.attack_pe_cycles.to_string(),
            "attack_reads" => self.attack_reads.to_string(),
            "victim_pages" => self.victim_pages.to_string(),
            "lifetime_wordlines" => self.lifetime_wordlines.to_string(),
            "lifetime_cells" => self.lifetime_cells.to_string(),
            "lifetime_reads" => self.lifetime_reads.to_string(),
            "lifetime_max_pe" => self.lifetime_max_pe.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// `(key, value)` pairs in emit order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k))).collect()
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<SimConfig> {
        let mut cfg = SimConfig::default();
        let mut lines: HashMap<&'static str, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(Error::Config { line, message: format!("expected `key = value`, got {body:?}") });
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|&&x| x == k) else {
                return Err(Error::Config { line, message: format!("unknown key {k:?}") });
            };
            if let Some(prev) = lines.insert(key, line) {
                return Err(Error::Config { line, message: format!("duplicate key {key} (first set on line {prev})") });
            }
            cfg.set(key, v).map_err(|m| Error::Config { line, message: format!("{key}: {m}") })?;
        }
        cfg.validate().map_err(|e| match e {
            Error::Param { key, reason } => Error::Config {
                line: lines.get(key).copied().unwrap_or(0),
                message: format!("{key}: {reason}"),
            },
            other => other,
        })?;
        Ok(cfg)
    }

    /// Normalized text form: every key, fixed order.
    pub fn emit(&self) -> String {
        let mut s = String::from("# flashsim configuration\n");
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.wordlines < 3 {
            return Err(Error::param("wordlines", "must be at least 3"));
        }
        if self.cells_per_wordline == 0 {
            return Err(Error::param("cells_per_wordline", "must be at least 1"));
        }
        self.model.validate()?;
        let d = &self.disturb;
        for (k, v) in [
            ("kappa_wl", d.kappa_wl),
            ("kappa_bl", d.kappa_bl),
            ("alpha_rd", d.alpha_rd),
            ("pe_sigma_growth", d.pe_sigma_growth),
        ] {
            if v < 0.0 {
                return Err(Error::param(k, "must be nonnegative"));
            }
        }
        if d.kappa_wl + 2.0 * d.kappa_bl >= 1.0 {
            return Err(Error::param("kappa_wl", "kappa_wl + 2 kappa_bl must be below 1"));
        }
        if d.alpha_rd >= 1.0 {
            return Err(Error::param("alpha_rd", "must be below 1"));
        }
        self.ecc.validate(self.cells_per_wordline)?;
        if self.ecc_t_demo == 0 {
            return Err(Error::param("ecc_t_demo", "must be at least 1"));
        }
        self.timing.validate()?;
        // Written negated so NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.retry_step > 0.0) {
            return Err(Error::param("retry_step", "must be positive"));
        }
        if self.victim_pages == 0 {
            return Err(Error::param("victim_pages", "must be at least 1"));
        }
        if self.lifetime_wordlines < 3 {
            return Err(Error::param("lifetime_wordlines", "must be at least 3"));
        }
        if self.lifetime_cells == 0 || !self.lifetime_cells.is_multiple_of(self.ecc.codeword_data_bits) {
            return Err(Error::param("lifetime_cells", "must be a positive multiple of ecc_codeword_bits"));
        }
        if self.wordlines < 6 {
            return Err(Error::param("wordlines", "scenarios need at least 6 wordlines"));
        }
        Ok(())
    }

    /// Controller settings with the given mitigations.
    pub fn controller(&self, mitigations: MitigationConfig) -> ControllerSettings {
        ControllerSettings {
            mitigations,
            disturb: self.disturb.clone(),
            ecc: self.ecc,
            timing: self.timing.clone(),
            scramble_seed: self.seed,
            retry_step: self.retry_step,
            adaptive_trigger_reads: self.adaptive_trigger_reads,
        }
    }
}
