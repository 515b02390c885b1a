//! Threshold ECC model: each codeword corrects up to `t` bit errors.

use crate::array::PageData;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EccConfig {
    pub codeword_data_bits: usize,
    pub t: usize,
}

impl Default for EccConfig {
    fn default() -> Self {
        EccConfig { codeword_data_bits: 8192, t: 40 }
    }
}

impl EccConfig {
    pub fn validate(&self, page_bits: usize) -> Result<()> {
        if self.t == 0 {
            return Err(Error::param("ecc_t", "must be at least 1"));
        }
        if self.codeword_data_bits == 0 || !page_bits.is_multiple_of(self.codeword_data_bits) {
            return Err(Error::param(
                "ecc_codeword_bits",
                format!("must divide the page size of {page_bits} bits"),
            ));
        }
        Ok(())
    }

    /// Largest raw bit error rate the code is taken to tolerate.
    pub fn rber_limit(&self) -> f64 {
        self.t as f64 / self.codeword_data_bits as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EccReport {
    pub bits: usize,
    pub codewords: usize,
    pub raw_errors: usize,
    /// Errors left in codewords that exceeded `t`.
    pub residual_errors: usize,
    pub uncorrectable: usize,
}

impl EccReport {
    pub fn raw_rber(&self) -> f64 {
        self.raw_errors as f64 / self.bits.max(1) as f64
    }

    pub fn corrected_rber(&self) -> f64 {
        self.residual_errors as f64 / self.bits.max(1) as f64
    }

    pub fn merge(&mut self, o: &EccReport) {
        self.bits += o.bits;
        self.codewords += o.codewords;
        self.raw_errors += o.raw_errors;
        self.residual_errors += o.residual_errors;
        self.uncorrectable += o.uncorrectable;
    }
}

/// Decodes `raw` against the stored ground truth. Correctable codewords come
/// back clean, uncorrectable ones keep their raw bits. A trailing short
/// codeword is allowed.
pub fn decode(raw: &PageData, truth: &PageData, cfg: &EccConfig) -> (PageData, EccReport) {
    assert_eq!(raw.len(), truth.len());
    let n = raw.len();
    let cw = cfg.codeword_data_bits.max(1);
    let mut out = raw.clone();
    let mut rep = EccReport { bits: n, ..Default::default() };
    let mut start = 0;
    while start < n {
        let end = (start + cw).min(n);
        let errs = raw.hamming_range(truth, start, end);
        rep.codewords += 1;
        rep.raw_errors += errs;
        if errs > cfg.t {
            rep.uncorrectable += 1;
            rep.residual_errors += errs;
        } else if errs > 0 {
            for i in start..end {
                out.set(i, truth.get(i));
            }
        }
        start = end;
    }
    (out, rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip(p: &mut PageData, idx: impl IntoIterator<Item = usize>) {
        for i in idx {
            let b = p.get(i);
            p.set(i, !b);
        }
    }

    #[test]
    fn t_errors_corrected() {
        let cfg = EccConfig { codeword_data_bits: 1024, t: 8 };
        let truth = PageData::from_fn(4096, |i| i % 3 == 0);
        let mut raw = truth.clone();
        for cw in 0..4 {
            flip(&mut raw, (0..8).map(|k| cw * 1024 + k * 7));
        }
        let (out, rep) = decode(&raw, &truth, &cfg);
        assert_eq!(out, truth);
        assert_eq!(rep.raw_errors, 32);
        assert_eq!(rep.residual_errors, 0);
        assert_eq!(rep.uncorrectable, 0);
        assert_eq!(rep.corrected_rber(), 0.0);
    }

    #[test]
    fn t_plus_one_is_uncorrectable() {
        let cfg = EccConfig { codeword_data_bits: 1024, t: 8 };
        let truth = PageData::zeros(4096);
        let mut raw = truth.clone();
        flip(&mut raw, 2048..2057);
        flip(&mut raw, [5]);
        let (out, rep) = decode(&raw, &truth, &cfg);
        assert_eq!(rep.uncorrectable, 1);
        assert_eq!(rep.residual_errors, 9);
        assert_eq!(out.hamming(&truth), 9);
    }

    #[test]
    fn validation() {
        assert!(EccConfig::default().validate(65536).is_ok());
        assert!(EccConfig::default().validate(1000).is_err());
        assert!(EccConfig { codeword_data_bits: 8192, t: 0 }.validate(65536).is_err());
        assert!((EccConfig::default().rber_limit() - 40.0 / 8192.0).abs() < 1e-15);
    }
}
