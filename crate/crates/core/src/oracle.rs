//! Analytic two-Gaussian misclassification oracle.

use crate::error::{Error, Result};

/// Standard normal upper tail.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Expected fraction of misread cells when a lower population
/// N(mu_lo, sigma_lo) with weight `mix_lo` and an upper population
/// N(mu_hi, sigma_hi) are split at `vref`.
pub fn oracle_rber(mu_lo: f64, sigma_lo: f64, mu_hi: f64, sigma_hi: f64, vref: f64, mix_lo: f64) -> Result<f64> {
    if !(mu_lo < vref && vref < mu_hi) {
        return Err(Error::param("vref", format!("must lie in ({mu_lo}, {mu_hi})")));
    }
    if !(0.0..=1.0).contains(&mix_lo) {
        return Err(Error::param("mix_lo", "must lie in [0, 1]"));
    }
    if !(sigma_lo > 0.0 && sigma_hi > 0.0) {
        return Err(Error::param("sigma", "must be positive"));
    }
    Ok(mix_lo * q((vref - mu_lo) / sigma_lo) + (1.0 - mix_lo) * q((mu_hi - vref) / sigma_hi))
}

/// Reusable oracle for one boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RberOracle {
    pub mu_lo: f64,
    pub sigma_lo: f64,
    pub mu_hi: f64,
    pub sigma_hi: f64,
    pub vref: f64,
}

impl RberOracle {
    pub fn rber(&self, mix_lo: f64) -> Result<f64> {
        oracle_rber(self.mu_lo, self.sigma_lo, self.mu_hi, self.sigma_hi, self.vref, mix_lo)
    }
}
