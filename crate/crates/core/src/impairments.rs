//! Per-TX-RF-chain hardware impairments: memoryless third-order PA
//! nonlinearity and IQ-imbalance image, plus dBm/watt conversion.
//!
//! Samples are complex baseband amplitudes with `|x|^2` in watts at the PA
//! input. The cubic coefficient is `1 / P_iip3`, which places the two-tone
//! third-order intercept (per-tone input power) exactly at `iip3_dbm`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(p_w: f64) -> f64 {
    10.0 * p_w.log10() + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxImpairmentConfig {
    /// Input-referred third-order intercept, dBm. `+inf` disables the PA term.
    pub iip3_dbm: f64,
    /// Image rejection ratio, dB. `+inf` disables the image.
    pub irr_db: f64,
    pub enabled: bool,
    /// Small-signal PA gain separating the PA input (where IIP3 is referred)
    /// from the radiated power.
    #[serde(default = "default_pa_gain_db")]
    pub pa_gain_db: f64,
}

fn default_pa_gain_db() -> f64 {
    TxImpairmentConfig::DEFAULT_PA_GAIN_DB
}

impl Default for TxImpairmentConfig {
    fn default() -> Self {
        Self {
            iip3_dbm: 20.0,
            irr_db: 30.0,
            enabled: true,
            pa_gain_db: Self::DEFAULT_PA_GAIN_DB,
        }
    }
}

impl TxImpairmentConfig {
    pub const DEFAULT_PA_GAIN_DB: f64 = 60.0;

    pub fn ideal() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iip3_dbm.is_nan() || self.iip3_dbm == f64::NEG_INFINITY {
            return Err(Error::config("impairments.iip3_dbm", "must be finite or +inf"));
        }
        if self.enabled && !(self.irr_db > 0.0) {
            return Err(Error::config("impairments.irr_db", "must be > 0 dB when enabled"));
        }
        if !self.pa_gain_db.is_finite() {
            return Err(Error::config("impairments.pa_gain_db", "must be finite"));
        }
        Ok(())
    }

    /// Image coefficient `nu = 10^(-irr/20)`.
    pub fn image_coefficient(&self) -> f64 {
        image_coefficient(self.irr_db)
    }
}

pub fn image_coefficient(irr_db: f64) -> f64 {
    if irr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-irr_db / 20.0)
    }
}

/// Cubic coefficient `1 / P_iip3` (zero for an ideal PA).
pub fn cubic_coefficient(iip3_dbm: f64) -> f64 {
    if iip3_dbm == f64::INFINITY {
        0.0
    } else {
        1.0 / dbm_to_watt(iip3_dbm)
    }
}

/// `y = x - x|x|^2 / P_iip3` (compressive, odd).
#[inline]
pub fn pa_nonlinearity(x: Complex64, iip3_dbm: f64) -> Complex64 {
    let beta = cubic_coefficient(iip3_dbm);
    x - x * (beta * x.norm_sqr())
}

/// `y = x + nu conj(x)`.
#[inline]
pub fn iq_imbalance(x: Complex64, irr_db: f64) -> Complex64 {
    x + x.conj() * image_coefficient(irr_db)
}

#[inline]
fn chain_sample(x: Complex64, nu: f64, beta: f64) -> Complex64 {
    let u = x + x.conj() * nu;
    u - u * (beta * u.norm_sqr())
}

/// IQ imbalance followed by the PA, applied to each chain's sample.
pub fn apply_tx_chain(x: &[Complex64], cfg: &TxImpairmentConfig) -> Vec<Complex64> {
    if !cfg.enabled {
        return x.to_vec();
    }
    let nu = cfg.image_coefficient();
    let beta = cubic_coefficient(cfg.iip3_dbm);
    x.iter().map(|&s| chain_sample(s, nu, beta)).collect()
}

/// Applies the chain model to a burst (rows = chains, columns = time) whose
/// amplitudes are referred to the PA output: the burst is scaled down by the
/// PA gain, impaired, and scaled back up.
pub fn apply_tx_burst(x: &ComplexMatrix, cfg: &TxImpairmentConfig) -> ComplexMatrix {
    if !cfg.enabled {
        return x.clone();
    }
    let nu = cfg.image_coefficient();
    // x_out = g * f(x_out / g) with g = sqrt(G) reduces to a scaled beta.
    let beta = cubic_coefficient(cfg.iip3_dbm) / 10f64.powf(cfg.pa_gain_db / 10.0);
    x.map(|s| chain_sample(s, nu, beta))
}
