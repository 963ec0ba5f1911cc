//! Gaussian-signaling rate expressions.

use crate::beamforming::combiner_sinr;
use crate::error::{Error, Result};
use crate::linalg::{hermitize, log2det_hpd, ComplexMatrix};

fn noise_plus(noise_w: f64, cov: Option<&ComplexMatrix>, n: usize) -> Result<ComplexMatrix> {
    if !(noise_w > 0.0) {
        return Err(Error::Numerical(format!("noise power must be > 0, got {noise_w}")));
    }
    let mut r = ComplexMatrix::identity(n, n).scale(noise_w);
    if let Some(c) = cov {
        if c.shape() != (n, n) {
            return Err(Error::Dimension(
                "interference covariance does not match receiver".into(),
            ));
        }
        r += c;
    }
    Ok(hermitize(&r))
}

/// `log2 det(I + P H W W^H H^H (noise I + cov)^-1)`.
pub fn dl_rate(
    h: &ComplexMatrix,
    w: &ComplexMatrix,
    tx_power_w: f64,
    noise_w: f64,
    interference_cov: Option<&ComplexMatrix>,
) -> Result<f64> {
    if h.ncols() != w.nrows() {
        return Err(Error::Dimension("precoder rows do not match channel columns".into()));
    }
    let r = noise_plus(noise_w, interference_cov, h.nrows())?;
    if tx_power_w <= 0.0 {
        return Ok(0.0);
    }
    let hw = h * w;
    let total = hermitize(&(&r + (&hw * hw.adjoint()).scale(tx_power_w)));
    Ok((log2det_hpd(&total)? - log2det_hpd(&r)?).max(0.0))
}

/// Log-det UL rate with residual SI as Gaussian interference. `h` has the UL
/// power folded in; saturated chains are removed before evaluation.
pub fn ul_rate(
    h: &ComplexMatrix,
    noise_w: f64,
    residual_si_cov: Option<&ComplexMatrix>,
    saturated: &[bool],
) -> Result<f64> {
    let r = noise_plus(noise_w, residual_si_cov, h.nrows())?;
    let keep = unsaturated(saturated, h.nrows())?;
    if keep.is_empty() {
        return Ok(0.0);
    }
    let hs = h.select_rows(&keep);
    let rs = r.select_rows(&keep).select_columns(&keep);
    let total = hermitize(&(&rs + &hs * hs.adjoint()));
    Ok((log2det_hpd(&total)? - log2det_hpd(&rs)?).max(0.0))
}

/// Sum of per-stream `log2(1 + SINR)` for a linear combiner `g`.
pub fn linear_receiver_rate(g: &ComplexMatrix, h: &ComplexMatrix, r: &ComplexMatrix) -> f64 {
    combiner_sinr(g, h, r).iter().map(|s| (1.0 + s).log2()).sum()
}

pub fn unsaturated(saturated: &[bool], chains: usize) -> Result<Vec<usize>> {
    if saturated.len() != chains {
        return Err(Error::Dimension(format!(
            "{} saturation flags for {chains} chains",
            saturated.len()
        )));
    }
    Ok((0..chains).filter(|&i| !saturated[i]).collect())
}

/// Per-user SINR rates for single-antenna users: row `k` of `h` (gain
/// folded in) is user `k`, column `k` of `w` its stream. `distortion_cov` is
/// the TX-chain distortion covariance radiated alongside the signal.
pub fn mu_sum_rate(
    h: &ComplexMatrix,
    w: &ComplexMatrix,
    tx_power_w: f64,
    noise_w: f64,
    distortion_cov: Option<&ComplexMatrix>,
) -> Result<f64> {
    if h.ncols() != w.nrows() || h.nrows() != w.ncols() {
        return Err(Error::Dimension(format!(
            "{}x{} channel vs {}x{} precoder",
            h.nrows(),
            h.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    if !(noise_w > 0.0) {
        return Err(Error::Numerical(format!("noise power must be > 0, got {noise_w}")));
    }
    let hw = h * w;
    let mut total = 0.0;
    for k in 0..h.nrows() {
        let sig = tx_power_w * hw[(k, k)].norm_sqr();
        let mut den = noise_w;
        for j in (0..w.ncols()).filter(|&j| j != k) {
            den += tx_power_w * hw[(k, j)].norm_sqr();
        }
        if let Some(d) = distortion_cov {
            let hk = h.row(k);
            den += (hk * d * hk.adjoint())[(0, 0)].re.max(0.0);
        }
        total += (1.0 + sig / den).log2();
    }
    Ok(total)
}

/// Point-to-point capacity with water-filling over the channel eigenmodes.
pub fn waterfilling_capacity(h: &ComplexMatrix, tx_power_w: f64, noise_w: f64) -> f64 {
    let gains: Vec<f64> = crate::linalg::singular_values(h)
        .into_iter()
        .map(|s| s * s / noise_w)
        .filter(|&g| g > 0.0)
        .collect();
    let mut sorted = gains;
    sorted.sort_by(|a, b| b.total_cmp(a));
    for active in (1..=sorted.len()).rev() {
        let inv_sum: f64 = sorted[..active].iter().map(|g| 1.0 / g).sum();
        let level = (tx_power_w + inv_sum) / active as f64;
        if level > 1.0 / sorted[active - 1] {
            return sorted[..active].iter().map(|g| (level * g).log2()).sum();
        }
    }
    0.0
}
