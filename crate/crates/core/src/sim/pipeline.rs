//! Burst-level SI chain shared by all scenarios: ideal TX baseband, TX
//! impairments, analog taps, digital canceller, and the residual statistics
//! the rate expressions need.

use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::DigitalBeamformer;
use crate::cancellation::{
    apply_digital_canceller, select_taps, set_tap_gains, si_aware_precoder_projection, train_digital_canceller_reduced,
    CancellerState,
};
use crate::error::{Error, Result};
use crate::estimation::{mmse_estimate, orthogonal_pilots};
use crate::impairments::{apply_tx_burst, TxImpairmentConfig};
use crate::linalg::{frobenius_sq, hermitize, hpd_cholesky, row_norms_sq, sample_covariance, ComplexMatrix, ZERO};
use crate::rng::cn_matrix;

/// `sqrt(P) W s` for `samples` i.i.d. CN(0, 1) symbols per stream.
pub fn tx_burst<R: Rng + ?Sized>(w: &ComplexMatrix, power_w: f64, samples: usize, rng: &mut R) -> ComplexMatrix {
    let s = cn_matrix(w.ncols(), samples, 1.0, rng);
    (w * s).scale(power_w.sqrt())
}

/// Per-chain decomposition `x_tilde = a x + b conj(x) + e`. The DL receiver
/// is widely linear, so `a x + b conj(x)` is usable signal and only `e`
/// counts as distortion.
#[derive(Debug, Clone)]
pub struct TxDistortion {
    pub gain: Vec<Complex64>,
    pub cov: ComplexMatrix,
}

impl TxDistortion {
    pub fn none(chains: usize) -> Self {
        Self {
            gain: vec![Complex64::new(1.0, 0.0); chains],
            cov: ComplexMatrix::zeros(chains, chains),
        }
    }

    /// `diag(a) W`.
    pub fn apply_gain(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let mut out = w.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= self.gain[i];
        }
        out
    }
}

pub fn tx_distortion(x: &ComplexMatrix, x_tilde: &ComplexMatrix) -> TxDistortion {
    let (chains, t) = x.shape();
    let mut gain = vec![Complex64::new(1.0, 0.0); chains];
    let mut e = ComplexMatrix::zeros(chains, t);
    for n in 0..chains {
        // 2x2 normal equations of the widely linear fit.
        let (mut sxx, mut sxc, mut scc) = (0.0, ZERO, 0.0);
        let (mut rx, mut rc) = (ZERO, ZERO);
        for k in 0..t {
            let xv = x[(n, k)];
            let cv = xv.conj();
            let y = x_tilde[(n, k)];
            sxx += xv.norm_sqr();
            scc += cv.norm_sqr();
            sxc += xv.conj() * cv;
            rx += xv.conj() * y;
            rc += cv.conj() * y;
        }
        let det = sxx * scc - sxc.norm_sqr();
        let (a, b) = if det > 1e-12 * sxx * scc && sxx > 0.0 {
            let a = (rx * scc - sxc * rc) / det;
            let b = (rc * sxx - sxc.conj() * rx) / det;
            (a, b)
        } else if sxx > 0.0 {
            (rx / sxx, ZERO)
        } else {
            (Complex64::new(1.0, 0.0), ZERO)
        };
        gain[n] = a;
        for k in 0..t {
            let xv = x[(n, k)];
            e[(n, k)] = x_tilde[(n, k)] - a * xv - b * xv.conj();
        }
    }
    TxDistortion {
        gain,
        cov: sample_covariance(&e),
    }
}

/// Samples of `CN(0, R)` via the Cholesky factor of `R`.
pub fn colored_noise<R: Rng + ?Sized>(cov: &ComplexMatrix, samples: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let l = hpd_cholesky(&hermitize(cov))?.l();
    Ok(l * cn_matrix(cov.nrows(), samples, 1.0, rng))
}

/// LMMSE estimate of `h` from orthogonal pilots of amplitude `amp`, received
/// in noise of covariance `noise` (the estimator itself only uses its mean
/// diagonal). The prior is the realized mean entry power of `h`.
pub fn pilot_estimate<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    amp: f64,
    pilots: usize,
    noise: &ComplexMatrix,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let p = orthogonal_pilots(h.ncols(), pilots)?.scale(amp);
    let y = h * &p + colored_noise(noise, pilots, rng)?;
    let noise_var = (0..noise.nrows()).map(|i| noise[(i, i)].re).sum::<f64>() / noise.nrows() as f64;
    let prior = frobenius_sq(h) / h.len().max(1) as f64;
    Ok(mmse_estimate(&y, &p, noise_var, prior, 0)?.h_hat)
}

/// Configuration of one FD cancellation chain.
#[derive(Debug, Clone)]
pub struct SiChain<'a> {
    /// Effective SI channel between TX and RX chains, isolation included.
    pub s_eff: &'a ComplexMatrix,
    pub taps: usize,
    pub digital: bool,
    pub impairments: &'a TxImpairmentConfig,
    pub noise_w: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct SiOutcome {
    pub canceller: CancellerState,
    /// Residual SI covariance after all cancellation stages.
    pub residual_cov: ComplexMatrix,
    /// Per-chain SI power at the RX chain input (after analog cancellation).
    pub analog_power: Vec<f64>,
    pub distortion: TxDistortion,
}

impl<'a> SiChain<'a> {
    pub fn analog(&self) -> Result<CancellerState> {
        let support = select_taps(self.s_eff, self.taps)?;
        set_tap_gains(self.s_eff, &support)
    }

    /// Applies the SI-aware projection to `w0` with budget `mu` (watts, total
    /// over RX chains). Returns the projector onto the admissible TX subspace,
    /// or `None` when no projection was needed or it was infeasible.
    pub fn projection(
        &self,
        canceller: &CancellerState,
        w0: &ComplexMatrix,
        power_w: f64,
        mu: f64,
    ) -> Result<Option<ComplexMatrix>> {
        let g = power_w.sqrt();
        let out = si_aware_precoder_projection(
            &DigitalBeamformer::new(w0.clone()),
            &self.s_eff.scale(g),
            &canceller.analog_matrix().scale(g),
            mu,
        );
        match out {
            Ok(o) if o.removed.ncols() > 0 => Ok(Some(o.projector())),
            Ok(_) | Err(Error::Infeasible { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Runs a calibration burst (digital training, noise only) and an
    /// evaluation burst for precoder `w` at total power `power_w`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        canceller: &CancellerState,
        w: &ComplexMatrix,
        power_w: f64,
        rng: &mut R,
    ) -> Result<SiOutcome> {
        let c = canceller.analog_matrix();
        let residual = |x: &ComplexMatrix, xt: &ComplexMatrix| self.s_eff * xt - &c * x;

        let mut canceller = canceller.clone();
        if self.digital {
            let x = tx_burst(w, power_w, self.samples, rng);
            let xt = apply_tx_burst(&x, self.impairments);
            let noise = cn_matrix(self.s_eff.nrows(), self.samples, self.noise_w, rng);
            let observed = residual(&x, &xt) + noise;
            canceller.digital = Some(train_digital_canceller_reduced(&x, &observed)?);
        }

        let x = tx_burst(w, power_w, self.samples, rng);
        let xt = apply_tx_burst(&x, self.impairments);
        let analog = residual(&x, &xt);
        let t = self.samples as f64;
        let analog_power = row_norms_sq(&analog).into_iter().map(|p| p / t).collect();
        let after = match &canceller.digital {
            Some(dc) => apply_digital_canceller(dc, &x, &analog)?,
            None => analog,
        };
        Ok(SiOutcome {
            canceller,
            residual_cov: sample_covariance(&after),
            analog_power,
            distortion: tx_distortion(&x, &xt),
        })
    }
}

/// DL distortion statistics alone (no SI path), for half-duplex links.
pub fn distortion_only<R: Rng + ?Sized>(
    w: &ComplexMatrix,
    power_w: f64,
    impairments: &TxImpairmentConfig,
    samples: usize,
    rng: &mut R,
) -> TxDistortion {
    if !impairments.enabled {
        return TxDistortion::none(w.nrows());
    }
    let x = tx_burst(w, power_w, samples, rng);
    let xt = apply_tx_burst(&x, impairments);
    tx_distortion(&x, &xt)
}
