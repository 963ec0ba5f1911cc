//! Scenario D: DL beam training from UL pilots. The BS estimates the user's
//! direction with a sweep over its receive array while the DL is live, then
//! points the analog TX beams and the digital weights at that direction.

use rand::Rng;

use super::pipeline::{colored_noise, distortion_only, SiChain};
use super::rates::{mu_sum_rate, unsaturated};
use super::Ctx;
use crate::beamforming::{assemble_analog_bf, codeword_angle, dft_codebook, select_beam_by_doa, select_beams, Side};
use crate::cancellation::CancellerState;
use crate::channel::{gen_rician, rician_around, steering_vector, RicianParams};
use crate::config::SchemeKind;
use crate::error::{Error, Result};
use crate::estimation::{doa_estimate, orthogonal_pilots, sweep_snapshots};
use crate::impairments::dbm_to_watt;
use crate::linalg::{frobenius_sq, orthonormal_basis, ComplexMatrix};
use crate::sim::TrialOutcome;

const HD_DATA_FRACTION: f64 = 0.9;

/// `sqrt(n) a(theta)^H` as a `1 x n` row: the LOS response seen by a
/// transmit ULA.
fn los_row(n: usize, theta: f64) -> ComplexMatrix {
    let a = steering_vector(n, theta);
    let g = (n as f64).sqrt();
    ComplexMatrix::from_iterator(1, n, a.iter().map(|z| z.conj() * g))
}

/// Maximum-ratio weights for a single-user effective channel (1 x chains).
fn mrt(h: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = frobenius_sq(h).sqrt();
    (n > 0.0).then(|| h.adjoint().unscale(n))
}

/// Analog beams pointing at `theta` on every sub-array, plus the matching
/// geometric effective channel.
fn beams_toward(ctx: &Ctx, theta: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let a = &ctx.cfg.architecture;
    let sub = a.subarray_size(Side::Tx);
    let idx = select_beam_by_doa(theta, &dft_codebook(sub, a.phase_bits))?;
    let f_tx = assemble_analog_bf(&vec![idx; a.n_t], a, Side::Tx)?.matrix;
    let predicted = los_row(a.n, theta) * &f_tx;
    Ok((f_tx, predicted))
}

pub(crate) fn scenario_d<R: Rng + ?Sized>(ctx: &Ctx, ch: &mut R, rng: &mut R) -> Result<TrialOutcome> {
    let cfg = ctx.cfg;
    let a = &cfg.architecture;
    let s: f64 = ch.random_range(-1.0..1.0);
    let theta = s.asin();
    let los_dl = los_row(a.n, theta);
    let h_dl = rician_around(los_dl, cfg.access_kappa_db, ch)?.matrix();
    let los_ul = ComplexMatrix::from_column_slice(
        a.m,
        1,
        steering_vector(a.m, theta).scale((a.m as f64).sqrt()).as_slice(),
    );
    let h_ul = rician_around(los_ul, cfg.access_kappa_db, ch)?.matrix();
    let h_si = gen_rician(&RicianParams::new(cfg.si_kappa_db, a.m, a.n), ch)?;

    let dl_rate = |f_tx: &ComplexMatrix, w: &ComplexMatrix, rng: &mut R| -> Result<f64> {
        let dist = distortion_only(w, ctx.p_w, &ctx.impairments, cfg.burst_samples, rng);
        let h = (&h_dl * f_tx).scale(ctx.g_dl.sqrt());
        mu_sum_rate(&h, &dist.apply_gain(w), ctx.p_w, ctx.noise_ue, Some(&dist.cov))
    };

    if ctx.ideal_csi() {
        let sub = a.subarray_size(Side::Tx);
        let beams = select_beams(&h_dl, sub, &dft_codebook(sub, a.phase_bits))?;
        let f_tx = assemble_analog_bf(&beams, a, Side::Tx)?.matrix;
        let Some(w) = mrt(&(&h_dl * &f_tx)) else {
            return Ok(TrialOutcome::default());
        };
        return Ok(TrialOutcome {
            dl: dl_rate(&f_tx, &w, rng)?,
            ul: 0.0,
        });
    }

    let white = ComplexMatrix::identity(a.m, a.m).scale(ctx.noise_bs);
    let pilot_w = dbm_to_watt(cfg.pilots.pilot_power_dbm);
    let amp = (ctx.g_ul * pilot_w).sqrt();

    // SI environment during training: the DL keeps its current beam, taken
    // here as the one pointing at the true direction.
    let (pilots, r, saturated) = if ctx.scheme.kind == SchemeKind::HalfDuplex {
        let pilots = (cfg.pilots.num_pilots / 10).max(1);
        (pilots, white.clone(), vec![false; a.m])
    } else {
        let (f_now, pred_now) = beams_toward(ctx, theta)?;
        let s_eff = (&h_si * &f_now).scale(ctx.g_si.sqrt());
        let chain = SiChain {
            s_eff: &s_eff,
            taps: ctx.taps,
            digital: ctx.digital,
            impairments: &ctx.impairments,
            noise_w: ctx.noise_bs,
            samples: cfg.burst_samples,
        };
        let canceller = chain.analog()?;
        let w_now = match mrt(&pred_now) {
            Some(w) => project(ctx, &chain, &canceller, &pred_now, w)?,
            None => return Ok(TrialOutcome::default()),
        };
        let si = chain.run(&canceller, &w_now, ctx.p_w, rng)?;
        let sig: Vec<f64> = h_ul.iter().map(|z| ctx.g_ul * pilot_w * z.norm_sqr()).collect();
        let sat = ctx.saturated(&si.analog_power, &sig);
        let r = &white + &si.residual_cov;
        (cfg.pilots.num_pilots, r, sat)
    };

    // UL training burst; a saturated chain delivers nothing useful.
    let mut y = &h_ul * orthogonal_pilots(1, pilots)?.scale(amp) + colored_noise(&r, pilots, rng)?;
    let keep = unsaturated(&saturated, a.m)?;
    for i in (0..a.m).filter(|i| !keep.contains(i)) {
        y.row_mut(i).fill(num_complex::Complex64::new(0.0, 0.0));
    }
    let sub = a.subarray_size(Side::Tx);
    let angles: Vec<f64> = (0..sub).map(|k| codeword_angle(sub, k)).collect();
    let grid: Vec<_> = angles.iter().map(|&t| steering_vector(a.m, t)).collect();
    let theta_hat = match doa_estimate(&sweep_snapshots(&y, &grid)?, &angles) {
        Ok((_, t)) => t,
        Err(Error::NoSignal) => return Ok(TrialOutcome::default()),
        Err(e) => return Err(e),
    };

    let (f_tx, predicted) = beams_toward(ctx, theta_hat)?;
    let Some(w) = mrt(&predicted) else {
        return Ok(TrialOutcome::default());
    };
    if ctx.hd() {
        return Ok(TrialOutcome {
            dl: HD_DATA_FRACTION * dl_rate(&f_tx, &w, rng)?,
            ul: 0.0,
        });
    }
    let s_eff = (&h_si * &f_tx).scale(ctx.g_si.sqrt());
    let chain = SiChain {
        s_eff: &s_eff,
        taps: ctx.taps,
        digital: ctx.digital,
        impairments: &ctx.impairments,
        noise_w: ctx.noise_bs,
        samples: cfg.burst_samples,
    };
    let canceller = chain.analog()?;
    let w = project(ctx, &chain, &canceller, &predicted, w)?;
    Ok(TrialOutcome {
        dl: dl_rate(&f_tx, &w, rng)?,
        ul: 0.0,
    })
}

/// SI-aware projection followed by MRT inside the admissible subspace.
fn project(
    ctx: &Ctx,
    chain: &SiChain,
    canceller: &CancellerState,
    h_pred: &ComplexMatrix,
    w: ComplexMatrix,
) -> Result<ComplexMatrix> {
    match chain.projection(canceller, &w, ctx.p_w, ctx.mu)? {
        Some(proj) if orthonormal_basis(&proj, 1e-9).ncols() > 0 => {
            Ok(mrt(&(h_pred * &proj)).map(|v| &proj * v).unwrap_or(w))
        }
        _ => Ok(w),
    }
}
