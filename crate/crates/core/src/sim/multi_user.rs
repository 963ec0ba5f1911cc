//! Scenario C: simultaneous communication and channel estimation with
//! single-antenna FD users. UL pilots received in slot `t` (under SI from
//! the concurrent DL) feed the ZF precoder of slot `t + 1`; the metric is
//! the DL sum rate over the aged channel.

use rand::Rng;

use super::pipeline::{distortion_only, pilot_estimate, SiChain};
use super::rates::{mu_sum_rate, unsaturated};
use super::Ctx;
use crate::beamforming::zf_precoder;
use crate::cancellation::CancellerState;
use crate::channel::{evolve_gauss_markov, gen_rayleigh, gen_rician, RicianParams};
use crate::error::{Error, Result};
use crate::impairments::dbm_to_watt;
use crate::linalg::{orthonormal_basis, row_norms_sq, ComplexMatrix};
use crate::sim::TrialOutcome;

/// Share of the DL packet left for data when HD pilots occupy the rest.
const HD_DATA_FRACTION: f64 = 0.9;

struct Slot<'a> {
    ctx: &'a Ctx<'a>,
    chain: SiChain<'a>,
    canceller: CancellerState,
}

impl Slot<'_> {
    /// ZF on `h_hat` (users x chains), then the SI-aware projection with a
    /// ZF redesign inside the admissible subspace when it leaves room for
    /// every user. `None` if no ZF precoder exists.
    fn design(&self, h_hat: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
        let w0 = match zf_precoder(h_hat, None) {
            Ok(w) => w.matrix,
            Err(Error::Singular { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if self.ctx.hd() || self.ctx.ideal_csi() {
            return Ok(Some(w0));
        }
        match self.chain.projection(&self.canceller, &w0, self.ctx.p_w, self.ctx.mu)? {
            Some(proj) if orthonormal_basis(&proj, 1e-9).ncols() >= h_hat.nrows() => {
                match zf_precoder(&(h_hat * &proj), None) {
                    Ok(w) => Ok(Some(&proj * w.matrix)),
                    Err(Error::Singular { .. }) => Ok(Some(w0)),
                    Err(e) => Err(e),
                }
            }
            _ => Ok(Some(w0)),
        }
    }

    /// Residual interference covariance and saturation flags at the BS while
    /// the DL runs with precoder `w`.
    fn interference<R: Rng + ?Sized>(
        &self,
        w: &ComplexMatrix,
        ul_power: &[f64],
        rng: &mut R,
    ) -> Result<(ComplexMatrix, Vec<bool>)> {
        let m = self.chain.s_eff.nrows();
        let si = self.chain.run(&self.canceller, w, self.ctx.p_w, rng)?;
        let r = ComplexMatrix::identity(m, m).scale(self.ctx.noise_bs) + &si.residual_cov;
        Ok((r, self.ctx.saturated(&si.analog_power, ul_power)))
    }

    fn dl_rate<R: Rng + ?Sized>(&self, h_true: &ComplexMatrix, w: &ComplexMatrix, rng: &mut R) -> Result<f64> {
        let ctx = self.ctx;
        let dist = distortion_only(w, ctx.p_w, &ctx.impairments, ctx.cfg.burst_samples, rng);
        mu_sum_rate(
            &h_true.scale(ctx.g_dl.sqrt()),
            &dist.apply_gain(w),
            ctx.p_w,
            ctx.noise_ue,
            Some(&dist.cov),
        )
    }
}

/// Estimate of `h_ul` (antennas x users) from the unsaturated antennas;
/// saturated rows stay zero.
fn estimate_rows<R: Rng + ?Sized>(
    h_ul: &ComplexMatrix,
    amp: f64,
    pilots: usize,
    r: &ComplexMatrix,
    saturated: &[bool],
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let keep = unsaturated(saturated, h_ul.nrows())?;
    let mut out = ComplexMatrix::zeros(h_ul.nrows(), h_ul.ncols());
    if keep.is_empty() {
        return Ok(out);
    }
    let est = pilot_estimate(
        &h_ul.select_rows(&keep),
        amp,
        pilots,
        &r.select_rows(&keep).select_columns(&keep),
        rng,
    )?;
    for (k, &i) in keep.iter().enumerate() {
        out.row_mut(i).copy_from(&est.row(k));
    }
    Ok(out)
}

fn without_row(h: &ComplexMatrix, skip: usize) -> ComplexMatrix {
    let rows: Vec<usize> = (0..h.nrows()).filter(|&i| i != skip).collect();
    h.select_rows(&rows)
}

pub(crate) fn scenario_c<R: Rng + ?Sized>(ctx: &Ctx, ch: &mut R, rng: &mut R) -> Result<TrialOutcome> {
    let cfg = ctx.cfg;
    let a = &cfg.architecture;
    let users = cfg.pilots.num_streams;
    let h_now = gen_rayleigh(users, a.n, ch)?;
    let h_si = gen_rician(&RicianParams::new(cfg.si_kappa_db, a.m, a.n), ch)?;
    let h_next = evolve_gauss_markov(&h_now, cfg.aging.rho()?, ch)?;
    // Reciprocal UL: antennas x users.
    let h_ul = h_now.transpose();

    let s_eff = h_si.scale(ctx.g_si.sqrt());
    let chain = SiChain {
        s_eff: &s_eff,
        taps: ctx.taps,
        digital: ctx.digital,
        impairments: &ctx.impairments,
        noise_w: ctx.noise_bs,
        samples: cfg.burst_samples,
    };
    let canceller = chain.analog()?;
    let slot = Slot { ctx, chain, canceller };

    if ctx.ideal_csi() {
        let w = match slot.design(&h_next)? {
            Some(w) => w,
            None => return Ok(TrialOutcome::default()),
        };
        return Ok(TrialOutcome {
            dl: slot.dl_rate(&h_next, &w, rng)?,
            ul: 0.0,
        });
    }

    let pilot_w = dbm_to_watt(cfg.pilots.pilot_power_dbm);
    let amp = (ctx.g_ul * pilot_w).sqrt();
    let ul_power = |cols: usize| -> Vec<f64> {
        row_norms_sq(&h_ul)
            .into_iter()
            .map(|p| ctx.g_ul * pilot_w * p * cols as f64 / users as f64)
            .collect()
    };
    let white = ComplexMatrix::identity(a.m, a.m).scale(ctx.noise_bs);

    match ctx.scheme.kind {
        crate::config::SchemeKind::HalfDuplex => {
            let pilots = (cfg.pilots.num_pilots / 10).max(users);
            let est = estimate_rows(&h_ul, amp, pilots, &white, &vec![false; a.m], rng)?;
            let dl = match slot.design(&est.transpose())? {
                Some(w) => HD_DATA_FRACTION * slot.dl_rate(&h_next, &w, rng)?,
                None => 0.0,
            };
            Ok(TrialOutcome { dl, ul: 0.0 })
        }
        crate::config::SchemeKind::Proposed => {
            // The slot-t DL precoder stands in for the one built from the
            // previous slot's estimates.
            let Some(w_now) = slot.design(&h_now)? else {
                return Ok(TrialOutcome::default());
            };
            let (r, sat) = slot.interference(&w_now, &ul_power(users), rng)?;
            let est = estimate_rows(&h_ul, amp, cfg.pilots.num_pilots, &r, &sat, rng)?;
            let dl = match slot.design(&est.transpose())? {
                Some(w) => slot.dl_rate(&h_next, &w, rng)?,
                None => 0.0,
            };
            Ok(TrialOutcome { dl, ul: 0.0 })
        }
        crate::config::SchemeKind::Benchmark => {
            // Sequential training: in quarter q user q sends pilots while the
            // others receive ZF-precoded data.
            let per_user = (cfg.pilots.num_pilots / users).max(1);
            let mut est = ComplexMatrix::zeros(a.m, users);
            for q in 0..users {
                let others = without_row(&h_now, q);
                let col = h_ul.columns(q, 1).into_owned();
                let sig: Vec<f64> = row_norms_sq(&col).into_iter().map(|p| ctx.g_ul * pilot_w * p).collect();
                let (r, sat) = match slot.design(&others)? {
                    Some(w) => slot.interference(&w, &sig, rng)?,
                    None => (white.clone(), vec![false; a.m]),
                };
                let e = estimate_rows(&col, amp, per_user, &r, &sat, rng)?;
                est.column_mut(q).copy_from(&e.column(0));
            }
            let h_hat = est.transpose();
            let mut dl = 0.0;
            for q in 0..users {
                if let Some(w) = slot.design(&without_row(&h_hat, q))? {
                    dl += slot.dl_rate(&without_row(&h_next, q), &w, rng)?;
                }
            }
            Ok(TrialOutcome {
                dl: dl / users as f64,
                ul: 0.0,
            })
        }
        crate::config::SchemeKind::IdealCsi => unreachable!("handled above"),
    }
}
