//! Single-user FD links (scenarios A and B): one multi-antenna DL user and
//! one multi-antenna UL user served simultaneously; the metric is DL + UL.

use rand::Rng;

use super::pipeline::{distortion_only, pilot_estimate, SiChain, TxDistortion};
use super::rates::{dl_rate, linear_receiver_rate};
use super::Ctx;
use crate::beamforming::{assemble_analog_bf, dft_codebook, eigen_precoder, mmse_combiner, select_beams, Side};
use crate::channel::{gen_clustered_mmwave, gen_rayleigh, gen_rician, ClusteredParams, RicianParams};
use crate::error::Result;
use crate::linalg::{orthonormal_basis, row_norms_sq, ComplexMatrix};
use crate::sim::TrialOutcome;

/// Channels seen from the RF chains (analog beamforming folded in), with
/// unit average gain; `s_eff` includes the SI isolation.
pub(crate) struct SuLinks {
    pub h_dl: ComplexMatrix,
    pub h_ul: ComplexMatrix,
    pub s_eff: ComplexMatrix,
    pub ul_streams: usize,
}

pub(crate) fn scenario_a<R: Rng + ?Sized>(ctx: &Ctx, ch: &mut R, rng: &mut R) -> Result<TrialOutcome> {
    let a = &ctx.cfg.architecture;
    let dl_ue = ctx.cfg.pilots.num_streams;
    let h_dl = gen_rayleigh(dl_ue, a.n, ch)?;
    let h_ul = gen_rayleigh(a.m, a.m_r, ch)?;
    let h_si = gen_rician(&RicianParams::new(ctx.cfg.si_kappa_db, a.m, a.n), ch)?;
    // The UL user sends a single stream on its dominant eigenmode.
    let links = SuLinks {
        h_dl,
        h_ul,
        s_eff: h_si.scale(ctx.g_si.sqrt()),
        ul_streams: 1,
    };
    run(ctx, &links, rng)
}

pub(crate) fn scenario_b<R: Rng + ?Sized>(ctx: &Ctx, ch: &mut R, rng: &mut R) -> Result<TrialOutcome> {
    let a = &ctx.cfg.architecture;
    let dl_ue = ctx.cfg.pilots.num_streams;
    let ul_ue = a.m_r;
    let paths = ctx.cfg.num_paths;
    let h_dl = gen_clustered_mmwave(
        &ClusteredParams {
            num_paths: paths,
            rx_elements: dl_ue,
            tx_elements: a.n,
        },
        ch,
    )?;
    let h_ul = gen_clustered_mmwave(
        &ClusteredParams {
            num_paths: paths,
            rx_elements: a.m,
            tx_elements: ul_ue,
        },
        ch,
    )?;
    let h_si = gen_rician(&RicianParams::new(ctx.cfg.si_kappa_db, a.m, a.n), ch)?;

    // Analog beams are trained on the true channels; digital stages work on
    // pilot estimates of the resulting effective channels.
    let sub_tx = a.subarray_size(Side::Tx);
    let sub_rx = a.subarray_size(Side::Rx);
    let tx_beams = select_beams(&h_dl, sub_tx, &dft_codebook(sub_tx, a.phase_bits))?;
    let rx_beams = select_beams(&h_ul.adjoint(), sub_rx, &dft_codebook(sub_rx, a.phase_bits))?;
    let f_tx = assemble_analog_bf(&tx_beams, a, Side::Tx)?.matrix;
    let f_rx = assemble_analog_bf(&rx_beams, a, Side::Rx)?.matrix;
    let links = SuLinks {
        h_dl: &h_dl * &f_tx,
        h_ul: f_rx.adjoint() * &h_ul,
        s_eff: (f_rx.adjoint() * &h_si * &f_tx).scale(ctx.g_si.sqrt()),
        ul_streams: ul_ue,
    };
    run(ctx, &links, rng)
}

fn dl_link_rate(ctx: &Ctx, h_dl: &ComplexMatrix, w: &ComplexMatrix, dist: &TxDistortion) -> Result<f64> {
    let h = h_dl.scale(ctx.g_dl.sqrt());
    let cov = &h * &dist.cov * h.adjoint();
    dl_rate(&h, &dist.apply_gain(w), ctx.p_w, ctx.noise_ue, Some(&cov))
}

/// Best rate over UL stream counts (rank adaptation), MMSE combining on the
/// estimated effective channel, evaluated against the true one.
fn ul_link_rate<R: Rng + ?Sized>(
    ctx: &Ctx,
    h_ul: &ComplexMatrix,
    max_streams: usize,
    r: &ComplexMatrix,
    saturated: &[bool],
    rng: &mut R,
) -> Result<f64> {
    let keep = super::rates::unsaturated(saturated, h_ul.nrows())?;
    if keep.is_empty() {
        return Ok(0.0);
    }
    let h = h_ul.select_rows(&keep);
    let r = r.select_rows(&keep).select_columns(&keep);
    let amp = (ctx.g_ul * ctx.p_ul_w).sqrt();
    let max_streams = max_streams.min(h.nrows()).min(h.ncols());
    let mut best = 0.0f64;
    for ns in 1..=max_streams {
        let v = eigen_precoder(&h, ns)?.matrix;
        // Per-stream amplitude `amp * sqrt(1/ns)` lives in `v`.
        let g = (&h * &v).scale(amp);
        let g_hat = if ctx.ideal_csi() {
            g.clone()
        } else {
            let unit = (&h * &v).scale((ns as f64).sqrt());
            let est = pilot_estimate(&unit, amp / (ns as f64).sqrt(), ctx.cfg.pilots.num_pilots, &r, rng)?;
            est.scale(amp / (ns as f64).sqrt())
        };
        let comb = mmse_combiner(&g_hat, &r)?;
        best = best.max(linear_receiver_rate(&comb.matrix, &g, &r));
    }
    Ok(best)
}

fn run<R: Rng + ?Sized>(ctx: &Ctx, links: &SuLinks, rng: &mut R) -> Result<TrialOutcome> {
    let n_t = links.h_dl.ncols();
    let m_r = links.h_ul.nrows();
    let max_streams = links.h_dl.nrows().min(n_t);
    let pilots = ctx.cfg.pilots.num_pilots;

    let h_dl_hat = if ctx.ideal_csi() {
        links.h_dl.clone()
    } else {
        let amp = (ctx.g_dl * ctx.p_w / n_t as f64).sqrt();
        let noise = ComplexMatrix::identity(links.h_dl.nrows(), links.h_dl.nrows()).scale(ctx.noise_ue);
        pilot_estimate(&links.h_dl, amp, pilots, &noise, rng)?
    };
    let white = ComplexMatrix::identity(m_r, m_r).scale(ctx.noise_bs);

    // Link adaptation: every scheme picks the DL stream count that gives
    // its best rate in this trial.
    if ctx.hd() {
        let mut dl = 0.0f64;
        for ns in 1..=max_streams {
            let w = eigen_precoder(&h_dl_hat, ns)?.matrix;
            let dist = distortion_only(&w, ctx.p_w, &ctx.impairments, ctx.cfg.burst_samples, rng);
            dl = dl.max(dl_link_rate(ctx, &links.h_dl, &w, &dist)?);
        }
        let ul = ul_link_rate(ctx, &links.h_ul, links.ul_streams, &white, &vec![false; m_r], rng)?;
        return Ok(TrialOutcome {
            dl: 0.5 * dl,
            ul: 0.5 * ul,
        });
    }

    let chain = SiChain {
        s_eff: &links.s_eff,
        taps: ctx.taps,
        digital: ctx.digital,
        impairments: &ctx.impairments,
        noise_w: ctx.noise_bs,
        samples: ctx.cfg.burst_samples,
    };
    let canceller = chain.analog()?;
    let ul_power: Vec<f64> = row_norms_sq(&links.h_ul)
        .into_iter()
        .map(|p| ctx.g_ul * ctx.p_ul_w * p / links.h_ul.ncols() as f64)
        .collect();

    let mut best = TrialOutcome::default();
    let mut tried = 0;
    for ns in 1..=max_streams {
        let w0 = eigen_precoder(&h_dl_hat, ns)?.matrix;
        let w = match chain.projection(&canceller, &w0, ctx.p_w, ctx.mu)? {
            Some(proj) => {
                // Redesign inside the admissible subspace.
                let dims = orthonormal_basis(&proj, 1e-9).ncols();
                if ns > dims {
                    break;
                }
                eigen_precoder(&(&h_dl_hat * &proj), ns)?.matrix
            }
            None => w0,
        };
        tried = ns;
        let si = chain.run(&canceller, &w, ctx.p_w, rng)?;
        let dl = dl_link_rate(ctx, &links.h_dl, &w, &si.distortion)?;
        let saturated = ctx.saturated(&si.analog_power, &ul_power);
        let r = &white + &si.residual_cov;
        let ul = ul_link_rate(ctx, &links.h_ul, links.ul_streams, &r, &saturated, rng)?;
        let out = TrialOutcome { dl, ul };
        if out.metric() > best.metric() {
            best = out;
        }
    }
    debug_assert!(tried > 0 || best == TrialOutcome::default());
    Ok(best)
}
