//! Statistical and closed-form oracles, computed independently of the code
//! under test.

use std::f64::consts::PI;

use fdmimo_core::beamforming::{
    codeword_angle, combiner_sinr, dft_codebook, mmse_combiner, select_beams, DigitalBeamformer,
};
use fdmimo_core::cancellation::{
    apply_digital_canceller, regressors, si_aware_precoder_projection, train_digital_canceller,
};
use fdmimo_core::channel::{
    doppler_correlation, evolve_gauss_markov, gen_clustered_mmwave, gen_rayleigh, gen_rician_parts, steering_vector,
};
use fdmimo_core::estimation::{age_csi, doa_estimate, sweep_snapshots};
use fdmimo_core::impairments::{apply_tx_burst, cubic_coefficient, dbm_to_watt};
use fdmimo_core::linalg::frobenius_sq;
use fdmimo_core::rng::{cn01, cn_matrix, seeded};
use fdmimo_core::sim::dl_rate;
use fdmimo_core::{ClusteredParams, ComplexMatrix, CsiRecord, RicianParams, TxImpairmentConfig};
use num_complex::Complex64;

/// `J0(x) = (1/pi) int_0^pi cos(x sin t) dt`, composite Simpson.
fn j0_quadrature(x: f64) -> f64 {
    let n = 2000;
    let h = PI / n as f64;
    let f = |t: f64| (x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / PI
}

#[test]
fn rayleigh_entries_have_unit_power() {
    let mut rng = seeded(10);
    let mut sum = 0.0;
    let draws = 25_000;
    for _ in 0..draws {
        sum += frobenius_sq(&gen_rayleigh(2, 2, &mut rng).unwrap());
    }
    let mean = sum / (4 * draws) as f64;
    assert!((0.99..=1.01).contains(&mean), "{mean}");
}

#[test]
fn rayleigh_row_covariance_is_identity() {
    let mut rng = seeded(11);
    let draws = 10_000;
    let mut acc = ComplexMatrix::zeros(4, 4);
    for _ in 0..draws {
        let h = gen_rayleigh(4, 4, &mut rng).unwrap();
        acc += &h * h.adjoint();
    }
    let cov = acc.scale(1.0 / (4 * draws) as f64);
    let err = (cov - ComplexMatrix::identity(4, 4)).norm();
    assert!(err < 0.05, "{err}");
}

#[test]
fn rician_power_split_follows_kappa() {
    for (kappa_db, los_fraction) in [(30.0, 1000.0 / 1001.0), (20.0, 100.0 / 101.0)] {
        let mut rng = seeded(12);
        let (mut los, mut scatter) = (0.0, 0.0);
        // 10^5 entries.
        for _ in 0..6250 {
            let d = gen_rician_parts(&RicianParams::new(kappa_db, 4, 4), &mut rng).unwrap();
            los += frobenius_sq(&d.los.scale(d.los_weight));
            scatter += frobenius_sq(&d.scatter.scale(d.scatter_weight));
        }
        let total = los + scatter;
        assert!(
            (los / total - los_fraction).abs() < 1e-3,
            "kappa {kappa_db}: {}",
            los / total
        );
        assert!((scatter / total - (1.0 - los_fraction)).abs() < 1e-3);
    }
}

#[test]
fn clustered_channel_is_normalized() {
    let params = ClusteredParams {
        num_paths: 7,
        rx_elements: 64,
        tx_elements: 4,
    };
    let mut rng = seeded(13);
    let draws = 10_000;
    let mean = (0..draws)
        .map(|_| frobenius_sq(&gen_clustered_mmwave(&params, &mut rng).unwrap()))
        .sum::<f64>()
        / (draws * 256) as f64;
    assert!((0.97..=1.03).contains(&mean), "{mean}");
}

#[test]
fn doppler_correlation_matches_bessel_integral() {
    let rho = doppler_correlation(50.0, 1e-3).unwrap();
    assert!((rho - 0.9755).abs() < 1e-3);
    assert!((rho - j0_quadrature(2.0 * PI * 50.0 * 1e-3)).abs() < 1e-10);
    for fd in [10.0, 120.0, 300.0, 380.0] {
        let x = 2.0 * PI * fd * 1e-3;
        assert!((doppler_correlation(fd, 1e-3).unwrap() - j0_quadrature(x)).abs() < 1e-10);
    }
    assert!(doppler_correlation(500.0, 1e-3).unwrap() < rho);
}

#[test]
fn gauss_markov_lag_one_correlation() {
    let rho = 0.9755;
    let mut rng = seeded(14);
    let mut h = cn_matrix(10, 10, 1.0, &mut rng);
    let (mut cross, mut power) = (0.0, 0.0);
    // 10^5 entry pairs.
    for _ in 0..1000 {
        let next = evolve_gauss_markov(&h, rho, &mut rng).unwrap();
        cross += h.iter().zip(next.iter()).map(|(a, b)| (a * b.conj()).re).sum::<f64>();
        power += frobenius_sq(&h);
        h = next;
    }
    let lag1 = cross / power;
    assert!((0.965..=0.985).contains(&lag1), "{lag1}");
}

#[test]
fn aged_mismatch_matches_innovation_variance() {
    let rho = 0.9755;
    let mut rng = seeded(15);
    let (mut mismatch, mut power) = (0.0, 0.0);
    for _ in 0..10_000 {
        let h = cn_matrix(2, 2, 1.0, &mut rng);
        let record = CsiRecord {
            h_hat: h.clone(),
            error_var: vec![0.0; 2],
            slot_index: 0,
        };
        let next = evolve_gauss_markov(&h, rho, &mut rng).unwrap();
        mismatch += frobenius_sq(&age_csi(&record, &next).unwrap());
        power += frobenius_sq(&h);
    }
    let ratio = mismatch / power;
    let expected = 2.0 * (1.0 - rho);
    assert!((ratio / expected - 1.0).abs() < 0.1, "{ratio} vs {expected}");
}

#[test]
fn pa_distortion_has_bussgang_correlation() {
    // For CN(0, s) input, d = -b x|x|^2 gives E[d x*] / E|x|^2 = -2 b s,
    // since E|x|^4 = 2 s^2.
    let iip3 = 20.0;
    let s = dbm_to_watt(0.0);
    let cfg = TxImpairmentConfig {
        iip3_dbm: iip3,
        irr_db: f64::INFINITY,
        enabled: true,
        pa_gain_db: 0.0,
    };
    let mut rng = seeded(16);
    let x = cn_matrix(1, 100_000, s, &mut rng);
    let y = apply_tx_burst(&x, &cfg);
    let d = &y - &x;
    let corr: Complex64 = d.iter().zip(x.iter()).map(|(d, x)| d * x.conj()).sum();
    let measured = corr.re / frobenius_sq(&x);
    let expected = -2.0 * cubic_coefficient(iip3) * s;
    assert!((measured / expected - 1.0).abs() < 0.1, "{measured} vs {expected}");
}

#[test]
fn digital_canceller_identifies_impaired_transmitter() {
    let cfg = TxImpairmentConfig {
        iip3_dbm: 20.0,
        irr_db: 30.0,
        enabled: true,
        pa_gain_db: 0.0,
    };
    let mut rng = seeded(17);
    let x = cn_matrix(2, 1000, dbm_to_watt(0.0), &mut rng);
    let channel = cn_matrix(2, 2, 1.0, &mut rng);
    let rx = &channel * apply_tx_burst(&x, &cfg);
    let fitted = train_digital_canceller(&x, &rx).unwrap();
    let after = apply_digital_canceller(&fitted, &x, &rx).unwrap();
    let suppression = 10.0 * (frobenius_sq(&rx) / frobenius_sq(&after)).log10();
    assert!(suppression >= 50.0, "{suppression} dB");
}

#[test]
fn regressors_hold_the_three_basis_terms() {
    let x = ComplexMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)]);
    let phi = regressors(&x);
    assert_eq!(phi.shape(), (3, 2));
    let z = Complex64::new(1.0, 2.0);
    assert_eq!(phi[(0, 0)], z);
    assert_eq!(phi[(1, 0)], z.conj());
    assert!((phi[(2, 0)] - z * 5.0).norm() < 1e-15);
}

#[test]
fn mmse_sinr_dominates_matched_filter() {
    let mut rng = seeded(18);
    for _ in 0..100 {
        let h = gen_rayleigh(4, 2, &mut rng).unwrap();
        let a = cn_matrix(4, 4, 1.0, &mut rng);
        let r = &a * a.adjoint() + ComplexMatrix::identity(4, 4).scale(0.1);
        let mmse = mmse_combiner(&h, &r).unwrap().matrix;
        let mf = h.clone();
        for (m, f) in combiner_sinr(&mmse, &h, &r).iter().zip(combiner_sinr(&mf, &h, &r)) {
            assert!(*m >= f * (1.0 - 1e-9), "{m} < {f}");
        }
    }
}

#[test]
fn projection_never_increases_residual() {
    let mut rng = seeded(19);
    for _ in 0..100 {
        let h_eff = cn_matrix(2, 4, 1.0, &mut rng);
        let c = ComplexMatrix::zeros(2, 4);
        let w = DigitalBeamformer::new(cn_matrix(4, 2, 1.0, &mut rng)).normalized();
        let before = frobenius_sq(&(&h_eff * &w.matrix));
        let out = si_aware_precoder_projection(&w, &h_eff, &c, 0.0).unwrap();
        let after = frobenius_sq(&(&h_eff * &out.beamformer.matrix));
        assert!(after <= before * (1.0 + 1e-12), "{after} > {before}");
        assert!(after < 1e-20);
    }
}

#[test]
fn noiseless_grid_arrival_is_recovered() {
    let n = 8;
    let codebook = dft_codebook(n, 3);
    let angles: Vec<f64> = (0..codebook.len()).map(|k| codeword_angle(n, k)).collect();
    let mut rng = seeded(20);
    for (k, &theta) in angles.iter().enumerate() {
        let a = steering_vector(n, theta);
        let s: Vec<Complex64> = (0..16).map(|_| cn01(&mut rng)).collect();
        let y = ComplexMatrix::from_fn(n, 16, |i, t| a[i] * s[t]);
        let groups = sweep_snapshots(&y, &codebook).unwrap();
        let (idx, angle) = doa_estimate(&groups, &angles).unwrap();
        assert_eq!(idx, k);
        assert!((angle - theta).abs() < 1e-12);
        // Beam selection by enumeration agrees.
        let h = ComplexMatrix::from_fn(1, n, |_, i| a[i].conj());
        assert_eq!(select_beams(&h, n, &codebook).unwrap(), vec![k]);
    }
}

#[test]
fn dl_rate_is_monotone_in_power() {
    let mut rng = seeded(21);
    let h = gen_rayleigh(4, 4, &mut rng).unwrap();
    let w = cn_matrix(4, 2, 1.0, &mut rng);
    let w = w.scale(1.0 / frobenius_sq(&w).sqrt());
    let mut last = 0.0;
    for p_dbm in (-20..=50).step_by(5) {
        let rate = dl_rate(&h, &w, dbm_to_watt(p_dbm as f64), 1e-3, None).unwrap();
        assert!(rate >= last - 1e-12);
        last = rate;
    }
}
