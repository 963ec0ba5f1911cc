use fdmimo_core::beamforming::{eigen_precoder, quantize_phase, zf_precoder};
use fdmimo_core::cancellation::{
    apply_digital_canceller, check_saturation, select_taps, set_tap_gains, train_digital_canceller_reduced,
};
use fdmimo_core::config::ScenarioConfig;
use fdmimo_core::estimation::{doa_estimate, mmse_estimate, orthogonal_pilots};
use fdmimo_core::impairments::{apply_tx_chain, pa_nonlinearity};
use fdmimo_core::linalg::frobenius_sq;
use fdmimo_core::output::{format_sig6, parse_csv, render_csv};
use fdmimo_core::rng::{cn_matrix, seeded};
use fdmimo_core::sim::{dl_rate, run_scenario_with_threads, ul_rate};
use fdmimo_core::{run_trial, ComplexMatrix, CurvePoint, SaturationSpec, Scheme, SchemeKind, TxImpairmentConfig};
use num_complex::Complex64;
use proptest::prelude::*;

const SCENARIO_A: &str = include_str!("../../cli/configs/scenario_a.json");

fn small_a(trials: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::from_json(SCENARIO_A).unwrap();
    cfg.trials = trials;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_taps_keep_the_largest_entries(seed in any::<u64>(), k in 0usize..=8) {
        let h = cn_matrix(2, 4, 1.0, &mut seeded(seed));
        let support = select_taps(&h, k).unwrap();
        prop_assert_eq!(support.len(), k);
        let kept: Vec<f64> = support.iter().map(|p| h[(p.rx, p.tx)].norm_sqr()).collect();
        let floor = kept.iter().cloned().fold(f64::INFINITY, f64::min);
        let dropped = h
            .iter()
            .map(|v| v.norm_sqr())
            .filter(|m| !kept.contains(m))
            .fold(0.0, f64::max);
        prop_assert!(k == 0 || floor >= dropped);
        let residual = frobenius_sq(&(&h - set_tap_gains(&h, &support).unwrap().analog_matrix()));
        let expected: f64 = frobenius_sq(&h) - kept.iter().sum::<f64>();
        prop_assert!((residual - expected).abs() < 1e-12);
    }

    #[test]
    fn pa_is_odd_and_compressive(re in -0.05f64..0.05, im in -0.05f64..0.05) {
        let x = Complex64::new(re, im);
        let y = pa_nonlinearity(x, 20.0);
        prop_assert!((pa_nonlinearity(-x, 20.0) + y).norm() < 1e-15);
        prop_assert!(y.norm() <= x.norm() + 1e-15);
    }

    #[test]
    fn disabled_impairments_are_identity(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let x = [Complex64::new(re, im)];
        prop_assert_eq!(apply_tx_chain(&x, &TxImpairmentConfig::ideal()), x.to_vec());
    }

    #[test]
    fn quantized_phase_is_nearest_grid_point(phase in -10.0f64..10.0, bits in 1u32..6) {
        let q = quantize_phase(phase, bits);
        let step = 2.0 * std::f64::consts::PI / f64::from(1u32 << bits);
        prop_assert!(((q / step).round() * step - q).abs() < 1e-9);
        let wrapped = Complex64::from_polar(1.0, q - phase).arg().abs();
        prop_assert!(wrapped <= step / 2.0 + 1e-9);
    }

    #[test]
    fn precoders_have_unit_frobenius_norm(seed in any::<u64>(), streams in 1usize..=4) {
        let h = cn_matrix(4, 4, 1.0, &mut seeded(seed));
        let w = eigen_precoder(&h, streams).unwrap().matrix;
        prop_assert!((frobenius_sq(&w) - 1.0).abs() < 1e-9);
        let z = zf_precoder(&cn_matrix(streams, 4, 1.0, &mut seeded(seed ^ 1)), None).unwrap().matrix;
        prop_assert!((frobenius_sq(&z) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rates_are_nonnegative_and_interference_only_hurts(seed in any::<u64>(), p in 1e-3f64..10.0) {
        let mut rng = seeded(seed);
        let h = cn_matrix(2, 2, 1.0, &mut rng);
        let w = ComplexMatrix::identity(2, 2).scale(std::f64::consts::FRAC_1_SQRT_2);
        let a = cn_matrix(2, 2, 0.1, &mut rng);
        let cov = &a * a.adjoint();
        let clean = dl_rate(&h, &w, p, 1e-2, None).unwrap();
        let dirty = dl_rate(&h, &w, p, 1e-2, Some(&cov)).unwrap();
        prop_assert!(dirty >= 0.0 && dirty <= clean + 1e-9);
        let ul_clean = ul_rate(&h, 1e-2, None, &[false, false]).unwrap();
        let ul_dirty = ul_rate(&h, 1e-2, Some(&cov), &[false, false]).unwrap();
        prop_assert!(ul_dirty <= ul_clean + 1e-9);
    }

    #[test]
    fn saturation_is_a_strict_threshold(p_dbm in -60.0f64..30.0) {
        let spec = SaturationSpec { max_input_dbm: 0.0 };
        let flags = check_saturation(&[1e-3 * 10f64.powf(p_dbm / 10.0)], &spec);
        prop_assert_eq!(flags[0], p_dbm > 0.0);
    }

    #[test]
    fn digital_fit_never_increases_residual(seed in any::<u64>(), chains in 1usize..=3) {
        let mut rng = seeded(seed);
        let x = cn_matrix(chains, 200, 1.0, &mut rng);
        let y = cn_matrix(2, 200, 1.0, &mut rng);
        let fitted = train_digital_canceller_reduced(&x, &y).unwrap();
        let after = apply_digital_canceller(&fitted, &x, &y).unwrap();
        prop_assert!(frobenius_sq(&after) <= frobenius_sq(&y) * (1.0 + 1e-12));
    }

    #[test]
    fn doa_is_scale_invariant(seed in any::<u64>(), scale in 1e-6f64..1e6) {
        let groups: Vec<ComplexMatrix> = (0..8).map(|k| cn_matrix(1, 4, 1.0, &mut seeded(seed ^ k))).collect();
        let angles: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let scaled: Vec<ComplexMatrix> = groups.iter().map(|g| g.scale(scale)).collect();
        prop_assert_eq!(doa_estimate(&groups, &angles).unwrap(), doa_estimate(&scaled, &angles).unwrap());
    }

    #[test]
    fn full_packet_pilots_beat_the_hd_preamble(power in 1e-3f64..1e3, noise in 1e-3f64..1e3) {
        let error_var = |lp: usize| {
            let pilots = orthogonal_pilots(1, lp).unwrap().scale(power.sqrt());
            let y = ComplexMatrix::zeros(1, lp);
            mmse_estimate(&y, &pilots, noise, 1.0, 0).unwrap().error_var[0]
        };
        prop_assert!(error_var(400) < error_var(40));
    }

    #[test]
    fn sig6_round_trips_to_six_digits(x in -1e6f64..1e6) {
        let back: f64 = format_sig6(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn csv_round_trip(rates in prop::collection::vec(0.0f64..80.0, 2..20)) {
        let points = vec![CurvePoint::from_samples(10.0, "hd", &rates), CurvePoint::from_samples(20.0, "proposed", &rates)];
        let parsed = parse_csv(&render_csv(&points)).unwrap();
        prop_assert_eq!(parsed.len(), 2);
        for (a, b) in parsed.iter().zip(&points) {
            prop_assert_eq!(&a.scheme, &b.scheme);
            prop_assert!((a.mean_rate - b.mean_rate).abs() <= 5e-6 * b.mean_rate.abs() + 1e-12);
        }
    }
}

#[test]
fn full_duplex_never_beats_the_si_free_links_on_average() {
    // Schemes see independent pilot noise, so single trials can differ by
    // estimation luck; the bound holds for the mean.
    let cfg = small_a(1);
    let trials = 40;
    for power in [0.0, 30.0, 50.0] {
        let mean = |scheme: Scheme| {
            (0..trials)
                .map(|t| run_trial(&cfg, power, scheme, t).unwrap().metric())
                .sum::<f64>()
                / trials as f64
        };
        let isolated = 2.0 * mean(Scheme::ideal_tx(SchemeKind::HalfDuplex));
        for kind in [SchemeKind::Proposed, SchemeKind::Benchmark] {
            let fd = mean(Scheme::ideal_tx(kind));
            assert!(fd <= isolated * 1.01, "{kind:?} at {power} dBm: {fd} vs {isolated}");
        }
    }
}

#[test]
fn ideal_csi_rates_grow_with_power() {
    let mut cfg = small_a(1);
    cfg.impairments = TxImpairmentConfig::ideal();
    for trial in 0..5 {
        let mut last = 0.0;
        for power in [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0] {
            let r = run_trial(&cfg, power, Scheme::new(SchemeKind::IdealCsi), trial)
                .unwrap()
                .metric();
            assert!(r >= last - 1e-9, "trial {trial}: {r} < {last} at {power} dBm");
            last = r;
        }
    }
}

#[test]
fn single_trial_scenario_reproduces_run_trial() {
    let mut cfg = small_a(1);
    cfg.powers_dbm = vec![20.0];
    let points = run_scenario_with_threads(&cfg, Some(2)).unwrap();
    for point in points {
        let scheme: Scheme = point.scheme.parse().unwrap();
        let direct = run_trial(&cfg, 20.0, scheme, 0).unwrap().metric();
        assert_eq!(point.mean_rate, direct);
        assert_eq!(point.trials, 1);
    }
}

#[test]
fn trials_are_independent_of_scheduling() {
    let cfg = small_a(6);
    let a = render_csv(&run_scenario_with_threads(&cfg, Some(1)).unwrap());
    let b = render_csv(&run_scenario_with_threads(&cfg, Some(3)).unwrap());
    assert_eq!(a, b);
}
