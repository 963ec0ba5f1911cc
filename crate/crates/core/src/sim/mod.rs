//! Scenario wiring and Monte Carlo driver.
//!
//! Each trial draws its channels from a stream keyed by `(seed, trial)`, so
//! every scheme and power point sees the same channel realizations; noise
//! and burst symbols come from a stream that also keys on power and scheme.

mod doa;
mod multi_user;
pub mod pipeline;
pub mod rates;
mod su_mimo;

use rayon::prelude::*;
use serde::Serialize;

use crate::beamforming::{phase_shifter_count, ArchitectureConfig, Connectivity};
use crate::cancellation::check_saturation;
use crate::channel::db_to_linear;
use crate::config::{ScenarioConfig, ScenarioId, Scheme, SchemeKind};
use crate::error::Result;
use crate::impairments::{dbm_to_watt, TxImpairmentConfig};
use crate::output::CurvePoint;
use crate::rng::{substream, SimRng};

pub use rates::{dl_rate, mu_sum_rate, ul_rate, waterfilling_capacity};

/// Rates of one trial. Half-duplex time sharing is already applied, so the
/// scenario metric is `dl + ul` (UL is zero where only DL is reported).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialOutcome {
    pub dl: f64,
    pub ul: f64,
}

impl TrialOutcome {
    pub fn metric(&self) -> f64 {
        self.dl + self.ul
    }
}

const STREAM_CHANNEL: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Everything a scenario needs to know about the scheme under test at one
/// power point, in linear units.
#[derive(Debug, Clone)]
pub(crate) struct Ctx<'a> {
    pub cfg: &'a ScenarioConfig,
    pub scheme: Scheme,
    pub p_w: f64,
    pub p_ul_w: f64,
    pub g_dl: f64,
    pub g_ul: f64,
    pub g_si: f64,
    pub noise_bs: f64,
    pub noise_ue: f64,
    pub impairments: TxImpairmentConfig,
    pub taps: usize,
    pub digital: bool,
    /// Residual budget of the precoder projection (watts over all RX chains).
    pub mu: f64,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ScenarioConfig, power_dbm: f64, scheme: Scheme) -> Self {
        let lb = &cfg.link_budget;
        let arch = &cfg.architecture;
        let noise_bs = dbm_to_watt(lb.bs_noise_floor_dbm);
        let taps = match scheme.kind {
            SchemeKind::Proposed => arch.k,
            SchemeKind::Benchmark => cfg.benchmark_taps(),
            SchemeKind::IdealCsi => arch.max_taps(),
            SchemeKind::HalfDuplex => 0,
        };
        // The scenario-A/B benchmarks rely on analog taps and beamforming
        // alone; the C/D benchmarks differ from the proposal only in taps
        // and training.
        let digital = match scheme.kind {
            SchemeKind::Proposed | SchemeKind::IdealCsi => true,
            SchemeKind::Benchmark => matches!(cfg.scenario, ScenarioId::C | ScenarioId::D),
            SchemeKind::HalfDuplex => false,
        };
        // With a digital stage behind it, the analog residual only has to
        // stay clear of saturation; without one it must reach the noise floor.
        let mu = if digital {
            arch.m_r as f64 * cfg.saturation.threshold_w() / 2.0
        } else {
            noise_bs
        };
        let impairments = if scheme.ideal_tx {
            TxImpairmentConfig::ideal()
        } else {
            cfg.impairments
        };
        Self {
            cfg,
            scheme,
            p_w: dbm_to_watt(power_dbm),
            p_ul_w: dbm_to_watt(cfg.ul_power_dbm.unwrap_or(power_dbm)),
            g_dl: db_to_linear(-lb.dl_pathloss_db),
            g_ul: db_to_linear(-lb.ul_pathloss_db),
            g_si: db_to_linear(-lb.si_isolation_db),
            noise_bs,
            noise_ue: dbm_to_watt(lb.ue_noise_floor_dbm),
            impairments,
            taps,
            digital,
            mu,
        }
    }

    fn hd(&self) -> bool {
        self.scheme.kind == SchemeKind::HalfDuplex
    }

    fn ideal_csi(&self) -> bool {
        self.scheme.kind == SchemeKind::IdealCsi
    }

    fn saturated(&self, si_power: &[f64], signal_power: &[f64]) -> Vec<bool> {
        let total: Vec<f64> = si_power
            .iter()
            .zip(signal_power)
            .map(|(s, u)| s + u + self.noise_bs)
            .collect();
        check_saturation(&total, &self.cfg.saturation)
    }
}

fn scheme_code(s: Scheme) -> u64 {
    let k = match s.kind {
        SchemeKind::Proposed => 0,
        SchemeKind::Benchmark => 1,
        SchemeKind::HalfDuplex => 2,
        SchemeKind::IdealCsi => 3,
    };
    2 * k + s.ideal_tx as u64
}

pub fn channel_stream(seed: u64, trial: u64) -> SimRng {
    substream(seed, &[STREAM_CHANNEL, trial])
}

pub fn noise_stream(seed: u64, trial: u64, power_dbm: f64, scheme: Scheme) -> SimRng {
    substream(seed, &[STREAM_NOISE, trial, power_dbm.to_bits(), scheme_code(scheme)])
}

/// One slot of the scenario pipeline for trial `trial`.
pub fn run_trial(cfg: &ScenarioConfig, power_dbm: f64, scheme: Scheme, trial: u64) -> Result<TrialOutcome> {
    let ctx = Ctx::new(cfg, power_dbm, scheme);
    let mut ch = channel_stream(cfg.seed, trial);
    let mut rng = noise_stream(cfg.seed, trial, power_dbm, scheme);
    match cfg.scenario {
        ScenarioId::A => su_mimo::scenario_a(&ctx, &mut ch, &mut rng),
        ScenarioId::B => su_mimo::scenario_b(&ctx, &mut ch, &mut rng),
        ScenarioId::C => multi_user::scenario_c(&ctx, &mut ch, &mut rng),
        ScenarioId::D => doa::scenario_d(&ctx, &mut ch, &mut rng),
    }
}

/// Worker threads: `FDMIMO_THREADS` if set to a positive integer, otherwise
/// rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var("FDMIMO_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Mean and standard error over trials for every (power, scheme) pair.
/// Results are collected in trial order and summed sequentially, so the
/// output does not depend on the thread count.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<CurvePoint>> {
    run_scenario_with_threads(cfg, thread_cap())
}

pub fn run_scenario_with_threads(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| crate::error::Error::Numerical(format!("thread pool: {e}")))?;
    let jobs: Vec<(f64, Scheme)> = cfg
        .schemes
        .iter()
        .flat_map(|&s| cfg.powers_dbm.iter().map(move |&p| (p, s)))
        .collect();
    pool.install(|| {
        jobs.iter()
            .map(|&(p, s)| {
                let rates = (0..cfg.trials as u64)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, p, s, t).map(|o| o.metric()))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(CurvePoint::from_samples(p, s.label(), &rates))
            })
            .collect()
    })
}

/// Hardware counts in the style of the complexity comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub phase_shifters_partial: usize,
    pub phase_shifters_full: usize,
    /// Taps of an antenna-level canceller (every TX/RX antenna pair).
    pub taps_antenna_level: usize,
    /// Taps of a full chain-level canceller.
    pub taps_chain_level: usize,
    /// Taps of the reduced canceller.
    pub taps_reduced: usize,
}

pub fn complexity_report(cfg: &ArchitectureConfig) -> ComplexityReport {
    ComplexityReport {
        phase_shifters_partial: phase_shifter_count(cfg, Connectivity::PartiallyConnected),
        phase_shifters_full: phase_shifter_count(cfg, Connectivity::FullyConnected),
        taps_antenna_level: cfg.n * cfg.m,
        taps_chain_level: cfg.max_taps(),
        taps_reduced: cfg.k,
    }
}
