//! Random channel generators: Rayleigh, Rician, clustered mmWave, and
//! Gauss-Markov evolution for CSI aging.
//!
//! All generators return unit-average-gain channels (`E|h|^2 = 1` per entry).
//! Pathloss and passive isolation are applied by the caller.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::rng::{cn01, cn_matrix};

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "channel dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// I.i.d. CN(0, 1) entries.
pub fn gen_rayleigh<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_dims(rows, cols)?;
    Ok(cn_matrix(rows, cols, 1.0, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianParams {
    /// Rician factor in dB; `-inf` degenerates to Rayleigh.
    pub kappa_db: f64,
    pub rows: usize,
    pub cols: usize,
}

impl RicianParams {
    pub fn new(kappa_db: f64, rows: usize, cols: usize) -> Self {
        Self { kappa_db, rows, cols }
    }

    pub fn kappa(&self) -> f64 {
        if self.kappa_db == f64::NEG_INFINITY {
            0.0
        } else {
            db_to_linear(self.kappa_db)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.rows, self.cols)?;
        if self.kappa_db.is_nan() || self.kappa_db == f64::INFINITY {
            return Err(Error::Parameter(format!(
                "rician factor must be finite dB, got {}",
                self.kappa_db
            )));
        }
        Ok(())
    }
}

/// A Rician draw kept split into its two components.
#[derive(Debug, Clone)]
pub struct RicianDraw {
    pub los: ComplexMatrix,
    pub scatter: ComplexMatrix,
    pub los_weight: f64,
    pub scatter_weight: f64,
}

impl RicianDraw {
    pub fn matrix(&self) -> ComplexMatrix {
        self.los.scale(self.los_weight) + self.scatter.scale(self.scatter_weight)
    }
}

/// Rician channel around an arbitrary deterministic component `los`
/// (entries should have unit average power).
pub fn rician_around<R: Rng + ?Sized>(los: ComplexMatrix, kappa_db: f64, rng: &mut R) -> Result<RicianDraw> {
    let params = RicianParams::new(kappa_db, los.nrows(), los.ncols());
    params.validate()?;
    let kappa = params.kappa();
    let scatter = cn_matrix(los.nrows(), los.ncols(), 1.0, rng);
    Ok(RicianDraw {
        los,
        scatter,
        los_weight: (kappa / (kappa + 1.0)).sqrt(),
        scatter_weight: (1.0 / (kappa + 1.0)).sqrt(),
    })
}

/// Rician draw whose deterministic part has element-wise random unit-modulus
/// phases (near-field self-interference has no array-steering structure).
pub fn gen_rician_parts<R: Rng + ?Sized>(params: &RicianParams, rng: &mut R) -> Result<RicianDraw> {
    params.validate()?;
    let mut los = ComplexMatrix::zeros(params.rows, params.cols);
    for r in 0..params.rows {
        for c in 0..params.cols {
            let phase: f64 = rng.random_range(0.0..2.0 * PI);
            los[(r, c)] = Complex64::from_polar(1.0, phase);
        }
    }
    rician_around(los, params.kappa_db, rng)
}

pub fn gen_rician<R: Rng + ?Sized>(params: &RicianParams, rng: &mut R) -> Result<ComplexMatrix> {
    Ok(gen_rician_parts(params, rng)?.matrix())
}

/// Unit-norm ULA response with half-wavelength spacing:
/// element `k` is `exp(j pi k sin(theta)) / sqrt(n)`.
pub fn steering_vector(n: usize, theta: f64) -> ComplexVector {
    let norm = 1.0 / (n as f64).sqrt();
    let s = theta.sin();
    ComplexVector::from_iterator(n, (0..n).map(|k| Complex64::from_polar(norm, PI * k as f64 * s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteredParams {
    pub num_paths: usize,
    pub rx_elements: usize,
    pub tx_elements: usize,
}

impl ClusteredParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::Parameter("clustered channel needs at least one path".into()));
        }
        check_dims(self.rx_elements, self.tx_elements)
    }
}

/// Per-path complex gain, arrival angle (rx side), departure angle (tx side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub arrival: f64,
    pub departure: f64,
}

pub fn draw_paths<R: Rng + ?Sized>(params: &ClusteredParams, rng: &mut R) -> Result<Vec<Path>> {
    params.validate()?;
    Ok((0..params.num_paths)
        .map(|_| Path {
            gain: cn01(rng),
            arrival: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
            departure: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
        })
        .collect())
}

/// `sqrt(rows*cols/P) * sum_p gain_p a_rx(arrival_p) a_tx(departure_p)^H`.
pub fn clustered_from_paths(params: &ClusteredParams, paths: &[Path]) -> Result<ComplexMatrix> {
    params.validate()?;
    if paths.is_empty() {
        return Err(Error::Parameter("clustered channel needs at least one path".into()));
    }
    let scale = ((params.rx_elements * params.tx_elements) as f64 / paths.len() as f64).sqrt();
    let mut h = ComplexMatrix::zeros(params.rx_elements, params.tx_elements);
    for p in paths {
        let a_rx = steering_vector(params.rx_elements, p.arrival);
        let a_tx = steering_vector(params.tx_elements, p.departure);
        h += (a_rx * a_tx.adjoint()) * p.gain;
    }
    Ok(h.scale(scale))
}

pub fn gen_clustered_mmwave<R: Rng + ?Sized>(params: &ClusteredParams, rng: &mut R) -> Result<ComplexMatrix> {
    let paths = draw_paths(params, rng)?;
    clustered_from_paths(params, &paths)
}

/// Bessel function of the first kind, order zero, by its power series.
/// Accurate to ~1e-14 for `|x| <= 20`, which covers any sensible
/// Doppler-slot product.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Lag-one correlation `J0(2 pi f_d T)`, clamped to `[0, 1]`.
pub fn doppler_correlation(doppler_hz: f64, slot_s: f64) -> Result<f64> {
    if !(doppler_hz >= 0.0) || !doppler_hz.is_finite() {
        return Err(Error::Parameter(format!("doppler must be >= 0, got {doppler_hz}")));
    }
    if !(slot_s > 0.0) || !slot_s.is_finite() {
        return Err(Error::Parameter(format!("slot duration must be > 0, got {slot_s}")));
    }
    Ok(bessel_j0(2.0 * PI * doppler_hz * slot_s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgingParams {
    pub doppler_hz: f64,
    pub slot_s: f64,
}

impl Default for AgingParams {
    fn default() -> Self {
        Self {
            doppler_hz: 50.0,
            slot_s: 1e-3,
        }
    }
}

impl AgingParams {
    pub fn rho(&self) -> Result<f64> {
        doppler_correlation(self.doppler_hz, self.slot_s)
    }
}

/// `rho * prev + sqrt(1 - rho^2) * W` with `W` i.i.d. CN(0, 1).
pub fn evolve_gauss_markov<R: Rng + ?Sized>(prev: &ComplexMatrix, rho: f64, rng: &mut R) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Parameter(format!("correlation must lie in [0, 1], got {rho}")));
    }
    if rho == 1.0 {
        return Ok(prev.clone());
    }
    let innovation = cn_matrix(prev.nrows(), prev.ncols(), 1.0, rng);
    Ok(prev.scale(rho) + innovation.scale((1.0 - rho * rho).sqrt()))
}
