//! Analog `K`-tap self-interference canceller, RX saturation check,
//! SI-aware precoder projection, and the nonlinear digital canceller.
//!
//! Each analog tap takes one TX chain output (MUX `N_T`-to-1) and injects
//! into one RX chain input (DEMUX 1-to-`M_R`). Narrowband operation folds
//! the tap's fixed delay into its complex gain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::DigitalBeamformer;
use crate::error::{Error, Result};
use crate::impairments::dbm_to_watt;
use crate::linalg::{complement_projector, frobenius_sq, right_singular, ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TapPosition {
    pub rx: usize,
    pub tx: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CancellerState {
    pub rx_chains: usize,
    pub tx_chains: usize,
    pub support: Vec<TapPosition>,
    pub tap_gains: Vec<Complex64>,
    pub digital: Option<DigitalCanceller>,
}

impl CancellerState {
    pub fn empty(rx_chains: usize, tx_chains: usize) -> Self {
        Self {
            rx_chains,
            tx_chains,
            support: Vec::new(),
            tap_gains: Vec::new(),
            digital: None,
        }
    }

    /// The analog canceller as an `M_R x N_T` matrix `C`.
    pub fn analog_matrix(&self) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(self.rx_chains, self.tx_chains);
        for (pos, &g) in self.support.iter().zip(&self.tap_gains) {
            c[(pos.rx, pos.tx)] = g;
        }
        c
    }

    pub fn validate(&self, max_taps: usize) -> Result<()> {
        if self.support.len() > max_taps {
            return Err(Error::Parameter(format!(
                "{} taps exceed K = {max_taps}",
                self.support.len()
            )));
        }
        if self.support.len() != self.tap_gains.len() {
            return Err(Error::Dimension("one gain per tap required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.support {
            if p.rx >= self.rx_chains || p.tx >= self.tx_chains {
                return Err(Error::Parameter(format!("tap ({}, {}) out of range", p.rx, p.tx)));
            }
            if !seen.insert(*p) {
                return Err(Error::Parameter(format!("duplicate tap ({}, {})", p.rx, p.tx)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationSpec {
    pub max_input_dbm: f64,
}

impl Default for SaturationSpec {
    fn default() -> Self {
        Self { max_input_dbm: 0.0 }
    }
}

impl SaturationSpec {
    pub fn threshold_w(&self) -> f64 {
        dbm_to_watt(self.max_input_dbm)
    }
}

/// `F_rx^H H_si F_tx`: the SI seen from TX chain outputs to RX chain inputs.
pub fn effective_si_channel(h_si: &ComplexMatrix, f_tx: &ComplexMatrix, f_rx: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h_si.ncols() != f_tx.nrows() || h_si.nrows() != f_rx.nrows() {
        return Err(Error::Dimension(format!(
            "SI channel {}x{} does not match beamformers {}x{} (tx) and {}x{} (rx)",
            h_si.nrows(),
            h_si.ncols(),
            f_tx.nrows(),
            f_tx.ncols(),
            f_rx.nrows(),
            f_rx.ncols()
        )));
    }
    Ok(f_rx.adjoint() * h_si * f_tx)
}

/// The `k` largest-magnitude positions of `h_eff` (ties in row-major order).
/// Because the residual Frobenius power separates over entries, this support
/// minimizes it among all size-`k` supports.
pub fn select_taps(h_eff: &ComplexMatrix, k: usize) -> Result<Vec<TapPosition>> {
    let (rows, cols) = h_eff.shape();
    if k > rows * cols {
        return Err(Error::Parameter(format!(
            "K = {k} exceeds the {rows}x{cols} tap positions"
        )));
    }
    let mut positions: Vec<(TapPosition, f64)> = (0..rows)
        .flat_map(|rx| (0..cols).map(move |tx| TapPosition { rx, tx }))
        .map(|p| (p, h_eff[(p.rx, p.tx)].norm_sqr()))
        .collect();
    // Stable sort keeps row-major order among equal magnitudes.
    positions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut support: Vec<TapPosition> = positions.into_iter().take(k).map(|(p, _)| p).collect();
    support.sort();
    Ok(support)
}

/// Sets each tap to the SI coefficient it cancels, so `H_eff - C` is zero on
/// the support.
pub fn set_tap_gains(h_eff: &ComplexMatrix, support: &[TapPosition]) -> Result<CancellerState> {
    let (rows, cols) = h_eff.shape();
    let state = CancellerState {
        rx_chains: rows,
        tx_chains: cols,
        support: support.to_vec(),
        tap_gains: support
            .iter()
            .map(|p| h_eff.get((p.rx, p.tx)).copied().unwrap_or(ZERO))
            .collect(),
        digital: None,
    };
    state.validate(rows * cols)?;
    Ok(state)
}

/// `diag((H_eff - C) Q (H_eff - C)^H)` for TX-chain covariance `Q` (watts).
pub fn residual_si_power(
    h_eff: &ComplexMatrix,
    canceller: &CancellerState,
    tx_cov: &ComplexMatrix,
) -> Result<Vec<f64>> {
    let r = h_eff - canceller.analog_matrix();
    if tx_cov.nrows() != r.ncols() || tx_cov.ncols() != r.ncols() {
        return Err(Error::Dimension("TX covariance does not match TX chains".into()));
    }
    let p = &r * tx_cov * r.adjoint();
    Ok((0..p.nrows()).map(|i| p[(i, i)].re.max(0.0)).collect())
}

/// Flags chains whose total input power strictly exceeds the threshold.
pub fn check_saturation(per_chain_power_w: &[f64], spec: &SaturationSpec) -> Vec<bool> {
    let t = spec.threshold_w();
    per_chain_power_w.iter().map(|&p| p > t).collect()
}

#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub beamformer: DigitalBeamformer,
    /// Right singular directions of the residual that were projected out
    /// (`N_T x removed`, orthonormal columns).
    pub removed: ComplexMatrix,
}

impl ProjectionOutcome {
    /// Projector onto the TX-chain subspace left after removal.
    pub fn projector(&self) -> ComplexMatrix {
        complement_projector(&self.removed)
    }
}

/// Steers the precoder away from the analog residual `R = H_eff - C`.
///
/// If `||R W||_F^2 <= mu` the precoder is returned unchanged. Otherwise the
/// strongest right singular directions of `R` are projected out one at a
/// time (`W <- (I - V_r V_r^H) W`, renormalized to the input Frobenius norm)
/// until the residual fits the budget. `h_eff` and `c` must be in the units
/// in which `mu` is stated. The output never increases `||R W||_F`.
pub fn si_aware_precoder_projection(
    w: &DigitalBeamformer,
    h_eff: &ComplexMatrix,
    c: &ComplexMatrix,
    mu: f64,
) -> Result<ProjectionOutcome> {
    if mu < 0.0 || mu.is_nan() {
        return Err(Error::Parameter(format!("residual budget must be >= 0, got {mu}")));
    }
    let chains = w.matrix.nrows();
    if h_eff.ncols() != chains || c.shape() != h_eff.shape() {
        return Err(Error::Dimension("residual does not match precoder rows".into()));
    }
    let r = h_eff - c;
    let input_norm = frobenius_sq(&w.matrix);
    let input_res = frobenius_sq(&(&r * &w.matrix));
    if input_res <= mu {
        return Ok(ProjectionOutcome {
            beamformer: w.clone(),
            removed: ComplexMatrix::zeros(chains, 0),
        });
    }
    let (s, v) = right_singular(&r);
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > 1e-12 * top.max(f64::MIN_POSITIVE)).count();
    for removed in 1..=rank {
        if removed >= chains {
            break;
        }
        let basis = v.columns(0, removed).into_owned();
        let projected = complement_projector(&basis) * &w.matrix;
        let norm = frobenius_sq(&projected);
        if norm <= 1e-24 * input_norm.max(f64::MIN_POSITIVE) {
            continue;
        }
        let scaled = projected.scale((input_norm / norm).sqrt());
        let res = frobenius_sq(&(&r * &scaled));
        if res <= mu || removed == rank {
            let mut beamformer = w.clone();
            beamformer.matrix = scaled;
            return Ok(ProjectionOutcome {
                beamformer,
                removed: basis,
            });
        }
    }
    Err(Error::Infeasible { chains })
}

/// Per-TX-chain basis `{x, conj(x), x|x|^2}` for the digital canceller.
pub const BASIS_PER_CHAIN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalCanceller {
    /// `M_R x 3 N_T`; columns `3n..3n+3` act on TX chain `n`.
    pub coeffs: ComplexMatrix,
}

impl DigitalCanceller {
    pub fn zeros(rx_chains: usize, tx_chains: usize) -> Self {
        Self {
            coeffs: ComplexMatrix::zeros(rx_chains, BASIS_PER_CHAIN * tx_chains),
        }
    }
}

/// Regressor matrix `(3 N_T) x T` from ideal TX baseband samples (`N_T x T`).
pub fn regressors(tx: &ComplexMatrix) -> ComplexMatrix {
    let (chains, t) = tx.shape();
    let mut phi = ComplexMatrix::zeros(BASIS_PER_CHAIN * chains, t);
    for n in 0..chains {
        for k in 0..t {
            let x = tx[(n, k)];
            phi[(3 * n, k)] = x;
            phi[(3 * n + 1, k)] = x.conj();
            phi[(3 * n + 2, k)] = x * x.norm_sqr();
        }
    }
    phi
}

/// Joint least-squares fit of every RX chain's residual onto the
/// per-TX-chain basis.
pub fn train_digital_canceller(tx: &ComplexMatrix, rx_residual: &ComplexMatrix) -> Result<DigitalCanceller> {
    let (chains, t) = tx.shape();
    if rx_residual.ncols() != t {
        return Err(Error::Dimension(format!(
            "{} TX samples vs {} RX samples",
            t,
            rx_residual.ncols()
        )));
    }
    let p = BASIS_PER_CHAIN * chains;
    if t < p {
        return Err(Error::Parameter(format!(
            "training needs at least {p} samples, got {t}"
        )));
    }
    let phi = regressors(tx);
    // Column-normalized design matrix (T x p) for conditioning.
    let mut design = phi.transpose();
    let mut scale = vec![0.0; p];
    for (j, col) in design.column_iter_mut().enumerate() {
        let n = col.norm();
        scale[j] = n;
        if n > 0.0 {
            let mut col = col;
            col.unscale_mut(n);
        }
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * t as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }
    let b = rx_residual.transpose();
    let sol = svd.solve(&b, tol).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut coeffs = sol.transpose();
    for (j, &s) in scale.iter().enumerate() {
        let mut col = coeffs.column_mut(j);
        if s > 0.0 {
            col.unscale_mut(s);
        }
    }
    Ok(DigitalCanceller { coeffs })
}

/// Like [`train_digital_canceller`], but first drops basis columns that are
/// linearly dependent on earlier ones (e.g. TX chains carrying scaled copies
/// of the same stream). Dropped columns get zero coefficients.
pub fn train_digital_canceller_reduced(tx: &ComplexMatrix, rx_residual: &ComplexMatrix) -> Result<DigitalCanceller> {
    let (chains, t) = tx.shape();
    if rx_residual.ncols() != t {
        return Err(Error::Dimension(format!(
            "{} TX samples vs {} RX samples",
            t,
            rx_residual.ncols()
        )));
    }
    let p = BASIS_PER_CHAIN * chains;
    let design = regressors(tx).transpose();
    // Modified Gram-Schmidt on normalized columns.
    let mut keep = Vec::new();
    let mut ortho: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for j in 0..p {
        let col = design.column(j);
        let n = col.norm();
        if n == 0.0 {
            continue;
        }
        let mut v = col.unscale(n);
        for q in &ortho {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let r = v.norm();
        if r > 1e-6 {
            ortho.push(v.unscale(r));
            keep.push(j);
        }
    }
    let mut out = DigitalCanceller::zeros(rx_residual.nrows(), chains);
    if keep.is_empty() {
        return Ok(out);
    }
    if t < keep.len() {
        return Err(Error::Parameter(format!(
            "training needs at least {} samples, got {t}",
            keep.len()
        )));
    }
    let sub = ComplexMatrix::from_fn(t, keep.len(), |i, k| design[(i, keep[k])]);
    let scale: Vec<f64> = sub.column_iter().map(|c| c.norm()).collect();
    let mut normed = sub;
    for (j, mut col) in normed.column_iter_mut().enumerate() {
        col.unscale_mut(scale[j]);
    }
    let sol = normed
        .svd(true, true)
        .solve(&rx_residual.transpose(), 1e-9)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    for (k, &j) in keep.iter().enumerate() {
        for i in 0..out.coeffs.nrows() {
            out.coeffs[(i, j)] = sol[(k, i)] / scale[k];
        }
    }
    Ok(out)
}

/// `rx - coeffs * basis(tx)`.
pub fn apply_digital_canceller(
    canceller: &DigitalCanceller,
    tx: &ComplexMatrix,
    rx: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let phi = regressors(tx);
    if canceller.coeffs.ncols() != phi.nrows() || canceller.coeffs.nrows() != rx.nrows() || rx.ncols() != tx.ncols() {
        return Err(Error::Dimension("digital canceller dimensions do not match".into()));
    }
    Ok(rx - &canceller.coeffs * phi)
}
