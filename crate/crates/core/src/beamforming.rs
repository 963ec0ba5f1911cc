//! Analog beamformers for the partially connected sub-array architecture
//! (quantized-phase DFT codebooks) and digital precoders/combiners.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, frobenius_sq, hpd_inverse, right_singular, ComplexMatrix, ComplexVector, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BfMode {
    FullyDigital,
    HybridSubarray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

/// Antenna, RF-chain, and canceller dimensions of the transceiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    /// TX antennas.
    pub n: usize,
    /// RX antennas.
    pub m: usize,
    /// TX RF chains.
    pub n_t: usize,
    /// RX RF chains.
    pub m_r: usize,
    #[serde(default = "default_phase_bits")]
    pub phase_bits: u32,
    /// Analog canceller taps.
    pub k: usize,
    pub bf_mode: BfMode,
}

fn default_phase_bits() -> u32 {
    3
}

impl ArchitectureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("n", self.n), ("m", self.m), ("n_t", self.n_t), ("m_r", self.m_r)];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("architecture.{field}"), "must be >= 1"));
            }
        }
        if self.n_t > self.n {
            return Err(Error::config("architecture.n_t", "TX RF chains exceed TX antennas"));
        }
        if self.m_r > self.m {
            return Err(Error::config("architecture.m_r", "RX RF chains exceed RX antennas"));
        }
        if !self.n.is_multiple_of(self.n_t) {
            return Err(Error::config("architecture.n_t", "n must be a multiple of n_t"));
        }
        if !self.m.is_multiple_of(self.m_r) {
            return Err(Error::config("architecture.m_r", "m must be a multiple of m_r"));
        }
        if self.k > self.max_taps() {
            return Err(Error::config(
                "architecture.k",
                format!("K = {} exceeds the n_t*m_r = {} tap bound", self.k, self.max_taps()),
            ));
        }
        if self.phase_bits == 0 || self.phase_bits > 16 {
            return Err(Error::config("architecture.phase_bits", "must lie in 1..=16"));
        }
        if self.bf_mode == BfMode::FullyDigital && (self.n != self.n_t || self.m != self.m_r) {
            return Err(Error::config(
                "architecture.bf_mode",
                "fully-digital mode needs one RF chain per antenna",
            ));
        }
        Ok(())
    }

    pub fn max_taps(&self) -> usize {
        self.n_t * self.m_r
    }

    pub fn subarray_size(&self, side: Side) -> usize {
        match side {
            Side::Tx => self.n / self.n_t,
            Side::Rx => self.m / self.m_r,
        }
    }

    pub fn chains(&self, side: Side) -> usize {
        match side {
            Side::Tx => self.n_t,
            Side::Rx => self.m_r,
        }
    }

    pub fn antennas(&self, side: Side) -> usize {
        match side {
            Side::Tx => self.n,
            Side::Rx => self.m,
        }
    }
}

/// Rounds a phase to the nearest point of the uniform `2^bits` grid on
/// `[0, 2 pi)`; exact ties go to the smaller grid phase.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let q = phase.rem_euclid(2.0 * PI) / step;
    let k = (q - 0.5).ceil().rem_euclid(levels);
    k * step
}

/// Constant-modulus projection: keeps only the quantized phase of each entry.
pub fn quantize_phases(v: &ComplexVector, bits: u32) -> ComplexVector {
    let norm = 1.0 / (v.len().max(1) as f64).sqrt();
    v.map(|z| Complex64::from_polar(norm, quantize_phase(z.arg(), bits)))
}

/// `n` DFT codewords with quantized phases; codeword `k`, element `m` is
/// `exp(j q(2 pi k m / n)) / sqrt(n)`.
pub fn dft_codebook(n: usize, bits: u32) -> Vec<ComplexVector> {
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            ComplexVector::from_iterator(
                n,
                (0..n).map(|m| {
                    let phase = 2.0 * PI * ((k * m) % n) as f64 / n as f64;
                    Complex64::from_polar(norm, quantize_phase(phase, bits))
                }),
            )
        })
        .collect()
}

/// Steering angle of DFT codeword `k` of an `n`-element ULA: `sin(theta) = 2k/n`,
/// wrapped to `[-1, 1)`.
pub fn codeword_angle(n: usize, k: usize) -> f64 {
    let mut s = 2.0 * k as f64 / n as f64;
    if s >= 1.0 {
        s -= 2.0;
    }
    s.asin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer {
    /// `antennas x chains`.
    pub matrix: ComplexMatrix,
    /// Codeword per sub-array (empty in fully-digital mode).
    pub beam_indices: Vec<usize>,
}

impl AnalogBeamformer {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n, n),
            beam_indices: Vec::new(),
        }
    }

    /// Number of nonzero entries, i.e. physical phase shifters.
    pub fn phase_shifters(&self) -> usize {
        self.matrix.iter().filter(|z| z.norm_sqr() > 0.0).count()
    }

    /// Verifies block-diagonal structure, constant modulus, and grid phases.
    pub fn check_invariants(&self, bits: u32) -> Result<()> {
        let (rows, cols) = self.matrix.shape();
        if cols == 0 || rows % cols != 0 {
            return Err(Error::Dimension(format!("analog beamformer shape {rows}x{cols}")));
        }
        let sub = rows / cols;
        let modulus = 1.0 / (sub as f64).sqrt();
        let step = 2.0 * PI / (1u64 << bits) as f64;
        for i in 0..rows {
            for j in 0..cols {
                let z = self.matrix[(i, j)];
                let inside = i / sub == j;
                if !inside {
                    if z != ZERO {
                        return Err(Error::Numerical(format!("entry ({i},{j}) outside its sub-array")));
                    }
                    continue;
                }
                if (z.norm() - modulus).abs() > 1e-12 {
                    return Err(Error::Numerical(format!("entry ({i},{j}) has wrong modulus")));
                }
                if sub > 1 || rows != cols {
                    let off = z.arg().rem_euclid(2.0 * PI) / step;
                    if (off - off.round()).abs() > 1e-9 {
                        return Err(Error::Numerical(format!("entry ({i},{j}) is off the phase grid")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Block-diagonal analog beamformer with the chosen codeword on each block.
/// Fully-digital mode bypasses the phase shifters (identity).
pub fn assemble_analog_bf(choices: &[usize], cfg: &ArchitectureConfig, side: Side) -> Result<AnalogBeamformer> {
    let antennas = cfg.antennas(side);
    if cfg.bf_mode == BfMode::FullyDigital {
        return Ok(AnalogBeamformer::identity(antennas));
    }
    let chains = cfg.chains(side);
    if choices.len() != chains {
        return Err(Error::Dimension(format!(
            "expected {chains} beam choices, got {}",
            choices.len()
        )));
    }
    let sub = cfg.subarray_size(side);
    let codebook = dft_codebook(sub, cfg.phase_bits);
    let mut matrix = ComplexMatrix::zeros(antennas, chains);
    for (j, &idx) in choices.iter().enumerate() {
        let word = codebook.get(idx).ok_or(Error::BeamIndex {
            index: idx,
            size: codebook.len(),
        })?;
        for m in 0..sub {
            matrix[(j * sub + m, j)] = word[m];
        }
    }
    let bf = AnalogBeamformer {
        matrix,
        beam_indices: choices.to_vec(),
    };
    bf.check_invariants(cfg.phase_bits)?;
    Ok(bf)
}

/// Per-sub-array exhaustive search maximizing `||H_j c||^2`, where `H_j` is
/// the block of columns of `h` belonging to sub-array `j`. Pass the DL
/// channel (`users x N`) for TX beams and `H_ul^H` for RX beams. Ties go to
/// the lowest codeword index.
pub fn select_beams(h: &ComplexMatrix, subarray: usize, codebook: &[ComplexVector]) -> Result<Vec<usize>> {
    if codebook.is_empty() {
        return Err(Error::Parameter("empty codebook".into()));
    }
    if subarray == 0 || !h.ncols().is_multiple_of(subarray) {
        return Err(Error::Dimension(format!(
            "{} antennas do not split into sub-arrays of {subarray}",
            h.ncols()
        )));
    }
    let groups = h.ncols() / subarray;
    let mut out = Vec::with_capacity(groups);
    for j in 0..groups {
        let block = h.columns(j * subarray, subarray);
        let mut best = (0usize, f64::NEG_INFINITY);
        for (k, word) in codebook.iter().enumerate() {
            let g: f64 = (block * word).iter().map(|z| z.norm_sqr()).sum();
            if g > best.1 {
                best = (k, g);
            }
        }
        out.push(best.0);
    }
    Ok(out)
}

/// Codeword maximizing `|c^H a(theta)|` for a sub-array of `n` elements.
pub fn select_beam_by_doa(theta: f64, codebook: &[ComplexVector]) -> Result<usize> {
    let first = codebook
        .first()
        .ok_or_else(|| Error::Parameter("empty codebook".into()))?;
    let a = crate::channel::steering_vector(first.len(), theta);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, word) in codebook.iter().enumerate() {
        let g = word.dotc(&a).norm_sqr();
        if g > best.1 {
            best = (k, g);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformer {
    pub matrix: ComplexMatrix,
    pub power_scale: f64,
}

impl DigitalBeamformer {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            power_scale: 1.0,
        }
    }

    pub fn streams(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn normalized(mut self) -> Self {
        let f = frobenius_sq(&self.matrix).sqrt();
        if f > 0.0 {
            self.matrix.unscale_mut(f);
        }
        self
    }
}

/// `W = H^H (H H^H)^-1` with optional per-stream column powers, scaled to
/// unit Frobenius norm.
pub fn zf_precoder(h: &ComplexMatrix, stream_powers: Option<&[f64]>) -> Result<DigitalBeamformer> {
    let (users, chains) = h.shape();
    if users == 0 || users > chains {
        return Err(Error::Dimension(format!(
            "zero-forcing needs 1 <= users <= chains, got {users}x{chains}"
        )));
    }
    let cond = condition_number(h);
    if !(cond < 1e10) {
        return Err(Error::Singular { condition: cond });
    }
    let gram = h * h.adjoint();
    let inv = gram.clone().try_inverse().ok_or(Error::Singular { condition: cond })?;
    let mut w = h.adjoint() * inv;
    if let Some(p) = stream_powers {
        if p.len() != users {
            return Err(Error::Dimension(format!("{} stream powers for {users} users", p.len())));
        }
        for (j, &pj) in p.iter().enumerate() {
            if !(pj >= 0.0) {
                return Err(Error::Parameter(format!("stream power {pj} is negative")));
            }
            w.column_mut(j).scale_mut(pj.sqrt());
        }
    }
    Ok(DigitalBeamformer::new(w).normalized())
}

/// Linear MMSE combiner `R^-1 H (I + H^H R^-1 H)^-1` for received streams
/// with effective channel `h` (chains x streams, powers folded in) and
/// interference-plus-noise covariance `r`.
pub fn mmse_combiner(h: &ComplexMatrix, r: &ComplexMatrix) -> Result<DigitalBeamformer> {
    if r.nrows() != h.nrows() || r.ncols() != h.nrows() {
        return Err(Error::Dimension("covariance does not match channel rows".into()));
    }
    let r_inv = hpd_inverse(r)?;
    let s = h.ncols();
    let inner = ComplexMatrix::identity(s, s) + h.adjoint() * &r_inv * h;
    let inner_inv = hpd_inverse(&crate::linalg::hermitize(&inner))?;
    Ok(DigitalBeamformer::new(r_inv * h * inner_inv))
}

/// Top `num_streams` right singular vectors with equal power, `||W||_F = 1`.
pub fn eigen_precoder(h: &ComplexMatrix, num_streams: usize) -> Result<DigitalBeamformer> {
    let max = h.nrows().min(h.ncols());
    if num_streams == 0 || num_streams > max {
        return Err(Error::Parameter(format!(
            "requested {num_streams} streams on a {}x{} channel",
            h.nrows(),
            h.ncols()
        )));
    }
    let (_, v) = right_singular(h);
    let w = v
        .columns(0, num_streams)
        .into_owned()
        .unscale((num_streams as f64).sqrt());
    Ok(DigitalBeamformer::new(w))
}

/// Per-stream SINR of a linear combiner `g` (chains x streams) applied to
/// streams with effective channel `h` (powers folded in) in noise
/// covariance `r`.
pub fn combiner_sinr(g: &ComplexMatrix, h: &ComplexMatrix, r: &ComplexMatrix) -> Vec<f64> {
    let s = h.ncols();
    (0..s)
        .map(|k| {
            let gk = g.column(k);
            let sig = gk.dotc(&h.column(k)).norm_sqr();
            let mut interf = (gk.adjoint() * r * gk)[(0, 0)].re;
            for j in (0..s).filter(|&j| j != k) {
                interf += gk.dotc(&h.column(j)).norm_sqr();
            }
            if interf > 0.0 {
                sig / interf
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    PartiallyConnected,
    FullyConnected,
}

/// Total phase shifters of the analog TX and RX beamformers.
pub fn phase_shifter_count(cfg: &ArchitectureConfig, connectivity: Connectivity) -> usize {
    match connectivity {
        Connectivity::PartiallyConnected => cfg.n + cfg.m,
        Connectivity::FullyConnected => cfg.n * cfg.n_t + cfg.m * cfg.m_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::steering_vector;
    use crate::linalg::{c, real, ONE};
    use crate::rng::{cn_matrix, seeded};

    fn hybrid_cfg() -> ArchitectureConfig {
        ArchitectureConfig {
            n: 64,
            m: 32,
            n_t: 4,
            m_r: 2,
            phase_bits: 3,
            k: 4,
            bf_mode: BfMode::HybridSubarray,
        }
    }

    #[test]
    fn quantize_ties_go_down() {
        let step = 2.0 * PI / 8.0;
        assert_eq!(quantize_phase(1.5 * step, 3), step);
        assert_eq!(quantize_phase(1.6 * step, 3), 2.0 * step);
        assert_eq!(quantize_phase(-0.1, 3), 0.0);
        for bits in 1..6 {
            let q = quantize_phase(1.234, bits);
            assert!((q - 1.234).abs() <= PI / (1u64 << bits) as f64 + 1e-12);
        }
    }

    #[test]
    fn binary_phases() {
        let v = ComplexVector::from_vec(vec![c(1.0, 0.2), c(-1.0, 0.3), c(0.1, 1.0), c(0.2, -0.9)]);
        for z in quantize_phases(&v, 1).iter() {
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn on_grid_vector_unchanged_up_to_modulus() {
        let v = ComplexVector::from_vec(vec![c(2.0, 0.0), c(0.0, 3.0), c(-1.0, 0.0), c(0.0, -5.0)]);
        let q = quantize_phases(&v, 2);
        for (a, b) in q.iter().zip(v.iter()) {
            assert!((a.arg() - b.arg()).abs() < 1e-12 || (a.arg() - b.arg()).abs() > 6.0);
            assert!((a.norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_grid_aligned_is_exact() {
        let book = dft_codebook(8, 3);
        assert_eq!(book.len(), 8);
        for (k, word) in book.iter().enumerate() {
            for m in 0..8 {
                let ideal = Complex64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * (k * m) as f64 / 8.0);
                assert!((word[m] - ideal).norm() < 1e-12);
            }
            assert!((word.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_16_three_bit_error_bound() {
        let book = dft_codebook(16, 3);
        for (k, word) in book.iter().enumerate() {
            for m in 0..16 {
                let ideal = 2.0 * PI * ((k * m) % 16) as f64 / 16.0;
                let mut err = (word[m].arg() - ideal).rem_euclid(2.0 * PI);
                if err > PI {
                    err = 2.0 * PI - err;
                }
                assert!(err <= PI / 8.0 + 1e-12);
            }
            assert!((word.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn off_grid_steering_quantization_bound() {
        let v = steering_vector(8, 0.3137);
        let q = quantize_phases(&v, 3);
        let bound = 8.0 * (Complex64::from_polar(1.0, PI / 8.0) - 1.0).norm() / 8f64.sqrt();
        assert!((q - v).norm() <= bound);
    }

    #[test]
    fn assemble_hybrid_structure() {
        let cfg = hybrid_cfg();
        let bf = assemble_analog_bf(&[0, 3, 7, 15], &cfg, Side::Tx).unwrap();
        assert_eq!(bf.matrix.shape(), (64, 4));
        for j in 0..4 {
            let col = bf.matrix.column(j);
            assert_eq!(col.iter().filter(|z| z.norm() > 0.0).count(), 16);
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(bf.phase_shifters(), 64);
        let rx = assemble_analog_bf(&[1, 2], &cfg, Side::Rx).unwrap();
        assert_eq!(bf.phase_shifters() + rx.phase_shifters(), 96);
    }

    #[test]
    fn assemble_rejects_bad_index() {
        let cfg = hybrid_cfg();
        assert!(matches!(
            assemble_analog_bf(&[0, 0, 0, 16], &cfg, Side::Tx),
            Err(Error::BeamIndex { index: 16, size: 16 })
        ));
        assert!(assemble_analog_bf(&[0, 0], &cfg, Side::Tx).is_err());
    }

    #[test]
    fn fully_digital_is_identity() {
        let cfg = ArchitectureConfig {
            n: 4,
            m: 4,
            n_t: 4,
            m_r: 4,
            phase_bits: 3,
            k: 12,
            bf_mode: BfMode::FullyDigital,
        };
        let bf = assemble_analog_bf(&[], &cfg, Side::Tx).unwrap();
        assert_eq!(bf.matrix, ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn config_bounds() {
        let mut cfg = hybrid_cfg();
        assert!(cfg.validate().is_ok());
        cfg.k = 9;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("architecture.k"), "{err}");
        let mut cfg = hybrid_cfg();
        cfg.n_t = 5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zf_examples() {
        let w = zf_precoder(&ComplexMatrix::identity(2, 2), None).unwrap();
        assert!((w.matrix[(0, 0)].re - FRAC_1_SQRT_2).abs() < 1e-12);
        let h = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(1.0), real(2.0)]));
        let w = zf_precoder(&h, None).unwrap();
        let s = 1.25f64.sqrt();
        assert!((w.matrix[(0, 0)].re - 1.0 / s).abs() < 1e-12);
        assert!((w.matrix[(1, 1)].re - 0.5 / s).abs() < 1e-12);
        let hw = &h * &w.matrix;
        assert!(hw[(0, 1)].norm() < 1e-12 && hw[(1, 0)].norm() < 1e-12);
    }
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn zf_random_is_diagonal() {
        let mut rng = seeded(21);
        let h = cn_matrix(4, 8, 1.0, &mut rng);
        let w = zf_precoder(&h, None).unwrap();
        let hw = &h * &w.matrix;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(hw[(i, j)].norm() < 1e-9);
                }
            }
        }
        assert!((frobenius_sq(&w.matrix) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zf_rank_deficient_reports_condition() {
        let h = ComplexMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
        assert!(matches!(zf_precoder(&h, None), Err(Error::Singular { .. })));
    }

    #[test]
    fn mmse_examples() {
        let h = ComplexMatrix::from_column_slice(2, 1, &[ONE, ZERO]);
        let w = mmse_combiner(&h, &ComplexMatrix::identity(2, 2)).unwrap();
        assert!(w.matrix[(1, 0)].norm() < 1e-15 && w.matrix[(0, 0)].norm() > 0.0);

        let h = ComplexMatrix::from_column_slice(2, 1, &[ONE, ONE]);
        let r = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(1.0), real(100.0)]));
        let w = mmse_combiner(&h, &r).unwrap();
        let ratio = w.matrix[(1, 0)].norm() / w.matrix[(0, 0)].norm();
        assert!((ratio - 0.01).abs() < 1e-12);

        let not_pd = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(1.0), real(0.0)]));
        assert!(mmse_combiner(&h, &not_pd).is_err());
    }

    #[test]
    fn eigen_examples() {
        let h = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(3.0), real(1.0)]));
        let w = eigen_precoder(&h, 1).unwrap();
        assert!((w.matrix[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(w.matrix[(1, 0)].norm() < 1e-12);

        let mut rng = seeded(4);
        let h = cn_matrix(4, 4, 1.0, &mut rng);
        let w = eigen_precoder(&h, 4).unwrap();
        let gram = w.matrix.adjoint() * &w.matrix;
        assert!((gram - ComplexMatrix::identity(4, 4).unscale(4.0)).norm() < 1e-12);
        assert!(eigen_precoder(&h, 5).is_err());
    }

    #[test]
    fn matched_beam_selected() {
        let book = dft_codebook(8, 3);
        for k in 0..8 {
            let phi = codeword_angle(8, k);
            let a_rx = steering_vector(4, 0.2);
            let a_tx = steering_vector(8, phi);
            let h = a_rx * a_tx.adjoint();
            assert_eq!(select_beams(&h, 8, &book).unwrap(), vec![k]);
            assert_eq!(select_beams(&h.scale(17.0), 8, &book).unwrap(), vec![k]);
            assert_eq!(select_beam_by_doa(phi, &book).unwrap(), k);
        }
        let single = vec![book[3].clone()];
        let h = cn_matrix(2, 8, 1.0, &mut seeded(1));
        assert_eq!(select_beams(&h, 8, &single).unwrap(), vec![0]);
    }

    #[test]
    fn phase_shifter_accounting() {
        let cfg = hybrid_cfg();
        assert_eq!(phase_shifter_count(&cfg, Connectivity::PartiallyConnected), 96);
        assert_eq!(phase_shifter_count(&cfg, Connectivity::FullyConnected), 64 * 4 + 32 * 2);
        let small = ArchitectureConfig {
            n: 4,
            m: 4,
            n_t: 4,
            m_r: 4,
            phase_bits: 3,
            k: 12,
            bf_mode: BfMode::FullyDigital,
        };
        assert_eq!(phase_shifter_count(&small, Connectivity::FullyConnected), 32);
    }
}
