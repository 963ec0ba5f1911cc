//! Pilot-based LMMSE channel estimation, CSI aging bookkeeping, and DOA
//! estimation by beam sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, hpd_inverse, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    pub num_pilots: usize,
    pub pilot_power_dbm: f64,
    pub num_streams: usize,
}

impl PilotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_streams == 0 {
            return Err(Error::config("pilots.num_streams", "must be >= 1"));
        }
        if self.num_pilots < self.num_streams {
            return Err(Error::config(
                "pilots.num_pilots",
                format!("{} pilots cannot train {} streams", self.num_pilots, self.num_streams),
            ));
        }
        if !self.pilot_power_dbm.is_finite() {
            return Err(Error::config("pilots.pilot_power_dbm", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsiRecord {
    pub h_hat: ComplexMatrix,
    /// Error variance of each entry in column `j` (one value per trained stream).
    pub error_var: Vec<f64>,
    pub slot_index: u64,
}

impl CsiRecord {
    pub fn mean_error_var(&self) -> f64 {
        if self.error_var.is_empty() {
            0.0
        } else {
            self.error_var.iter().sum::<f64>() / self.error_var.len() as f64
        }
    }

    /// The estimate is only usable in the slot after the one it was trained in.
    pub fn for_slot(&self, slot: u64) -> Result<&ComplexMatrix> {
        if slot != self.slot_index + 1 {
            return Err(Error::Parameter(format!(
                "CSI from slot {} used in slot {slot}",
                self.slot_index
            )));
        }
        Ok(&self.h_hat)
    }
}

/// `num_streams` rows of the `num_pilots`-point DFT; unit-modulus entries so
/// each row has energy `num_pilots`.
pub fn orthogonal_pilots(num_streams: usize, num_pilots: usize) -> Result<ComplexMatrix> {
    if num_pilots < num_streams {
        return Err(Error::Parameter(format!(
            "{num_pilots} pilots cannot be orthogonal across {num_streams} streams"
        )));
    }
    let l = num_pilots as f64;
    Ok(ComplexMatrix::from_fn(num_streams, num_pilots, |i, k| {
        // Reduce the exponent first so long bursts keep full phase accuracy.
        let idx = (i * k) % num_pilots;
        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * idx as f64 / l)
    }))
}

/// LMMSE estimate of `H` from `Y = H P + N`, i.i.d. `CN(0, prior_var)`
/// entries and `CN(0, noise_var)` noise. `P` carries the pilot amplitude.
pub fn mmse_estimate(
    y: &ComplexMatrix,
    pilots: &ComplexMatrix,
    noise_var: f64,
    prior_var: f64,
    slot_index: u64,
) -> Result<CsiRecord> {
    if y.ncols() != pilots.ncols() {
        return Err(Error::Dimension(format!(
            "{} received vs {} pilot symbols",
            y.ncols(),
            pilots.ncols()
        )));
    }
    if !(noise_var > 0.0) || !(prior_var >= 0.0) {
        return Err(Error::Parameter(format!(
            "noise_var must be > 0 and prior_var >= 0, got {noise_var}, {prior_var}"
        )));
    }
    ensure_finite(y, "received pilots")?;
    let gram = pilots * pilots.adjoint();
    let energies: Vec<f64> = (0..gram.nrows()).map(|i| gram[(i, i)].re).collect();
    let scale = energies.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let off_diag = (0..gram.nrows())
        .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| gram[(i, j)].norm())
        .fold(0.0, f64::max);
    let yp = y * pilots.adjoint();

    if off_diag <= 1e-9 * scale {
        let mut h_hat = yp;
        let mut error_var = Vec::with_capacity(energies.len());
        for (j, &lp) in energies.iter().enumerate() {
            let denom = prior_var * lp + noise_var;
            h_hat.column_mut(j).scale_mut(prior_var / denom);
            error_var.push(prior_var * noise_var / denom);
        }
        return Ok(CsiRecord {
            h_hat,
            error_var,
            slot_index,
        });
    }

    // Joint LMMSE: H_hat = Y P^H (P P^H + (noise/prior) I)^-1.
    if prior_var == 0.0 {
        return Ok(CsiRecord {
            h_hat: ComplexMatrix::zeros(y.nrows(), pilots.nrows()),
            error_var: vec![0.0; pilots.nrows()],
            slot_index,
        });
    }
    let n = pilots.nrows();
    let reg = &gram + ComplexMatrix::identity(n, n).scale(noise_var / prior_var);
    let inv = hpd_inverse(&reg)?;
    let h_hat = yp * &inv;
    let error_var = (0..n).map(|j| noise_var * inv[(j, j)].re).collect();
    Ok(CsiRecord {
        h_hat,
        error_var,
        slot_index,
    })
}

/// `H(t+1) - H_hat(t)`: what the slot-`t+1` beamformers get wrong.
pub fn age_csi(record: &CsiRecord, h_next: &ComplexMatrix) -> Result<ComplexMatrix> {
    if record.h_hat.shape() != h_next.shape() {
        return Err(Error::Dimension("aged channel does not match the estimate".into()));
    }
    Ok(h_next - &record.h_hat)
}

/// Combines `M_R x T` received samples with each candidate weight, producing
/// one snapshot group per beam.
pub fn sweep_snapshots(y: &ComplexMatrix, beams: &[ComplexVector]) -> Result<Vec<ComplexMatrix>> {
    beams
        .iter()
        .map(|w| {
            if w.len() != y.nrows() {
                return Err(Error::Dimension(format!(
                    "beam of length {} vs {} RX chains",
                    w.len(),
                    y.nrows()
                )));
            }
            let r = w.adjoint() * y;
            Ok(ComplexMatrix::from_iterator(1, r.len(), r.iter().copied()))
        })
        .collect()
}

/// Index and angle of the beam with the largest average received power.
/// `groups[k]` holds the snapshots collected while beam `k` was active.
pub fn doa_estimate(groups: &[ComplexMatrix], angles: &[f64]) -> Result<(usize, f64)> {
    if groups.len() != angles.len() || groups.is_empty() {
        return Err(Error::Dimension(format!(
            "{} snapshot groups vs {} beam angles",
            groups.len(),
            angles.len()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, g) in groups.iter().enumerate() {
        let n = g.len().max(1) as f64;
        let p = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((k, p));
        }
    }
    match best {
        Some((k, p)) if p > 0.0 => Ok((k, angles[k])),
        _ => Err(Error::NoSignal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_sq, ONE};
    use crate::rng::{cn_matrix, seeded};

    #[test]
    fn pilot_examples() {
        let p = orthogonal_pilots(1, 40).unwrap();
        assert!(p.iter().all(|z| (z - ONE).norm() < 1e-15));
        assert!((frobenius_sq(&p) - 40.0).abs() < 1e-12);

        let p = orthogonal_pilots(4, 400).unwrap();
        let g = &p * p.adjoint();
        let err = frobenius_sq(&(g - ComplexMatrix::identity(4, 4).scale(400.0)));
        assert!(err.sqrt() < 1e-10);

        let p = orthogonal_pilots(2, 2).unwrap();
        assert!((&p * p.adjoint())[(0, 1)].norm() < 1e-15);
        assert!(orthogonal_pilots(3, 2).is_err());
    }

    #[test]
    fn closed_form_error_variance() {
        let p = orthogonal_pilots(1, 40).unwrap();
        let y = ComplexMatrix::zeros(1, 40);
        let rec = mmse_estimate(&y, &p, 1.0, 1.0, 0).unwrap();
        assert!((rec.error_var[0] - 1.0 / 41.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_limit_and_zero_power() {
        let mut rng = seeded(4);
        let h = cn_matrix(3, 2, 1.0, &mut rng);
        let p = orthogonal_pilots(2, 8).unwrap();
        let rec = mmse_estimate(&(&h * &p), &p, 1e-14, 1.0, 0).unwrap();
        assert!(frobenius_sq(&(&rec.h_hat - &h)) < 1e-20);
        assert!(rec.error_var.iter().all(|&e| e < 1e-14));

        let zero = ComplexMatrix::zeros(2, 8);
        let rec = mmse_estimate(&ComplexMatrix::zeros(3, 8), &zero, 1.0, 0.7, 0).unwrap();
        assert_eq!(rec.h_hat, ComplexMatrix::zeros(3, 2));
        assert!(rec.error_var.iter().all(|&e| (e - 0.7).abs() < 1e-15));
    }

    #[test]
    fn non_orthogonal_fallback_matches_noiseless_truth() {
        let mut rng = seeded(5);
        let h = cn_matrix(2, 2, 1.0, &mut rng);
        let p = cn_matrix(2, 10, 1.0, &mut rng);
        let rec = mmse_estimate(&(&h * &p), &p, 1e-12, 1.0, 3).unwrap();
        assert!(frobenius_sq(&(&rec.h_hat - &h)) < 1e-16);
    }

    #[test]
    fn error_variance_decreases_with_pilots() {
        let mut last = f64::INFINITY;
        for l in [4, 10, 40, 400] {
            let p = orthogonal_pilots(1, l).unwrap();
            let rec = mmse_estimate(&ComplexMatrix::zeros(1, l), &p, 1.0, 1.0, 0).unwrap();
            assert!(rec.error_var[0] < last);
            last = rec.error_var[0];
        }
    }

    #[test]
    fn slot_bookkeeping() {
        let rec = CsiRecord {
            h_hat: ComplexMatrix::zeros(1, 1),
            error_var: vec![0.0],
            slot_index: 5,
        };
        assert!(rec.for_slot(6).is_ok());
        assert!(rec.for_slot(5).is_err());
        assert!(rec.for_slot(7).is_err());
    }

    #[test]
    fn aging_identity_is_zero_mismatch() {
        let mut rng = seeded(6);
        let h = cn_matrix(2, 2, 1.0, &mut rng);
        let rec = CsiRecord {
            h_hat: h.clone(),
            error_var: vec![0.0; 2],
            slot_index: 0,
        };
        assert_eq!(age_csi(&rec, &h).unwrap(), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn doa_ties_and_errors() {
        let a = ComplexMatrix::from_element(1, 4, ONE);
        let groups = vec![a.clone(), a.clone()];
        assert_eq!(doa_estimate(&groups, &[0.1, 0.2]).unwrap().0, 0);
        let z = ComplexMatrix::zeros(1, 4);
        assert!(matches!(
            doa_estimate(&[z.clone(), z], &[0.0, 1.0]),
            Err(Error::NoSignal)
        ));
        assert!(doa_estimate(&groups, &[0.0]).is_err());
    }
}
