//! Curve records and CSV output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "power_dbm,scheme,mean_rate_bps_hz,std_err,trials";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub power_dbm: f64,
    pub scheme: String,
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl CurvePoint {
    /// Mean and standard error of per-trial rates.
    pub fn from_samples(power_dbm: f64, scheme: impl Into<String>, rates: &[f64]) -> Self {
        let n = rates.len();
        let mean = if n == 0 {
            0.0
        } else {
            rates.iter().sum::<f64>() / n as f64
        };
        let std_error = if n < 2 {
            0.0
        } else {
            let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Self {
            power_dbm,
            scheme: scheme.into(),
            mean_rate: mean,
            std_error,
            trials: n,
        }
    }
}

/// Six significant digits, plain decimal notation where it stays short.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (6..=9).contains(&exp) {
        let unit = 10f64.powi(exp - 5);
        return format!("{:.0}", (x / unit).round() * unit);
    }
    if (-5..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Rows sorted by (scheme, power).
pub fn render_csv(points: &[CurvePoint]) -> String {
    let mut sorted: Vec<&CurvePoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.power_dbm.total_cmp(&b.power_dbm)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in sorted {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sig6(p.power_dbm),
            p.scheme,
            format_sig6(p.mean_rate),
            format_sig6(p.std_error),
            p.trials
        ));
    }
    out
}

pub fn emit_csv(points: &[CurvePoint], path: impl AsRef<Path>) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Parameter("no curve points to write".into()));
    }
    let mut f = std::fs::File::create(path.as_ref())?;
    f.write_all(render_csv(points).as_bytes())?;
    Ok(())
}

/// Parses CSV produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parameter("missing CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parameter(format!("malformed CSV row `{line}`"));
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(CurvePoint {
                power_dbm: f[0].parse().map_err(|_| bad())?,
                scheme: f[1].to_string(),
                mean_rate: f[2].parse().map_err(|_| bad())?,
                std_error: f[3].parse().map_err(|_| bad())?,
                trials: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
