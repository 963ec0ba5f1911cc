//! Scenario configuration: JSON schema, defaults, and validation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beamforming::{ArchitectureConfig, BfMode};
use crate::cancellation::SaturationSpec;
use crate::channel::AgingParams;
use crate::error::{Error, Result};
use crate::estimation::PilotConfig;
use crate::impairments::TxImpairmentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Single-user fully digital MIMO, UL + DL sum rate.
    A,
    /// Hybrid sub-array massive MIMO, UL + DL sum rate.
    B,
    /// Multi-user simultaneous communication and channel estimation.
    C,
    /// DOA-based beam training with a single-antenna user.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    pub bs_noise_floor_dbm: f64,
    pub ue_noise_floor_dbm: f64,
    pub dl_pathloss_db: f64,
    pub ul_pathloss_db: f64,
    pub si_isolation_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            bs_noise_floor_dbm: -110.0,
            ue_noise_floor_dbm: -90.0,
            dl_pathloss_db: 100.0,
            ul_pathloss_db: 100.0,
            si_isolation_db: 40.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("bs_noise_floor_dbm", self.bs_noise_floor_dbm),
            ("ue_noise_floor_dbm", self.ue_noise_floor_dbm),
            ("dl_pathloss_db", self.dl_pathloss_db),
            ("ul_pathloss_db", self.ul_pathloss_db),
            ("si_isolation_db", self.si_isolation_db),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(format!("link_budget.{field}"), "must be finite"));
            }
        }
        for (field, v) in [
            ("dl_pathloss_db", self.dl_pathloss_db),
            ("ul_pathloss_db", self.ul_pathloss_db),
            ("si_isolation_db", self.si_isolation_db),
        ] {
            if v < 0.0 {
                return Err(Error::config(format!("link_budget.{field}"), "must be >= 0 dB"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Proposed,
    Benchmark,
    HalfDuplex,
    IdealCsi,
}

/// A curve to simulate. `ideal_tx` turns off the TX impairments, giving the
/// `-ideal-tx` reference variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Scheme {
    pub kind: SchemeKind,
    pub ideal_tx: bool,
}

impl Scheme {
    pub const fn new(kind: SchemeKind) -> Self {
        Self { kind, ideal_tx: false }
    }

    pub const fn ideal_tx(kind: SchemeKind) -> Self {
        Self { kind, ideal_tx: true }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.kind {
            SchemeKind::Proposed => "proposed",
            SchemeKind::Benchmark => "benchmark",
            SchemeKind::HalfDuplex => "hd",
            SchemeKind::IdealCsi => "ideal-csi",
        };
        if self.ideal_tx {
            write!(f, "{base}-ideal-tx")
        } else {
            f.write_str(base)
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, ideal_tx) = match s.strip_suffix("-ideal-tx") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let kind =
            match base {
                "proposed" => SchemeKind::Proposed,
                "benchmark" => SchemeKind::Benchmark,
                "hd" => SchemeKind::HalfDuplex,
                "ideal-csi" => SchemeKind::IdealCsi,
                _ => return Err(Error::config(
                    "schemes",
                    format!(
                        "unknown scheme `{s}` (expected proposed, benchmark, hd, ideal-csi, optionally with -ideal-tx)"
                    ),
                )),
            };
        Ok(Self { kind, ideal_tx })
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

fn default_si_kappa_db() -> f64 {
    30.0
}
fn default_access_kappa_db() -> f64 {
    20.0
}
fn default_num_paths() -> usize {
    7
}
fn default_burst_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub architecture: ArchitectureConfig,
    #[serde(default)]
    pub link_budget: LinkBudget,
    #[serde(default)]
    pub impairments: TxImpairmentConfig,
    #[serde(default)]
    pub aging: AgingParams,
    pub pilots: PilotConfig,
    #[serde(default)]
    pub saturation: SaturationSpec,
    /// Rician factor of the SI channel.
    #[serde(default = "default_si_kappa_db")]
    pub si_kappa_db: f64,
    /// Rician factor of the user links in scenario D.
    #[serde(default = "default_access_kappa_db")]
    pub access_kappa_db: f64,
    /// Propagation paths of the clustered channel in scenario B.
    #[serde(default = "default_num_paths")]
    pub num_paths: usize,
    /// UL transmit power; `null` ties it to the DL power of each sweep point.
    #[serde(default)]
    pub ul_power_dbm: Option<f64>,
    /// Tap count of the benchmark scheme; defaults to the scenario's own
    /// benchmark (0 for scenario B, `n_t * m_r` otherwise).
    #[serde(default)]
    pub benchmark_k: Option<usize>,
    /// Samples per SI calibration and evaluation burst.
    #[serde(default = "default_burst_samples")]
    pub burst_samples: usize,
    pub powers_dbm: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub schemes: Vec<Scheme>,
}

impl ScenarioConfig {
    pub fn benchmark_taps(&self) -> usize {
        self.benchmark_k.unwrap_or(match self.scenario {
            ScenarioId::B => 0,
            _ => self.architecture.max_taps(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.architecture.validate()?;
        self.link_budget.validate()?;
        self.impairments.validate()?;
        self.pilots.validate()?;
        self.aging.rho().map_err(|e| Error::config("aging", e.to_string()))?;
        if !self.saturation.max_input_dbm.is_finite() {
            return Err(Error::config("saturation.max_input_dbm", "must be finite"));
        }
        if self.powers_dbm.is_empty() {
            return Err(Error::config("powers_dbm", "sweep must be nonempty"));
        }
        if let Some(p) = self.powers_dbm.iter().find(|p| !p.is_finite()) {
            return Err(Error::config("powers_dbm", format!("power {p} is not finite")));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.schemes {
            if !seen.insert(*s) {
                return Err(Error::config("schemes", format!("`{s}` listed twice")));
            }
        }
        if !self.si_kappa_db.is_finite() {
            return Err(Error::config("si_kappa_db", "must be finite"));
        }
        if !self.access_kappa_db.is_finite() {
            return Err(Error::config("access_kappa_db", "must be finite"));
        }
        if self.num_paths == 0 {
            return Err(Error::config("num_paths", "must be >= 1"));
        }
        if let Some(p) = self.ul_power_dbm {
            if !p.is_finite() {
                return Err(Error::config("ul_power_dbm", "must be finite"));
            }
        }
        if let Some(k) = self.benchmark_k {
            if k > self.architecture.max_taps() {
                return Err(Error::config(
                    "benchmark_k",
                    format!(
                        "K = {k} exceeds the n_t*m_r = {} tap bound",
                        self.architecture.max_taps()
                    ),
                ));
            }
        }
        if self.burst_samples < 3 * self.architecture.n_t {
            return Err(Error::config(
                "burst_samples",
                format!("need at least 3*n_t = {} samples", 3 * self.architecture.n_t),
            ));
        }
        self.validate_topology()
    }

    fn validate_topology(&self) -> Result<()> {
        let a = &self.architecture;
        match self.scenario {
            ScenarioId::A | ScenarioId::C => {
                if a.bf_mode != BfMode::FullyDigital {
                    return Err(Error::config(
                        "architecture.bf_mode",
                        format!("scenario {:?} uses fully-digital beamforming", self.scenario),
                    ));
                }
            }
            ScenarioId::B => {
                if a.bf_mode != BfMode::HybridSubarray {
                    return Err(Error::config(
                        "architecture.bf_mode",
                        "scenario B uses hybrid-subarray beamforming",
                    ));
                }
            }
            ScenarioId::D => {
                if a.m != a.m_r {
                    return Err(Error::config(
                        "architecture.m_r",
                        "scenario D uses a fully digital receive array",
                    ));
                }
            }
        }
        if self.scenario == ScenarioId::C && self.pilots.num_streams > a.n_t {
            return Err(Error::config(
                "pilots.num_streams",
                format!("{} users exceed the {} TX chains", self.pilots.num_streams, a.n_t),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // Errors raised by our own `TryFrom` impls already carry a field.
            if let Some((field, rest)) = msg.strip_prefix("config error in `").and_then(|r| r.split_once("`: ")) {
                return Error::config(field, rest);
            }
            Error::config(schema_field(&msg), msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Best-effort field name for a serde error message.
fn schema_field(msg: &str) -> String {
    for marker in ["unknown field `", "missing field `", "duplicate field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "<document>".to_string()
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    ScenarioConfig::from_json(&text)
}
