//! Link-level Monte Carlo simulation of full-duplex MIMO transceivers.
//!
//! The crate models a base station with `N` transmit and `M` receive
//! antennas, `N_T`/`M_R` RF chains, partially connected analog beamforming,
//! a `K`-tap analog self-interference canceller with MUX/DEMUX tap placement,
//! and a nonlinear digital canceller. [`sim`] composes the pieces into
//! complete rate-versus-power experiments.

pub mod beamforming;
pub mod cancellation;
pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod impairments;
pub mod linalg;
pub mod output;
pub mod rng;
pub mod sim;

pub use beamforming::{AnalogBeamformer, ArchitectureConfig, BfMode, DigitalBeamformer, Side};
pub use cancellation::{CancellerState, SaturationSpec, TapPosition};
pub use channel::{AgingParams, ClusteredParams, RicianParams};
pub use config::{parse_config, LinkBudget, ScenarioConfig, ScenarioId, Scheme, SchemeKind};
pub use error::{Error, Result};
pub use estimation::{CsiRecord, PilotConfig};
pub use impairments::TxImpairmentConfig;
pub use linalg::{ComplexMatrix, ComplexVector};
pub use output::CurvePoint;
pub use sim::{run_scenario, run_trial, TrialOutcome};
