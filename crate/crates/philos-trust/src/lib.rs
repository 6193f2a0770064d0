//! Trust machinery for the Philos hierarchical blockchain.
//!
//! Peers earn trust by reliably sealing primary syncs and committing them in
//! bridge syncs; trust decays whenever a bridge is late and silently through
//! misses. This crate implements that arithmetic, the sync-list lifecycle
//! around it, the sabotage incentive analysis, and a deterministic step
//! simulator that reproduces the reference behavior traces.
//!
//! All numeric code is generic over [`scalar::Scalar`] (any float width);
//! the crate root re-exports `f64` aliases, which is what the shipped tools
//! use.

pub mod event;
pub mod incentive;
pub mod scalar;
pub mod sim;
pub mod state;
pub mod trust;

pub use event::{EventKind, EVENT_CSV_HEADER};
pub use incentive::{
    boundary_scenarios, brute_force_incentive_check, is_honesty_incentivized,
    max_safe_list_size, max_safe_list_size_avg, random_agreement_sweep,
    safe_size_soundness_sweep, utility, Action, IncentiveError,
};
pub use scalar::Scalar;
pub use sim::{
    expected_trace, fig6_config, replay_figure, run_config, run_scenario, verify_figure,
    BridgeNote, ConfigError, Figure, FigureTrace, Phase, ScenarioSpec, SimError, TraceMismatch,
    TraceRow, UnknownFigure, FIG6_CONFIG_TOML, REPLAY_CSV_HEADER, TRAJECTORY_CSV_HEADER,
};
pub use state::{ListId, PeerId, PeerState, StateError, SyncList};
pub use trust::{calibrate_beta, fractional_trust, hypothetical_trust, update_trust};
pub use trust::{BridgeCalc, BridgeObservation, TrustError};

/// Protocol constants at double precision.
pub type TrustParams = trust::TrustParams<f64>;
/// Raw trust at double precision.
pub type RawTrust = trust::RawTrust<f64>;
/// Fractional trust at double precision.
pub type FractionalTrust = trust::FractionalTrust<f64>;
/// System snapshot at double precision.
pub type SystemState = state::SystemState<f64>;
/// Per-peer ledger at double precision.
pub type PeerLedger = state::PeerLedger<f64>;
/// Bridge outcome at double precision.
pub type BridgeOutcome = state::BridgeOutcome<f64>;
/// Event record at double precision.
pub type EventRecord = event::EventRecord<f64>;
/// Event log at double precision.
pub type EventLog = event::EventLog<f64>;
/// Sabotage scenario at double precision.
pub type SabotageScenario = incentive::SabotageScenario<f64>;
/// Incentive report at double precision.
pub type IncentiveReport = incentive::IncentiveReport<f64>;
/// Simulation plan at double precision.
pub type SimConfig = sim::SimConfig<f64>;
/// Scenario result at double precision.
pub type SimResult = sim::SimResult<f64>;
/// Scenario summary at double precision.
pub type ScenarioSummary = sim::ScenarioSummary<f64>;
/// Trust trajectory at double precision.
pub type Trajectory = sim::Trajectory<f64>;
/// Trajectory sample at double precision.
pub type TrajectorySample = sim::TrajectorySample<f64>;
