//! Scenario configuration: TOML in, validated simulation plan out.

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::trust::{calibrate_beta, TrustError, TrustParams};

/// Bundled three-policy reference configuration: one year of the steady
/// 8-hour cadence, a lapse-and-recover variant, and a slow/fast mix.
pub const FIG6_CONFIG_TOML: &str = include_str!("../../configs/fig6.cfg");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config declares no scenarios")]
    NoScenarios,
    #[error("exactly one of horizon_days / horizon_steps must be set")]
    MissingHorizon,
    #[error("beta and [calibration] are mutually exclusive")]
    BetaAndCalibration,
    #[error("filler_peers must be at least 2 (sync lists need 3 members), got {0}")]
    TooFewFillers(usize),
    #[error("sample_stride must be at least 1")]
    ZeroSampleStride,
    #[error("scenario label {0:?} is empty or contains characters unfit for a file name")]
    BadLabel(String),
    #[error("scenario label {0:?} appears more than once")]
    DuplicateLabel(String),
    #[error("scenario {label:?} has no behavior phases")]
    NoPhases { label: String },
    #[error(
        "scenario {label:?} phase {index}: days {start_day}..{end_day} must be \
         non-empty and start where the previous phase ended"
    )]
    PhaseLayout {
        label: String,
        index: usize,
        start_day: u32,
        end_day: u32,
    },
    #[error("scenario {label:?} phase {index}: bridge_interval must be at least 1")]
    ZeroInterval { label: String, index: usize },
    #[error("scenario {label:?} phases end at day {covered} but the horizon needs day {needed}")]
    PhaseCoverage {
        label: String,
        covered: u32,
        needed: u64,
    },
    #[error("scenario {label:?}: miss_at step {step} is outside 1..={horizon}")]
    BadMissStep {
        label: String,
        step: u64,
        horizon: u64,
    },
    #[error(transparent)]
    Trust(#[from] TrustError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    horizon_days: Option<u32>,
    horizon_steps: Option<u64>,
    beta: Option<f64>,
    delta: Option<u32>,
    prime_step_minutes: Option<f64>,
    calibration: Option<RawCalibration>,
    filler_peers: Option<usize>,
    sample_stride: Option<u64>,
    #[serde(default, rename = "scenario")]
    scenarios: Vec<RawScenario>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    months: f64,
    target: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    label: String,
    #[serde(default)]
    miss_at: Vec<u64>,
    unmatched_steps: Option<u64>,
    #[serde(default, rename = "phase")]
    phases: Vec<RawPhase>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    start_day: u32,
    end_day: u32,
    bridge_interval: u64,
}

/// One span of days with a fixed bridging cadence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub start_day: u32,
    pub end_day: u32,
    /// Bridge as soon as at least this many steps have passed since the
    /// peer's last credited bridge.
    pub bridge_interval: u64,
}

/// One peer's behavior over the whole horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub label: String,
    pub phases: Vec<Phase>,
    /// Steps at which the peer sabotages its primary sync.
    pub miss_at: BTreeSet<u64>,
    /// How long the peer stays unmatched after a miss before re-forming.
    pub unmatched_steps: u64,
}

impl ScenarioSpec {
    /// Bridge interval in force on the given day, if any phase covers it.
    pub fn interval_at(&self, day: u64) -> Option<u64> {
        self.phases
            .iter()
            .find(|p| u64::from(p.start_day) <= day && day < u64::from(p.end_day))
            .map(|p| p.bridge_interval)
    }
}

/// Fully validated simulation plan.
#[derive(Debug, Clone)]
pub struct SimConfig<S> {
    pub params: TrustParams<S>,
    pub horizon_steps: u64,
    pub filler_peers: usize,
    pub sample_stride: u64,
    pub scenarios: Vec<ScenarioSpec>,
}

fn label_ok(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl<S: Scalar> SimConfig<S> {
    /// Parses and validates a TOML scenario file.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;

        let prime_minutes = raw.prime_step_minutes.unwrap_or(10.0);
        let delta = raw.delta.unwrap_or(48);
        let beta = match (raw.beta, &raw.calibration) {
            (Some(_), Some(_)) => return Err(ConfigError::BetaAndCalibration),
            (Some(b), None) => S::from_f64(b).ok_or(TrustError::BetaOutOfRange(b))?,
            (None, Some(c)) => calibrate_beta::<S>(
                crate::scalar::from_f64_lossy(c.months),
                crate::scalar::from_f64_lossy(c.target),
                crate::scalar::from_f64_lossy(prime_minutes),
            )?,
            (None, None) => crate::scalar::from_f64_lossy(TrustParams::<f64>::REFERENCE_BETA),
        };
        let params = TrustParams::new(beta, delta, crate::scalar::from_f64_lossy(prime_minutes))?;
        let steps_per_day = params.steps_per_day();

        let horizon_steps = match (raw.horizon_days, raw.horizon_steps) {
            (Some(d), None) => u64::from(d) * steps_per_day,
            (None, Some(s)) => s,
            _ => return Err(ConfigError::MissingHorizon),
        };

        let filler_peers = raw.filler_peers.unwrap_or(2);
        if filler_peers < 2 {
            return Err(ConfigError::TooFewFillers(filler_peers));
        }
        let sample_stride = raw.sample_stride.unwrap_or(steps_per_day);
        if sample_stride == 0 {
            return Err(ConfigError::ZeroSampleStride);
        }

        if raw.scenarios.is_empty() {
            return Err(ConfigError::NoScenarios);
        }
        let mut labels = BTreeSet::new();
        let mut scenarios = Vec::with_capacity(raw.scenarios.len());
        // Horizon step h runs on day (h - 1) / steps_per_day.
        let last_day_needed = horizon_steps.saturating_sub(1) / steps_per_day;
        for sc in &raw.scenarios {
            if !label_ok(&sc.label) {
                return Err(ConfigError::BadLabel(sc.label.clone()));
            }
            if !labels.insert(sc.label.clone()) {
                return Err(ConfigError::DuplicateLabel(sc.label.clone()));
            }
            if sc.phases.is_empty() {
                return Err(ConfigError::NoPhases {
                    label: sc.label.clone(),
                });
            }
            let mut phases = Vec::with_capacity(sc.phases.len());
            let mut cursor = 0u32;
            for (index, p) in sc.phases.iter().enumerate() {
                if p.start_day != cursor || p.end_day <= p.start_day {
                    return Err(ConfigError::PhaseLayout {
                        label: sc.label.clone(),
                        index,
                        start_day: p.start_day,
                        end_day: p.end_day,
                    });
                }
                if p.bridge_interval == 0 {
                    return Err(ConfigError::ZeroInterval {
                        label: sc.label.clone(),
                        index,
                    });
                }
                cursor = p.end_day;
                phases.push(Phase {
                    start_day: p.start_day,
                    end_day: p.end_day,
                    bridge_interval: p.bridge_interval,
                });
            }
            if horizon_steps > 0 && u64::from(cursor) <= last_day_needed {
                return Err(ConfigError::PhaseCoverage {
                    label: sc.label.clone(),
                    covered: cursor,
                    needed: last_day_needed,
                });
            }
            for &step in &sc.miss_at {
                if step == 0 || step > horizon_steps {
                    return Err(ConfigError::BadMissStep {
                        label: sc.label.clone(),
                        step,
                        horizon: horizon_steps,
                    });
                }
            }
            scenarios.push(ScenarioSpec {
                label: sc.label.clone(),
                phases,
                miss_at: sc.miss_at.iter().copied().collect(),
                unmatched_steps: sc.unmatched_steps.unwrap_or(0),
            });
        }

        Ok(Self {
            params,
            horizon_steps,
            filler_peers,
            sample_stride,
            scenarios,
        })
    }
}

/// The bundled three-policy configuration, parsed.
pub fn fig6_config<S: Scalar>() -> SimConfig<S> {
    SimConfig::from_toml_str(FIG6_CONFIG_TOML).expect("bundled config is valid")
}
