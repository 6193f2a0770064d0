//! Deterministic scenario simulator.
//!
//! Each scenario drives one subject peer through the consensus state
//! machine: primaries every step, bridges on the cadence its phases
//! prescribe, sabotaged primaries at configured steps. Filler companions
//! keep the subject's sync list at quorum so its trajectory is isolated
//! from any other scenario. Runs are fully deterministic: same config,
//! same trajectory, bit for bit.

pub mod config;
pub mod figures;
pub mod trajectory;

use thiserror::Error;

use crate::scalar::{from_count, Scalar};
use crate::state::{ListId, PeerId, StateError, SystemState};

pub use config::{fig6_config, ConfigError, Phase, ScenarioSpec, SimConfig, FIG6_CONFIG_TOML};
pub use figures::{
    expected_trace, replay_figure, verify_figure, BridgeNote, Figure, FigureTrace, TraceMismatch,
    TraceRow, UnknownFigure, REPLAY_CSV_HEADER,
};
pub use trajectory::{Trajectory, TrajectorySample, TRAJECTORY_CSV_HEADER};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario {label:?}: no behavior phase covers day {day} (step {k})")]
    PhaseGap { label: String, day: u64, k: u64 },
    #[error("scenario {label:?}: invariant violated at step {k}: {message}")]
    InvariantViolation {
        label: String,
        k: u64,
        message: String,
    },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Aggregates of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary<S> {
    pub label: String,
    pub final_step: u64,
    /// Subject's raw trust as of its last bridge.
    pub final_trust: S,
    /// Subject's share of total system trust, absent while the system
    /// holds none.
    pub final_fraction: Option<S>,
    pub bridges: u64,
    pub misses: u64,
    /// Largest trust lost in a single bridge (zero when trust never fell).
    pub max_drawdown: S,
    pub max_drawdown_step: Option<u64>,
}

/// Everything a scenario run produces.
#[derive(Debug)]
pub struct SimResult<S> {
    pub summary: ScenarioSummary<S>,
    pub trajectory: Trajectory<S>,
    /// Final system state; its event log holds the full run history.
    pub state: SystemState<S>,
}

fn form_fresh<S: Scalar>(
    st: &mut SystemState<S>,
    subject: PeerId,
    filler_peers: usize,
) -> Result<ListId, StateError> {
    let mut members = vec![subject];
    members.extend((0..filler_peers).map(|_| st.add_peer()));
    st.form_sync_list(&members)
}

fn push_sample<S: Scalar>(
    trajectory: &mut Trajectory<S>,
    st: &SystemState<S>,
    subject: PeerId,
    k: u64,
    steps_per_day: u64,
) {
    let raw = st
        .peer(subject)
        .expect("subject exists for the whole run")
        .trust()
        .value();
    let frac = st.fractional_of(subject).ok().map(|f| f.value());
    trajectory.push(TrajectorySample {
        k,
        day: from_count::<S>(k) / from_count::<S>(steps_per_day),
        raw_trust: raw,
        fractional_trust: frac,
    });
}

/// Runs one scenario against the shared config (its `scenarios` list is
/// ignored; only parameters, horizon, fillers, and stride apply).
///
/// Per step: the subject's list syncs a primary (or disbands on a
/// configured miss), bridges once the phase cadence is due and stake is
/// at risk, and a disbanded subject re-forms with fresh fillers once its
/// unmatched penalty has elapsed. The trajectory samples every bridge
/// plus every stride tick; state invariants are audited every step.
pub fn run_scenario<S: Scalar>(
    scenario: &ScenarioSpec,
    cfg: &SimConfig<S>,
) -> Result<SimResult<S>, SimError> {
    let steps_per_day = cfg.params.steps_per_day();
    let mut st = SystemState::new(cfg.params);
    let subject = st.add_peer();
    let mut list = Some(form_fresh(&mut st, subject, cfg.filler_peers)?);
    let mut trajectory = Trajectory::new(scenario.label.clone());
    let mut bridges = 0u64;
    let mut misses = 0u64;
    let mut max_drawdown = S::zero();
    let mut max_drawdown_step = None;
    let mut rematch_at = 0u64;

    for _ in 0..cfg.horizon_steps {
        let k = st.advance_clock();
        if let Some(id) = list {
            if scenario.miss_at.contains(&k) {
                st.miss_primary(id, Some(subject))?;
                list = None;
                misses += 1;
                rematch_at = k + scenario.unmatched_steps;
            } else {
                st.primary_sync(id)?;
            }
        }
        if let Some(id) = list {
            let day = (k - 1) / steps_per_day;
            let interval = scenario.interval_at(day).ok_or_else(|| SimError::PhaseGap {
                label: scenario.label.clone(),
                day,
                k,
            })?;
            let since_bridge = k - st.peer(subject)?.last_bridge();
            if st.list(id)?.s_m() >= 1 && since_bridge >= interval {
                let outcomes = st.bridge_sync(id)?;
                bridges += 1;
                let subj = outcomes
                    .iter()
                    .find(|o| o.peer == subject)
                    .expect("subject is a list member");
                let drop = subj.trust_before.value() - subj.trust_after.value();
                if drop > max_drawdown {
                    max_drawdown = drop;
                    max_drawdown_step = Some(k);
                }
                push_sample(&mut trajectory, &st, subject, k, steps_per_day);
            }
        } else if k >= rematch_at {
            // Re-forming at the end of the step: the first primary of the
            // new list lands on the next step.
            list = Some(form_fresh(&mut st, subject, cfg.filler_peers)?);
        }
        if k.is_multiple_of(cfg.sample_stride) {
            push_sample(&mut trajectory, &st, subject, k, steps_per_day);
        }
        st.check_invariants()
            .map_err(|message| SimError::InvariantViolation {
                label: scenario.label.clone(),
                k,
                message,
            })?;
    }

    if cfg.horizon_steps > 0 {
        push_sample(&mut trajectory, &st, subject, cfg.horizon_steps, steps_per_day);
    }
    let final_trust = st.peer(subject)?.trust().value();
    let final_fraction = st.fractional_of(subject).ok().map(|f| f.value());
    Ok(SimResult {
        summary: ScenarioSummary {
            label: scenario.label.clone(),
            final_step: cfg.horizon_steps,
            final_trust,
            final_fraction,
            bridges,
            misses,
            max_drawdown,
            max_drawdown_step,
        },
        trajectory,
        state: st,
    })
}

/// Runs every scenario in the config, one thread each, and returns the
/// results in config order.
pub fn run_config<S: Scalar + Send + Sync>(
    cfg: &SimConfig<S>,
) -> Result<Vec<SimResult<S>>, SimError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .scenarios
            .iter()
            .map(|sc| scope.spawn(move || run_scenario(sc, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread never panics"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mini_config(toml: &str) -> SimConfig<f64> {
        SimConfig::from_toml_str(toml).unwrap()
    }

    #[test]
    fn steady_cadence_bridges_on_schedule() {
        let cfg = mini_config(
            r#"
            horizon_steps = 100
            [[scenario]]
            label = "steady"
            [[scenario.phase]]
            start_day = 0
            end_day = 1
            bridge_interval = 48
            "#,
        );
        let result = run_scenario(&cfg.scenarios[0], &cfg).unwrap();
        let ks: Vec<u64> = result.trajectory.samples().iter().map(|s| s.k).collect();
        assert_eq!(ks, [48, 96, 100]);
        assert_eq!(result.summary.bridges, 2);
        assert_eq!(result.summary.misses, 0);
        assert_eq!(result.summary.max_drawdown, 0.0);
        assert_eq!(result.summary.max_drawdown_step, None);
        // 48 then 48 * beta^48 + 48, same arithmetic as the bridge update
        assert_eq!(result.trajectory.samples()[0].raw_trust, 48.0);
        assert_relative_eq!(
            result.summary.final_trust,
            95.795_761_418_688_83,
            max_relative = 1e-14
        );
        // three symmetric members share trust equally
        assert_relative_eq!(
            result.summary.final_fraction.unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn miss_disbands_and_gap_decay_lands_at_next_bridge() {
        // beta = 0.5, delta = 2 keeps every value exact in binary
        let cfg = mini_config(
            r#"
            horizon_steps = 12
            beta = 0.5
            delta = 2
            [[scenario]]
            label = "lapse"
            miss_at = [7]
            unmatched_steps = 4
            [[scenario.phase]]
            start_day = 0
            end_day = 1
            bridge_interval = 2
            "#,
        );
        let result = run_scenario(&cfg.scenarios[0], &cfg).unwrap();
        let ks: Vec<u64> = result.trajectory.samples().iter().map(|s| s.k).collect();
        assert_eq!(ks, [2, 4, 6, 12]);
        // bridges at 2, 4, 6: trust 2, 2.5, 2.625; miss at 7; re-form at
        // the end of 11; bridge at 12 spans k - b = 6: 2.625 / 64 + 1
        let raw: Vec<f64> = result
            .trajectory
            .samples()
            .iter()
            .map(|s| s.raw_trust)
            .collect();
        assert_eq!(raw, [2.0, 2.5, 2.625, 1.041015625]);
        assert_eq!(result.summary.bridges, 4);
        assert_eq!(result.summary.misses, 1);
        assert_eq!(result.summary.max_drawdown, 2.625 - 1.041015625);
        assert_eq!(result.summary.max_drawdown_step, Some(12));
    }

    #[test]
    fn zero_horizon_returns_initial_state_and_empty_trajectory() {
        let cfg = mini_config(
            r#"
            horizon_steps = 0
            [[scenario]]
            label = "idle"
            [[scenario.phase]]
            start_day = 0
            end_day = 1
            bridge_interval = 48
            "#,
        );
        let result = run_scenario(&cfg.scenarios[0], &cfg).unwrap();
        assert!(result.trajectory.is_empty());
        assert_eq!(result.summary.bridges, 0);
        assert_eq!(result.summary.final_trust, 0.0);
        assert_eq!(result.summary.final_fraction, None);
        assert_eq!(result.state.peers().count(), 3);
        assert_eq!(result.state.lists().count(), 1);
    }

    #[test]
    fn cadence_switches_exactly_at_the_phase_boundary() {
        let cfg = mini_config(
            r#"
            horizon_steps = 192
            [[scenario]]
            label = "shift"
            [[scenario.phase]]
            start_day = 0
            end_day = 1
            bridge_interval = 48
            [[scenario.phase]]
            start_day = 1
            end_day = 2
            bridge_interval = 24
            "#,
        );
        let result = run_scenario(&cfg.scenarios[0], &cfg).unwrap();
        let ks: Vec<u64> = result.trajectory.samples().iter().map(|s| s.k).collect();
        // step 144 is still day 0; the 24-step cadence begins at step 145
        assert_eq!(ks, [48, 96, 144, 168, 192]);
    }

    #[test]
    fn runs_are_deterministic_and_ordered() {
        let toml = r#"
            horizon_days = 2
            [[scenario]]
            label = "a"
            [[scenario.phase]]
            start_day = 0
            end_day = 2
            bridge_interval = 48
            [[scenario]]
            label = "b"
            miss_at = [100]
            [[scenario.phase]]
            start_day = 0
            end_day = 2
            bridge_interval = 24
        "#;
        let cfg = mini_config(toml);
        let first = run_config(&cfg).unwrap();
        let second = run_config(&cfg).unwrap();
        assert_eq!(first.len(), 2);
        assert_eq!(first[0].summary.label, "a");
        assert_eq!(first[1].summary.label, "b");
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(x.trajectory.to_csv_string(), y.trajectory.to_csv_string());
            assert_eq!(
                x.state.log().to_csv_string(),
                y.state.log().to_csv_string()
            );
            assert_eq!(x.summary, y.summary);
        }
    }
}
