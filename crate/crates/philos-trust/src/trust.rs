//! Core trust arithmetic: decay, bridge rewards, equilibrium, calibration.
//!
//! Trust for a peer is a nonnegative scalar updated only at bridge syncs.
//! A bridge at prime step `k`, with the previous bridge at step `b` and
//! `s_m` successful primary syncs since then, reprices trust as
//!
//! ```text
//! T := T * beta^(k - b) + s_m * min(1, (k - b) / delta)
//! ```
//!
//! where `beta` is the per-step decay base and `delta` the longest stretch
//! of primary syncs a list may buffer before bridging. Every public entry
//! point here is a pure function of its arguments.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::scalar::{from_count, Scalar};

/// Minutes per month used by the calibration rule (30-day months).
const MINUTES_PER_MONTH: f64 = 60.0 * 24.0 * 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrustError {
    #[error("decay base must lie strictly between 0 and 1, got {0}")]
    BetaOutOfRange(f64),
    #[error("max bridge interval must be at least 1 step")]
    DeltaTooSmall,
    #[error("prime step length must be a positive number of minutes, got {0}")]
    PrimeStepOutOfRange(f64),
    #[error("bridge step {k} must come strictly after the previous bridge step {b}")]
    BridgeNotAfterPrevious { k: u64, b: u64 },
    #[error("{s_m} successful primaries cannot fit in {elapsed} elapsed steps")]
    TooManyPrimaries { s_m: u32, elapsed: u64 },
    #[error("trust must be a finite nonnegative value, got {0}")]
    InvalidTrust(f64),
    #[error("fractional trust must lie in [0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("total system trust is zero, fractional trust is undefined")]
    ZeroTotalTrust,
    #[error("peer index {index} out of range for {len} peers")]
    PeerIndexOutOfRange { index: usize, len: usize },
    #[error("offline probability must lie strictly between 0 and 1, got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("calibration window must be a positive number of months, got {0}")]
    MonthsOutOfRange(f64),
}

fn display_value<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Protocol constants shared by every trust computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustParams<S> {
    beta: S,
    delta: u32,
    prime_step_minutes: S,
}

impl<S: Scalar> TrustParams<S> {
    /// Validates and freezes a parameter set.
    pub fn new(beta: S, delta: u32, prime_step_minutes: S) -> Result<Self, TrustError> {
        if !(beta > S::zero() && beta < S::one()) {
            return Err(TrustError::BetaOutOfRange(display_value(beta)));
        }
        if delta < 1 {
            return Err(TrustError::DeltaTooSmall);
        }
        if prime_step_minutes <= S::zero() || !prime_step_minutes.is_finite() {
            return Err(TrustError::PrimeStepOutOfRange(display_value(
                prime_step_minutes,
            )));
        }
        Ok(Self {
            beta,
            delta,
            prime_step_minutes,
        })
    }

    /// Decay base of the reference regime, pinned at the 10 decimal digits
    /// the system publishes.
    pub const REFERENCE_BETA: f64 = 0.999_911_169_6;

    /// Reference parameter set: 10-minute prime steps, delta = 48, and the
    /// decay base calibrated so a perfectly behaving peer reaches 90% of
    /// equilibrium trust in 6 months.
    pub fn reference() -> Self {
        Self::new(
            S::from_f64(Self::REFERENCE_BETA).expect("reference beta fits any scalar"),
            48,
            S::from_f64(10.0).expect("reference prime step fits any scalar"),
        )
        .expect("reference parameters are valid")
    }

    /// Builds a parameter set by calibrating the decay base.
    ///
    /// See [`calibrate_beta`] for the rule.
    pub fn calibrated(
        months_to_target: S,
        target_fraction: S,
        delta: u32,
        prime_step_minutes: S,
    ) -> Result<Self, TrustError> {
        let beta = calibrate_beta(months_to_target, target_fraction, prime_step_minutes)?;
        Self::new(beta, delta, prime_step_minutes)
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn prime_step_minutes(&self) -> S {
        self.prime_step_minutes
    }

    /// `beta^steps`, computed as `exp(steps * ln beta)`.
    ///
    /// The exponent can reach the hundreds of thousands (years of downtime),
    /// where repeated multiplication would both crawl and accumulate error;
    /// the log form stays accurate out to exponents around 1e6.
    pub fn decay_factor(&self, steps: u64) -> S {
        (from_count::<S>(steps) * self.beta.ln()).exp()
    }

    /// `beta^delta`, the decay applied across one maximal bridge interval.
    pub fn delta_decay(&self) -> S {
        self.decay_factor(u64::from(self.delta))
    }

    /// Fixed point of the perfect-behavior update: `delta / (1 - beta^delta)`.
    ///
    /// A peer bridging every `delta` steps with no missed primaries converges
    /// to this value from below; no reachable update exceeds it.
    pub fn equilibrium_trust(&self) -> RawTrust<S> {
        let t = from_count::<S>(u64::from(self.delta)) / (S::one() - self.delta_decay());
        RawTrust(t)
    }

    /// Prime steps per day, rounded to the nearest whole step.
    pub fn steps_per_day(&self) -> u64 {
        let per_day = S::from_f64(60.0 * 24.0).expect("day length fits any scalar")
            / self.prime_step_minutes;
        per_day.round().to_u64().expect("steps per day fits u64")
    }
}

/// Accumulated raw trust of one peer. Nonnegative and finite by construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawTrust<S>(S);

impl<S: Scalar> RawTrust<S> {
    pub fn new(value: S) -> Result<Self, TrustError> {
        if !value.is_finite() || value < S::zero() {
            return Err(TrustError::InvalidTrust(display_value(value)));
        }
        Ok(Self(value))
    }

    /// Trust of a freshly joined peer.
    pub fn zero() -> Self {
        Self(S::zero())
    }

    pub fn value(&self) -> S {
        self.0
    }
}

impl<S: Scalar> fmt::Display for RawTrust<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A peer's share of total system trust, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FractionalTrust<S>(S);

impl<S: Scalar> FractionalTrust<S> {
    pub fn new(value: S) -> Result<Self, TrustError> {
        if !value.is_finite() || value < S::zero() || value > S::one() {
            return Err(TrustError::FractionOutOfRange(display_value(value)));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> S {
        self.0
    }
}

impl<S: Scalar> fmt::Display for FractionalTrust<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// What one peer reports at a bridge sync: current step, previous bridge
/// step, and how many primaries the list completed in between.
///
/// Valid by construction: `k > b` and `s_m <= k - b` (a list cannot complete
/// more primaries than steps elapsed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeObservation {
    k: u64,
    b: u64,
    s_m: u32,
}

impl BridgeObservation {
    pub fn new(k: u64, b: u64, s_m: u32) -> Result<Self, TrustError> {
        if k <= b {
            return Err(TrustError::BridgeNotAfterPrevious { k, b });
        }
        let elapsed = k - b;
        if u64::from(s_m) > elapsed {
            return Err(TrustError::TooManyPrimaries { s_m, elapsed });
        }
        Ok(Self { k, b, s_m })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn s_m(&self) -> u32 {
        self.s_m
    }

    /// Steps since the previous bridge, `k - b`. Always at least 1.
    pub fn elapsed(&self) -> u64 {
        self.k - self.b
    }
}

/// The symbolic pieces of one bridge update: decay exponent and reward term.
///
/// Two updates are the same calculation iff these integers match, so figure
/// traces can be compared exactly with no float tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeCalc {
    /// Decay exponent `k - b`.
    pub exponent: u64,
    /// Primaries credited by the reward term.
    pub credited: u32,
    /// Interval cap `delta` the reward ratio is taken against.
    pub interval_cap: u32,
}

impl BridgeCalc {
    pub fn from_observation<S: Scalar>(obs: &BridgeObservation, params: &TrustParams<S>) -> Self {
        Self {
            exponent: obs.elapsed(),
            credited: obs.s_m(),
            interval_cap: params.delta(),
        }
    }

    /// True when the reward ratio saturated at 1.
    pub fn clamped(&self) -> bool {
        self.exponent >= u64::from(self.interval_cap)
    }
}

impl fmt::Display for BridgeCalc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clamped() {
            write!(f, "prev*beta^{} + {}(1)", self.exponent, self.credited)
        } else {
            write!(
                f,
                "prev*beta^{} + {}({}/{})",
                self.exponent, self.credited, self.exponent, self.interval_cap
            )
        }
    }
}

/// Reward ratio `min(1, elapsed / delta)`, clamped on the integers so an
/// elapsed interval of exactly `delta` yields 1 with no division.
fn reward_ratio<S: Scalar>(elapsed: u64, delta: u32) -> S {
    if elapsed >= u64::from(delta) {
        S::one()
    } else {
        from_count::<S>(elapsed) / from_count::<S>(u64::from(delta))
    }
}

/// Applies one bridge update to a peer's trust.
///
/// Decays the previous value across the elapsed interval, then credits the
/// observed primaries, scaled down when the list bridged early. The result
/// never exceeds `equilibrium_trust` for observations a live list can
/// produce (`s_m <= min(k - b, delta)` and previous trust at most the
/// equilibrium).
pub fn update_trust<S: Scalar>(
    prev: RawTrust<S>,
    obs: &BridgeObservation,
    params: &TrustParams<S>,
) -> RawTrust<S> {
    let decayed = prev.value() * params.decay_factor(obs.elapsed());
    let reward = from_count::<S>(u64::from(obs.s_m())) * reward_ratio::<S>(obs.elapsed(), params.delta());
    RawTrust(decayed + reward)
}

/// Trust a peer would hold at step `k` if it skipped every bridge since `b`:
/// pure decay, no reward.
pub fn hypothetical_trust<S: Scalar>(
    prev: RawTrust<S>,
    k: u64,
    b: u64,
    params: &TrustParams<S>,
) -> Result<RawTrust<S>, TrustError> {
    if k <= b {
        return Err(TrustError::BridgeNotAfterPrevious { k, b });
    }
    Ok(RawTrust(prev.value() * params.decay_factor(k - b)))
}

/// Share of total trust held by the peer at `index`.
///
/// Errors when the total is zero rather than inventing a share; a system
/// with no trust yet has no meaningful fractions.
pub fn fractional_trust<S: Scalar>(
    trusts: &[RawTrust<S>],
    index: usize,
) -> Result<FractionalTrust<S>, TrustError> {
    if index >= trusts.len() {
        return Err(TrustError::PeerIndexOutOfRange {
            index,
            len: trusts.len(),
        });
    }
    let total = trusts.iter().fold(S::zero(), |acc, t| acc + t.value());
    if total <= S::zero() || total.is_nan() {
        return Err(TrustError::ZeroTotalTrust);
    }
    FractionalTrust::new(trusts[index].value() / total)
}

/// Solves for the decay base that makes a perfect peer reach fraction `p`
/// of equilibrium trust after `m` months of flawless bridging:
///
/// ```text
/// beta = (1 - p)^(K / (m * 60 * 24 * 30))
/// ```
///
/// with `K` the prime step length in minutes and 30-day months. The same
/// base makes a silent peer's trust decay to fraction `1 - p` over the same
/// window; reaching and forgetting are two views of one rate. Computed in
/// log space.
pub fn calibrate_beta<S: Scalar>(
    months_to_target: S,
    target_fraction: S,
    prime_step_minutes: S,
) -> Result<S, TrustError> {
    if !(target_fraction > S::zero() && target_fraction < S::one()) {
        return Err(TrustError::ProbabilityOutOfRange(display_value(
            target_fraction,
        )));
    }
    if months_to_target <= S::zero() || !months_to_target.is_finite() {
        return Err(TrustError::MonthsOutOfRange(display_value(months_to_target)));
    }
    if prime_step_minutes <= S::zero() || !prime_step_minutes.is_finite() {
        return Err(TrustError::PrimeStepOutOfRange(display_value(
            prime_step_minutes,
        )));
    }
    let steps_to_target = months_to_target
        * S::from_f64(MINUTES_PER_MONTH).expect("month length fits any scalar")
        / prime_step_minutes;
    Ok(((S::one() - target_fraction).ln() / steps_to_target).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> TrustParams<f64> {
        TrustParams::reference()
    }

    #[test]
    fn reference_params_match_pinned_constants() {
        let p = reference();
        assert_eq!(p.beta(), 0.999_911_169_6);
        assert_eq!(p.delta(), 48);
        assert_eq!(p.steps_per_day(), 144);
    }

    #[test]
    fn calibration_six_months_to_ninety_percent() {
        // exp(ln(0.1) / 25920) to 30 digits: 0.999911169644222478405622943657
        let beta: f64 = calibrate_beta(6.0, 0.9, 10.0).unwrap();
        assert_relative_eq!(beta, 0.999_911_169_644_222_5, max_relative = 1e-12);
        // agrees with the 10-decimal pinned reference base at 1e-9 absolute
        assert!((beta - 0.999_911_169_6).abs() < 1e-9);
    }

    #[test]
    fn calibration_twelve_months_to_ninety_percent() {
        // exp(ln(0.1) / 51840) to 30 digits: 0.999955583835713414236323151227
        let beta: f64 = calibrate_beta(12.0, 0.9, 10.0).unwrap();
        assert_relative_eq!(beta, 0.999_955_583_835_713_4, max_relative = 1e-12);
        assert!((beta - 0.999_955_583_8).abs() < 1e-9);
    }

    #[test]
    fn calibration_unit_exponent_collapses_to_base() {
        // one prime step spanning the whole window: beta = (1 - p)^1
        let beta = calibrate_beta(6.0, 0.9, 6.0 * 60.0 * 24.0 * 30.0).unwrap();
        assert_relative_eq!(beta, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn calibration_rejects_degenerate_inputs() {
        assert!(matches!(
            calibrate_beta(6.0, 0.0, 10.0),
            Err(TrustError::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            calibrate_beta(6.0, 1.0, 10.0),
            Err(TrustError::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            calibrate_beta(6.0, 1.5, 10.0),
            Err(TrustError::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            calibrate_beta(0.0, 0.9, 10.0),
            Err(TrustError::MonthsOutOfRange(_))
        ));
        assert!(matches!(
            calibrate_beta(6.0, 0.9, -1.0),
            Err(TrustError::PrimeStepOutOfRange(_))
        ));
    }

    #[test]
    fn equilibrium_matches_closed_form() {
        // 48 / (1 - beta^48) with beta the f64 nearest 0.9999111696,
        // evaluated at 40 digits: 11280.9244228433040669742382844
        let t_star = reference().equilibrium_trust().value();
        assert_relative_eq!(t_star, 11_280.924_422_843_304, max_relative = 1e-12);
    }

    #[test]
    fn delta_decay_matches_log_space_power() {
        // beta^48 at 40 digits: 0.99574502955601737599
        assert_relative_eq!(
            reference().delta_decay(),
            0.995_745_029_556_017_4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn update_full_interval_all_primaries() {
        // 48 * beta^48 + 48 = 95.795761418688834048
        let p = reference();
        let prev = RawTrust::new(48.0).unwrap();
        let obs = BridgeObservation::new(96, 48, 48).unwrap();
        let next = update_trust(prev, &obs, &p);
        assert_relative_eq!(next.value(), 95.795_761_418_688_83, max_relative = 1e-12);
    }

    #[test]
    fn update_decay_only_when_no_primaries() {
        // 100 * beta^48 = 99.574502955601737599
        let p = reference();
        let prev = RawTrust::new(100.0).unwrap();
        let obs = BridgeObservation::new(48, 0, 0).unwrap();
        let next = update_trust(prev, &obs, &p);
        assert_relative_eq!(next.value(), 99.574_502_955_601_74, max_relative = 1e-12);
    }

    #[test]
    fn update_single_step() {
        // 100 * beta^1 + 1 * (1/48)
        let p = reference();
        let prev = RawTrust::new(100.0).unwrap();
        let obs = BridgeObservation::new(1, 0, 1).unwrap();
        let next = update_trust(prev, &obs, &p);
        assert_relative_eq!(
            next.value(),
            99.991_116_96 + 1.0 / 48.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn early_bridge_scales_reward_down() {
        let p = reference();
        let prev = RawTrust::zero();
        let obs = BridgeObservation::new(112, 103, 3).unwrap();
        let next = update_trust(prev, &obs, &p);
        assert_relative_eq!(next.value(), 3.0 * (9.0 / 48.0), max_relative = 1e-12);
    }

    #[test]
    fn reward_ratio_clamps_at_one_exactly() {
        assert_eq!(reward_ratio::<f64>(48, 48), 1.0);
        assert_eq!(reward_ratio::<f64>(49, 48), 1.0);
        assert_eq!(reward_ratio::<f64>(1_000_000, 48), 1.0);
        assert_eq!(reward_ratio::<f64>(24, 48), 0.5);
    }

    #[test]
    fn hypothetical_is_pure_decay() {
        let p = reference();
        let prev = RawTrust::new(100.0).unwrap();
        let hyp = hypothetical_trust(prev, 48, 0, &p).unwrap();
        assert_relative_eq!(hyp.value(), 99.574_502_955_601_74, max_relative = 1e-12);
        assert!(hyp.value() < prev.value());
        assert!(matches!(
            hypothetical_trust(prev, 5, 5, &p),
            Err(TrustError::BridgeNotAfterPrevious { .. })
        ));
    }

    #[test]
    fn decay_factor_survives_huge_exponents() {
        let p = reference();
        let f = p.decay_factor(1_000_000);
        assert!(f > 0.0 && f < 1e-38);
        assert!(f.is_finite());
    }

    #[test]
    fn observation_validation() {
        assert!(BridgeObservation::new(10, 10, 0).is_err());
        assert!(BridgeObservation::new(9, 10, 0).is_err());
        assert!(BridgeObservation::new(11, 10, 2).is_err());
        let obs = BridgeObservation::new(11, 10, 1).unwrap();
        assert_eq!(obs.elapsed(), 1);
    }

    #[test]
    fn fractional_trust_shares() {
        let trusts: Vec<RawTrust<f64>> = [3.0, 1.0, 0.0]
            .iter()
            .map(|&t| RawTrust::new(t).unwrap())
            .collect();
        assert_eq!(fractional_trust(&trusts, 0).unwrap().value(), 0.75);
        assert_eq!(fractional_trust(&trusts, 2).unwrap().value(), 0.0);
        assert!(matches!(
            fractional_trust(&trusts, 3),
            Err(TrustError::PeerIndexOutOfRange { .. })
        ));
        let zeros = [RawTrust::<f64>::zero(); 2];
        assert!(matches!(
            fractional_trust(&zeros, 0),
            Err(TrustError::ZeroTotalTrust)
        ));
        assert!(matches!(
            fractional_trust::<f64>(&[], 0),
            Err(TrustError::PeerIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn bridge_calc_display_forms() {
        let p = reference();
        let early = BridgeCalc::from_observation(&BridgeObservation::new(112, 103, 3).unwrap(), &p);
        assert_eq!(early.to_string(), "prev*beta^9 + 3(9/48)");
        assert!(!early.clamped());
        let full = BridgeCalc::from_observation(&BridgeObservation::new(148, 100, 48).unwrap(), &p);
        assert_eq!(full.to_string(), "prev*beta^48 + 48(1)");
        assert!(full.clamped());
    }

    #[test]
    fn params_validation() {
        assert!(TrustParams::new(1.0_f64, 48, 10.0).is_err());
        assert!(TrustParams::new(0.0_f64, 48, 10.0).is_err());
        assert!(TrustParams::new(-0.5_f64, 48, 10.0).is_err());
        assert!(TrustParams::new(0.5_f64, 0, 10.0).is_err());
        assert!(TrustParams::new(0.5_f64, 48, 0.0).is_err());
        assert!(TrustParams::new(0.5_f64, 1, 10.0).is_ok());
    }

    #[test]
    fn works_in_single_precision() {
        let p = TrustParams::<f32>::reference();
        let t_star = p.equilibrium_trust().value();
        // storing beta at f32 precision perturbs 1 - beta^48 by ~1e-4 relative
        assert_relative_eq!(t_star, 11_280.924_f32, max_relative = 1e-3);
        let obs = BridgeObservation::new(96, 48, 48).unwrap();
        let next = update_trust(RawTrust::new(48.0_f32).unwrap(), &obs, &p);
        assert_relative_eq!(next.value(), 95.795_76_f32, max_relative = 1e-5);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Observations a live sync list can actually produce: the primary
        /// counter wraps at delta, so s_m <= min(k - b, delta).
        fn reachable_obs(delta: u32) -> impl Strategy<Value = BridgeObservation> {
            (1_u64..200_000).prop_flat_map(move |elapsed| {
                let cap = elapsed.min(u64::from(delta)) as u32;
                (Just(elapsed), 0..=cap).prop_map(move |(e, s_m)| {
                    BridgeObservation::new(1_000_000 + e, 1_000_000, s_m).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn perfect_update_is_fixed_point_of_equilibrium(delta in 1_u32..500, beta in 0.5_f64..0.999999) {
                let p = TrustParams::new(beta, delta, 10.0).unwrap();
                let t_star = p.equilibrium_trust();
                let obs = BridgeObservation::new(u64::from(delta), 0, delta).unwrap();
                let next = update_trust(t_star, &obs, &p);
                prop_assert!((next.value() - t_star.value()).abs() <= 1e-12 * t_star.value());
            }

            #[test]
            fn perfect_update_strictly_increases_below_equilibrium(frac in 0.0_f64..0.9999) {
                let p = TrustParams::<f64>::reference();
                let t_star = p.equilibrium_trust().value();
                let prev = RawTrust::new(frac * t_star).unwrap();
                let obs = BridgeObservation::new(48, 0, 48).unwrap();
                let next = update_trust(prev, &obs, &p);
                prop_assert!(next.value() > prev.value());
                // one perfect bridge closes the gap to T* by exactly (1 - beta^delta)
                let closed_form = prev.value() + (1.0 - p.delta_decay()) * (t_star - prev.value());
                prop_assert!((next.value() - closed_form).abs() <= 1e-12 * closed_form);
            }

            #[test]
            fn trust_never_exceeds_equilibrium(frac in 0.0_f64..=1.0, obs in reachable_obs(48)) {
                let p = TrustParams::<f64>::reference();
                let t_star = p.equilibrium_trust().value();
                let prev = RawTrust::new(frac * t_star).unwrap();
                let next = update_trust(prev, &obs, &p);
                prop_assert!(next.value() <= t_star * (1.0 + 1e-12));
            }

            #[test]
            fn hypothetical_never_beats_bridging(frac in 0.0_f64..=1.0, obs in reachable_obs(48)) {
                let p = TrustParams::<f64>::reference();
                let prev = RawTrust::new(frac * p.equilibrium_trust().value()).unwrap();
                let bridged = update_trust(prev, &obs, &p);
                let skipped = hypothetical_trust(prev, obs.k(), obs.b(), &p).unwrap();
                prop_assert!(skipped.value() <= bridged.value());
            }

            #[test]
            fn later_full_credit_bridges_earn_more(n in 1_u32..48) {
                // with s_m = k - b = n <= delta, the reward n*(n/delta) grows in n
                let p = TrustParams::<f64>::reference();
                let reward = |n: u32| {
                    let obs = BridgeObservation::new(u64::from(n), 0, n).unwrap();
                    update_trust(RawTrust::zero(), &obs, &p).value()
                };
                prop_assert!(reward(n + 1) > reward(n));
            }

            #[test]
            fn fractional_shares_sum_to_one(trusts in proptest::collection::vec(0.0_f64..11_280.0, 1..40)) {
                let trusts: Vec<RawTrust<f64>> = trusts.iter().map(|&t| RawTrust::new(t).unwrap()).collect();
                let total: f64 = trusts.iter().map(|t| t.value()).sum();
                prop_assume!(total > 0.0);
                let sum: f64 = (0..trusts.len())
                    .map(|i| fractional_trust(&trusts, i).unwrap().value())
                    .sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
