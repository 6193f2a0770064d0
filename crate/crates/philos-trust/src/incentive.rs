//! Sabotage incentive analysis.
//!
//! A member of a sync list can unilaterally kill the list's pending credit
//! by skipping a primary sync. Whether that ever pays is decided by
//! fractional trust: sabotage freezes everyone at their hypothetical
//! (decayed) values, honesty adds the pending `s_m` to every member. This
//! module computes both payoffs from first principles and checks them
//! against the closed-form honesty condition `|M| * frac_hyp <= 1`, plus
//! the two safe-list-size bounds that follow from it.
//!
//! All trusts here are hypothetical values at the would-be bridge instant:
//! already decayed, not yet credited.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

use crate::scalar::{from_count, Scalar};
use crate::trust::{FractionalTrust, RawTrust, TrustParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncentiveError {
    #[error("a sabotage scenario needs at least one list member")]
    EmptyList,
    #[error("target index {target} out of range for a list of {len}")]
    TargetOutOfRange { target: usize, len: usize },
    #[error("trusts must be finite and nonnegative, got {0}")]
    InvalidTrust(f64),
    #[error("total trust in the comparison is zero, utilities are undefined")]
    ZeroTotalTrust,
    #[error("comparison is inconclusive with no primaries at stake (s_m = 0)")]
    NothingAtStake,
}

/// What the target peer can do at the decisive prime step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Complete the primary sync; the list bridges and credits `s_m`.
    Honest,
    /// Skip it; the list disbands and everyone keeps decayed trust.
    Sabotage,
}

/// One would-be bridge instant, viewed from a single list member.
///
/// `member_trusts[target]` is the member weighing sabotage; the rest of the
/// list and the outside world enter only through their trust sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SabotageScenario<S> {
    member_trusts: Vec<S>,
    target: usize,
    outside_trust: S,
    s_m: u32,
}

impl<S: Scalar> SabotageScenario<S> {
    pub fn new(
        member_trusts: Vec<S>,
        target: usize,
        outside_trust: S,
        s_m: u32,
    ) -> Result<Self, IncentiveError> {
        if member_trusts.is_empty() {
            return Err(IncentiveError::EmptyList);
        }
        if target >= member_trusts.len() {
            return Err(IncentiveError::TargetOutOfRange {
                target,
                len: member_trusts.len(),
            });
        }
        for &t in member_trusts.iter().chain(std::iter::once(&outside_trust)) {
            if !t.is_finite() || t < S::zero() {
                return Err(IncentiveError::InvalidTrust(t.to_f64().unwrap_or(f64::NAN)));
            }
        }
        Ok(Self {
            member_trusts,
            target,
            outside_trust,
            s_m,
        })
    }

    pub fn list_size(&self) -> usize {
        self.member_trusts.len()
    }

    pub fn s_m(&self) -> u32 {
        self.s_m
    }

    /// The target's own hypothetical trust.
    pub fn target_trust(&self) -> S {
        self.member_trusts[self.target]
    }

    /// Sum over the target's list companions.
    pub fn companions_trust(&self) -> S {
        self.member_trusts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.target)
            .fold(S::zero(), |acc, (_, &t)| acc + t)
    }

    pub fn outside_trust(&self) -> S {
        self.outside_trust
    }

    /// Total hypothetical system trust `L`.
    pub fn total_trust(&self) -> S {
        self.target_trust() + self.companions_trust() + self.outside_trust
    }
}

/// The target's fractional trust under each action.
///
/// Sabotage leaves every trust at its hypothetical value; honesty credits
/// `s_m` to each of the `|M|` list members before normalizing.
pub fn utility<S: Scalar>(
    scenario: &SabotageScenario<S>,
    action: Action,
) -> Result<FractionalTrust<S>, IncentiveError> {
    let t1 = scenario.target_trust();
    let total = scenario.total_trust();
    let (numer, denom) = match action {
        Action::Honest => {
            let stake = from_count::<S>(u64::from(scenario.s_m));
            let members = from_count::<S>(scenario.list_size() as u64);
            (t1 + stake, total + members * stake)
        }
        Action::Sabotage => (t1, total),
    };
    if denom <= S::zero() || denom.is_nan() {
        return Err(IncentiveError::ZeroTotalTrust);
    }
    FractionalTrust::new(numer / denom).map_err(|_| IncentiveError::ZeroTotalTrust)
}

/// The target's hypothetical share of total trust, the quantity the honesty
/// condition multiplies by `|M|`.
pub fn hypothetical_fraction<S: Scalar>(
    scenario: &SabotageScenario<S>,
) -> Result<FractionalTrust<S>, IncentiveError> {
    utility(scenario, Action::Sabotage)
}

/// The closed-form honesty condition: a peer with hypothetical share
/// `frac_hyp` in a list of `list_size` gains nothing from sabotage iff
/// `list_size * frac_hyp <= 1`.
pub fn is_honesty_incentivized<S: Scalar>(
    frac_hyp: FractionalTrust<S>,
    list_size: usize,
) -> bool {
    from_count::<S>(list_size as u64) * frac_hyp.value() <= S::one()
}

/// Floor that forgives float dust: values within 1e-12 relative of an
/// integer count as that integer. `floor(100 * T* * (1 - beta^delta) / delta)`
/// must be 100, not 99, when the real quotient is exactly 100.
fn floor_with_slack<S: Scalar>(x: S) -> u64 {
    let eps = S::from_f64(1e-12).expect("epsilon fits any scalar");
    let nudged = x + x.abs() * eps + eps;
    let floored = nudged.floor();
    if floored <= S::zero() {
        0
    } else {
        floored.to_u64().unwrap_or(u64::MAX)
    }
}

/// Largest list size that is safe regardless of how trust is distributed:
/// `floor(L * (1 - beta^delta) / delta)`, which equals `floor(L / T*)`.
///
/// Any list no larger than this contains no member whose sabotage could
/// pay, because even a member holding the ceiling `T*` stays within the
/// honesty condition.
pub fn max_safe_list_size<S: Scalar>(total_trust: RawTrust<S>, params: &TrustParams<S>) -> u64 {
    let bound = total_trust.value() * (S::one() - params.delta_decay())
        / from_count::<S>(u64::from(params.delta()));
    floor_with_slack(bound)
}

/// The same bound computed from the peer count and average trust:
/// `floor(n * avg / T*)`.
pub fn max_safe_list_size_avg<S: Scalar>(
    n_peers: u64,
    avg_trust: RawTrust<S>,
    params: &TrustParams<S>,
) -> u64 {
    let bound =
        from_count::<S>(n_peers) * avg_trust.value() / params.equilibrium_trust().value();
    floor_with_slack(bound)
}

/// Outcome of one brute-force comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncentiveReport<S> {
    pub honest_utility: S,
    pub sabotage_utility: S,
    /// `|M| * frac_hyp`, the left side of the honesty condition.
    pub condition: S,
    /// Closed-form prediction: honesty weakly preferred.
    pub honesty_predicted: bool,
    /// Brute-force comparison lands on the same side as the prediction.
    pub agree: bool,
}

/// Signum with a relative dead zone: values within `1e-12 * scale` of zero
/// count as zero, so exact boundary scenarios classify as ties on both the
/// utility side and the condition side.
fn sign_with_slack<S: Scalar>(x: S, scale: S) -> i8 {
    let eps = S::from_f64(1e-12).expect("epsilon fits any scalar");
    if x.abs() <= scale * eps {
        0
    } else if x > S::zero() {
        1
    } else {
        -1
    }
}

/// Compares honest vs. sabotage payoffs directly from the fractional-trust
/// definitions and checks the result against the closed-form condition.
///
/// This is the oracle: it never consults the condition to compute the
/// utilities, so agreement is evidence, not tautology.
pub fn brute_force_incentive_check<S: Scalar>(
    scenario: &SabotageScenario<S>,
) -> Result<IncentiveReport<S>, IncentiveError> {
    if scenario.s_m == 0 {
        return Err(IncentiveError::NothingAtStake);
    }
    let honest = utility(scenario, Action::Honest)?.value();
    let sabotage = utility(scenario, Action::Sabotage)?.value();
    let frac_hyp = hypothetical_fraction(scenario)?;
    let condition = from_count::<S>(scenario.list_size() as u64) * frac_hyp.value();
    let honesty_predicted = is_honesty_incentivized(frac_hyp, scenario.list_size());

    let utility_scale = honest.max(sabotage).max(S::from_f64(f64::MIN_POSITIVE).unwrap());
    let utility_sign = sign_with_slack(honest - sabotage, utility_scale);
    let condition_sign = sign_with_slack(S::one() - condition, S::one());
    let agree = utility_sign == condition_sign;

    Ok(IncentiveReport {
        honest_utility: honest,
        sabotage_utility: sabotage,
        condition,
        honesty_predicted,
        agree,
    })
}

/// One disagreement found by a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample<S> {
    pub index: u64,
    pub scenario: SabotageScenario<S>,
    pub report: IncentiveReport<S>,
}

/// Result of a randomized agreement sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary<S> {
    pub checked: u64,
    pub agreements: u64,
    pub counterexamples: Vec<Counterexample<S>>,
}

impl<S: Scalar> SweepSummary<S> {
    pub fn all_agree(&self) -> bool {
        self.counterexamples.is_empty() && self.agreements == self.checked
    }
}

/// Draws `count` random scenarios (list sizes in `min_size..=max_size`,
/// trusts up to the equilibrium ceiling, outside mass from thin to heavy)
/// and brute-force checks each against the closed-form condition.
///
/// Deterministic for a given seed.
pub fn random_agreement_sweep<S: Scalar>(
    count: u64,
    seed: u64,
    params: &TrustParams<S>,
    min_size: usize,
    max_size: usize,
) -> SweepSummary<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_star = params.equilibrium_trust().value().to_f64().unwrap();
    let size_dist = Uniform::new_inclusive(min_size.max(1), max_size.max(min_size.max(1)));
    let stake_dist = Uniform::new_inclusive(1_u32, params.delta());
    let mut summary = SweepSummary {
        checked: 0,
        agreements: 0,
        counterexamples: Vec::new(),
    };
    for index in 0..count {
        let size = size_dist.sample(&mut rng);
        let member_trusts: Vec<S> = (0..size)
            .map(|_| S::from_f64(rng.gen_range(0.0..t_star)).unwrap())
            .collect();
        let target = rng.gen_range(0..size);
        // half the draws keep the outside world thin so the condition's
        // sabotage region (|M| * frac > 1) is well represented
        let outside_cap = if rng.gen_bool(0.5) { t_star } else { 50.0 * t_star };
        let outside = S::from_f64(rng.gen_range(0.0..outside_cap)).unwrap();
        let s_m = stake_dist.sample(&mut rng);
        let scenario = SabotageScenario::new(member_trusts, target, outside, s_m)
            .expect("generated scenarios are valid");
        let report = brute_force_incentive_check(&scenario)
            .expect("generated scenarios have positive total trust");
        summary.checked += 1;
        if report.agree {
            summary.agreements += 1;
        } else {
            summary.counterexamples.push(Counterexample {
                index,
                scenario,
                report,
            });
        }
    }
    summary
}

/// Exact-boundary scenarios: `|M| * frac_hyp = 1` with both utilities equal.
///
/// Built from halves so every sum is exact in binary floating point: target
/// trust 1, each companion 1/2, outside mass completing `L = |M|` exactly.
pub fn boundary_scenarios<S: Scalar>(count: usize) -> Vec<SabotageScenario<S>> {
    let half = S::from_f64(0.5).expect("half fits any scalar");
    (0..count)
        .map(|i| {
            let size = i + 2;
            let mut trusts = vec![half; size];
            trusts[0] = S::one();
            // companions sum to (size - 1)/2; outside brings the total to
            // exactly size, so the target's share is exactly 1/size
            let outside = from_count::<S>((size - 1) as u64) * half;
            let s_m = (i % 48 + 1) as u32;
            SabotageScenario::new(trusts, 0, outside, s_m)
                .expect("boundary scenarios are valid")
        })
        .collect()
}

/// Result of the safe-list-size soundness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessSummary<S> {
    pub systems: usize,
    pub lists_checked: u64,
    /// Scenarios inside the bound where sabotage strictly beat honesty.
    pub violations: Vec<Counterexample<S>>,
    /// Systems whose above-the-bound witness showed strict sabotage profit.
    pub witnesses_confirmed: usize,
}

/// For seeded random systems (every trust below the equilibrium ceiling),
/// exhaustively brute-force checks that no member of any list size up to
/// `max_safe_list_size` can profit from sabotage, then confirms the bound
/// bites by exhibiting a larger list whose top-trust member does profit.
pub fn safe_size_soundness_sweep<S: Scalar>(
    systems: usize,
    seed: u64,
    params: &TrustParams<S>,
) -> SoundnessSummary<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_star = params.equilibrium_trust().value().to_f64().unwrap();
    let stake_dist = Uniform::new_inclusive(1_u32, params.delta());
    let mut summary = SoundnessSummary {
        systems,
        lists_checked: 0,
        violations: Vec::new(),
        witnesses_confirmed: 0,
    };
    let eps = S::from_f64(1e-12).expect("epsilon fits any scalar");
    for system_index in 0..systems {
        let n = rng.gen_range(4_usize..=40);
        let trusts: Vec<S> = (0..n)
            .map(|_| S::from_f64(rng.gen_range(0.0..t_star)).unwrap())
            .collect();
        let total = trusts.iter().fold(S::zero(), |acc, &t| acc + t);
        let bound = max_safe_list_size(RawTrust::new(total).expect("sums of draws are valid"), params);

        for size in 1..=(bound as usize).min(n) {
            for target_peer in 0..n {
                let mut members = vec![trusts[target_peer]];
                members.extend(
                    (0..n)
                        .filter(|&j| j != target_peer)
                        .take(size - 1)
                        .map(|j| trusts[j]),
                );
                let inside = members.iter().fold(S::zero(), |acc, &t| acc + t);
                let outside = (total - inside).max(S::zero());
                let s_m = stake_dist.sample(&mut rng);
                let scenario = SabotageScenario::new(members, 0, outside, s_m)
                    .expect("sweep scenarios are valid");
                let report = brute_force_incentive_check(&scenario)
                    .expect("sweep scenarios have positive trust");
                summary.lists_checked += 1;
                let profitable = report.sabotage_utility
                    > report.honest_utility * (S::one() + eps);
                if profitable || !report.agree {
                    summary.violations.push(Counterexample {
                        index: system_index as u64,
                        scenario,
                        report,
                    });
                }
            }
        }

        // witness: give the richest peer a list just past the pointwise
        // condition (|M| * T_max / L > 1), padding with zero-trust members
        // if the system runs out of peers
        let (richest, &t_max) = trusts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("trusts are finite"))
            .expect("systems are nonempty");
        if t_max > S::zero() {
            let witness_size =
                (floor_with_slack(total / t_max) + 1) as usize;
            let mut members = vec![t_max];
            members.extend(
                (0..n)
                    .filter(|&j| j != richest)
                    .take(witness_size - 1)
                    .map(|j| trusts[j]),
            );
            while members.len() < witness_size {
                members.push(S::zero());
            }
            let inside = members.iter().fold(S::zero(), |acc, &t| acc + t);
            let outside = (total - inside).max(S::zero());
            let scenario = SabotageScenario::new(members, 0, outside, stake_dist.sample(&mut rng))
                .expect("witness scenarios are valid");
            let report = brute_force_incentive_check(&scenario)
                .expect("witness scenarios have positive trust");
            if report.agree
                && !report.honesty_predicted
                && report.sabotage_utility > report.honest_utility
            {
                summary.witnesses_confirmed += 1;
            }
        }
    }
    summary
}
