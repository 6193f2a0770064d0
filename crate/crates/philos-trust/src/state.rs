//! Peer lifecycle and sync-list transitions.
//!
//! A peer is either unmatched or matched into exactly one live sync list.
//! Lists seal one primary sync per prime step (advancing the shared counter
//! by `(s_m mod delta) + 1`), commit their work in bridge syncs (the only
//! place trust changes), disband on a missed primary with counters frozen,
//! and may dissolve voluntarily right after a successful bridge.
//!
//! `SystemState` is single-writer: one driver applies transitions in
//! sequence. Every transition appends to the event log.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::event::{EventKind, EventLog, EventRecord};
use crate::scalar::Scalar;
use crate::trust::{
    fractional_trust, update_trust, BridgeCalc, BridgeObservation, FractionalTrust, RawTrust,
    TrustError, TrustParams,
};

/// Default minimum sync list size: a peer plus at least two others.
pub const DEFAULT_MIN_LIST_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeerId(u64);

impl PeerId {
    pub fn from_raw(id: u64) -> Self {
        Self(id)
    }

    pub fn raw(&self) -> u64 {
        self.0
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ListId(u64);

impl ListId {
    pub fn from_raw(id: u64) -> Self {
        Self(id)
    }

    pub fn raw(&self) -> u64 {
        self.0
    }
}

impl fmt::Display for ListId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("unknown sync list {0}")]
    UnknownList(ListId),
    #[error("unknown peer {0}")]
    UnknownPeer(PeerId),
    #[error("peer {peer} is already matched into sync list {list}")]
    PeerAlreadyMatched { peer: PeerId, list: ListId },
    #[error("sync list needs at least {min} peers, got {got}")]
    ListTooSmall { min: usize, got: usize },
    #[error("peer {peer} is not a member of sync list {list}")]
    NotAMember { peer: PeerId, list: ListId },
    #[error("bridge sync requires at least one primary sync since the last bridge")]
    BridgeWithoutPrimaries,
    #[error("dissolution is only allowed directly after a successful bridge sync")]
    DissolutionWithoutBridge,
    #[error(transparent)]
    Trust(#[from] TrustError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerState {
    Unmatched,
    Matched(ListId),
}

/// Per-peer bookkeeping: trust, last bridge step, match status.
///
/// `last_bridge` persists across disbands and unmatched stretches; the next
/// bridge's decay exponent `k - last_bridge` silently accumulates the whole
/// gap (the hidden decay).
#[derive(Debug, Clone, PartialEq)]
pub struct PeerLedger<S> {
    id: PeerId,
    trust: RawTrust<S>,
    last_bridge: u64,
    state: PeerState,
}

impl<S: Scalar> PeerLedger<S> {
    fn new(id: PeerId, joined_at: u64) -> Self {
        Self {
            id,
            trust: RawTrust::zero(),
            last_bridge: joined_at,
            state: PeerState::Unmatched,
        }
    }

    pub fn id(&self) -> PeerId {
        self.id
    }

    pub fn trust(&self) -> RawTrust<S> {
        self.trust
    }

    /// Step of this peer's most recent bridge (or its join step before any).
    pub fn last_bridge(&self) -> u64 {
        self.last_bridge
    }

    pub fn state(&self) -> PeerState {
        self.state
    }

    pub fn list_id(&self) -> Option<ListId> {
        match self.state {
            PeerState::Matched(id) => Some(id),
            PeerState::Unmatched => None,
        }
    }

    pub fn is_matched(&self) -> bool {
        matches!(self.state, PeerState::Matched(_))
    }
}

/// A live sync list: member set and the shared primary counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncList {
    id: ListId,
    members: BTreeSet<PeerId>,
    s_m: u32,
    just_bridged: bool,
}

impl SyncList {
    pub fn id(&self) -> ListId {
        self.id
    }

    pub fn members(&self) -> impl Iterator<Item = PeerId> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, peer: PeerId) -> bool {
        self.members.contains(&peer)
    }

    /// Successful primaries since formation or the last bridge, capped at
    /// delta by the wrap rule.
    pub fn s_m(&self) -> u32 {
        self.s_m
    }
}

/// One member's result of a bridge sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeOutcome<S> {
    pub peer: PeerId,
    pub calc: BridgeCalc,
    pub trust_before: RawTrust<S>,
    pub trust_after: RawTrust<S>,
}

/// The whole system at one instant: clock, peers, live lists, event log.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState<S> {
    params: TrustParams<S>,
    min_list_size: usize,
    clock: u64,
    next_peer: u64,
    next_list: u64,
    peers: BTreeMap<PeerId, PeerLedger<S>>,
    lists: BTreeMap<ListId, SyncList>,
    log: EventLog<S>,
}

impl<S: Scalar> SystemState<S> {
    pub fn new(params: TrustParams<S>) -> Self {
        Self {
            params,
            min_list_size: DEFAULT_MIN_LIST_SIZE,
            clock: 0,
            next_peer: 0,
            next_list: 0,
            peers: BTreeMap::new(),
            lists: BTreeMap::new(),
            log: EventLog::new(),
        }
    }

    /// Overrides the minimum list size (floor 1).
    pub fn with_min_list_size(mut self, min: usize) -> Self {
        self.min_list_size = min.max(1);
        self
    }

    pub fn params(&self) -> &TrustParams<S> {
        &self.params
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn log(&self) -> &EventLog<S> {
        &self.log
    }

    pub fn peer(&self, id: PeerId) -> Result<&PeerLedger<S>, StateError> {
        self.peers.get(&id).ok_or(StateError::UnknownPeer(id))
    }

    pub fn list(&self, id: ListId) -> Result<&SyncList, StateError> {
        self.lists.get(&id).ok_or(StateError::UnknownList(id))
    }

    pub fn peers(&self) -> impl Iterator<Item = &PeerLedger<S>> {
        self.peers.values()
    }

    pub fn lists(&self) -> impl Iterator<Item = &SyncList> {
        self.lists.values()
    }

    /// Advances the prime-step clock by one and returns the new step.
    pub fn advance_clock(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Registers a new peer with zero trust, unmatched, baselined at the
    /// current step.
    pub fn add_peer(&mut self) -> PeerId {
        let id = PeerId(self.next_peer);
        self.next_peer += 1;
        self.peers.insert(id, PeerLedger::new(id, self.clock));
        self.log.push(EventRecord {
            k: self.clock,
            kind: EventKind::PeerJoined,
            list_id: None,
            peer_id: Some(id),
            b: Some(self.clock),
            k_minus_b: None,
            s_m: None,
            trust_before: None,
            trust_after: Some(RawTrust::zero()),
        });
        id
    }

    /// Groups unmatched peers into a new sync list with a fresh counter.
    pub fn form_sync_list(&mut self, peer_ids: &[PeerId]) -> Result<ListId, StateError> {
        let unique: BTreeSet<PeerId> = peer_ids.iter().copied().collect();
        if unique.len() < self.min_list_size {
            return Err(StateError::ListTooSmall {
                min: self.min_list_size,
                got: unique.len(),
            });
        }
        for &peer in &unique {
            let ledger = self.peer(peer)?;
            if let PeerState::Matched(list) = ledger.state {
                return Err(StateError::PeerAlreadyMatched { peer, list });
            }
        }
        let id = ListId(self.next_list);
        self.next_list += 1;
        for &peer in &unique {
            self.peers
                .get_mut(&peer)
                .expect("peer existence checked above")
                .state = PeerState::Matched(id);
        }
        self.lists.insert(
            id,
            SyncList {
                id,
                members: unique,
                s_m: 0,
                just_bridged: false,
            },
        );
        self.log.push(EventRecord {
            k: self.clock,
            kind: EventKind::ListFormed,
            list_id: Some(id),
            peer_id: None,
            b: None,
            k_minus_b: None,
            s_m: Some(0),
            trust_before: None,
            trust_after: None,
        });
        Ok(id)
    }

    /// Seals one primary sync: `s_m <- (s_m mod delta) + 1`.
    ///
    /// The wrap past delta is the late-bridge penalty: a list that overruns
    /// the max bridge interval starts counting credit from 1 again.
    pub fn primary_sync(&mut self, list_id: ListId) -> Result<u32, StateError> {
        let delta = self.params.delta();
        let list = self
            .lists
            .get_mut(&list_id)
            .ok_or(StateError::UnknownList(list_id))?;
        list.s_m = (list.s_m % delta) + 1;
        list.just_bridged = false;
        let s_m = list.s_m;
        self.log.push(EventRecord {
            k: self.clock,
            kind: EventKind::PrimarySync,
            list_id: Some(list_id),
            peer_id: None,
            b: None,
            k_minus_b: None,
            s_m: Some(s_m),
            trust_before: None,
            trust_after: None,
        });
        Ok(s_m)
    }

    /// Commits the list's primaries globally, repricing every member's trust
    /// and resetting the counter.
    ///
    /// Each member is credited the shared `s_m` against its own decay
    /// exponent `k - last_bridge`; members carrying a longer gap (joined the
    /// list after a disband) pay more decay for the same credit.
    pub fn bridge_sync(&mut self, list_id: ListId) -> Result<Vec<BridgeOutcome<S>>, StateError> {
        let list = self
            .lists
            .get_mut(&list_id)
            .ok_or(StateError::UnknownList(list_id))?;
        if list.s_m == 0 {
            return Err(StateError::BridgeWithoutPrimaries);
        }
        let s_m = list.s_m;
        let members: Vec<PeerId> = list.members.iter().copied().collect();
        let k = self.clock;
        let mut outcomes = Vec::with_capacity(members.len());
        for peer in members {
            let ledger = self
                .peers
                .get_mut(&peer)
                .expect("list members always exist");
            let obs = BridgeObservation::new(k, ledger.last_bridge, s_m)?;
            let before = ledger.trust;
            let after = update_trust(before, &obs, &self.params);
            ledger.trust = after;
            ledger.last_bridge = k;
            let calc = BridgeCalc::from_observation(&obs, &self.params);
            self.log.push(EventRecord {
                k,
                kind: EventKind::BridgeSync,
                list_id: Some(list_id),
                peer_id: Some(peer),
                b: Some(obs.b()),
                k_minus_b: Some(obs.elapsed()),
                s_m: Some(s_m),
                trust_before: Some(before),
                trust_after: Some(after),
            });
            outcomes.push(BridgeOutcome {
                peer,
                calc,
                trust_before: before,
                trust_after: after,
            });
        }
        let list = self
            .lists
            .get_mut(&list_id)
            .expect("list presence checked above");
        list.s_m = 0;
        list.just_bridged = true;
        Ok(outcomes)
    }

    /// A primary sync failed (sabotage or accident): the list disbands.
    ///
    /// Members return to unmatched with trust and `last_bridge` untouched;
    /// the elapsed gap surfaces as extra decay at each member's next bridge.
    pub fn miss_primary(
        &mut self,
        list_id: ListId,
        saboteur: Option<PeerId>,
    ) -> Result<(), StateError> {
        let list = self.list(list_id)?;
        if let Some(peer) = saboteur {
            if !list.contains(peer) {
                return Err(StateError::NotAMember {
                    peer,
                    list: list_id,
                });
            }
        }
        let s_m = list.s_m;
        let list = self.lists.remove(&list_id).expect("list checked above");
        for peer in list.members {
            self.peers
                .get_mut(&peer)
                .expect("list members always exist")
                .state = PeerState::Unmatched;
        }
        self.log.push(EventRecord {
            k: self.clock,
            kind: EventKind::MissedPrimary,
            list_id: Some(list_id),
            peer_id: saboteur,
            b: None,
            k_minus_b: None,
            s_m: Some(s_m),
            trust_before: None,
            trust_after: None,
        });
        Ok(())
    }

    /// Voluntary disband, allowed only while the most recent list event is a
    /// successful bridge (no pending primaries are thrown away).
    pub fn request_dissolution(&mut self, list_id: ListId) -> Result<(), StateError> {
        let list = self.list(list_id)?;
        if !list.just_bridged {
            return Err(StateError::DissolutionWithoutBridge);
        }
        let list = self.lists.remove(&list_id).expect("list checked above");
        for peer in list.members {
            self.peers
                .get_mut(&peer)
                .expect("list members always exist")
                .state = PeerState::Unmatched;
        }
        self.log.push(EventRecord {
            k: self.clock,
            kind: EventKind::Dissolved,
            list_id: Some(list_id),
            peer_id: None,
            b: None,
            k_minus_b: None,
            s_m: None,
            trust_before: None,
            trust_after: None,
        });
        Ok(())
    }

    pub fn total_trust(&self) -> S {
        self.peers
            .values()
            .fold(S::zero(), |acc, p| acc + p.trust.value())
    }

    /// All peer trusts in peer-id order.
    pub fn trust_values(&self) -> Vec<RawTrust<S>> {
        self.peers.values().map(|p| p.trust).collect()
    }

    /// The peer's share of total system trust right now.
    pub fn fractional_of(&self, id: PeerId) -> Result<FractionalTrust<S>, StateError> {
        let index = self
            .peers
            .keys()
            .position(|&p| p == id)
            .ok_or(StateError::UnknownPeer(id))?;
        Ok(fractional_trust(&self.trust_values(), index)?)
    }

    /// Structural audit used by long-running drivers: member/state
    /// coherence, counter bounds, the trust ceiling, and clock sanity.
    pub fn check_invariants(&self) -> Result<(), String> {
        let delta = self.params.delta();
        let ceiling = self.params.equilibrium_trust().value()
            * (S::one() + S::from_f64(1e-12).expect("epsilon fits any scalar"));
        let mut seen: BTreeSet<PeerId> = BTreeSet::new();
        for list in self.lists.values() {
            if list.members.len() < self.min_list_size {
                return Err(format!("list {} below minimum size", list.id));
            }
            if list.s_m > delta {
                return Err(format!("list {} counter {} exceeds delta", list.id, list.s_m));
            }
            for &peer in &list.members {
                if !seen.insert(peer) {
                    return Err(format!("peer {peer} appears in two live lists"));
                }
                match self.peers.get(&peer) {
                    Some(ledger) if ledger.state == PeerState::Matched(list.id) => {}
                    Some(_) => {
                        return Err(format!(
                            "peer {peer} is in list {} but not marked matched to it",
                            list.id
                        ))
                    }
                    None => return Err(format!("list {} references unknown peer {peer}", list.id)),
                }
            }
        }
        for ledger in self.peers.values() {
            if let PeerState::Matched(list_id) = ledger.state {
                if !seen.contains(&ledger.id) {
                    return Err(format!(
                        "peer {} claims membership of dead list {list_id}",
                        ledger.id
                    ));
                }
            }
            if ledger.last_bridge > self.clock {
                return Err(format!("peer {} bridged in the future", ledger.id));
            }
            if ledger.trust.value() > ceiling {
                return Err(format!(
                    "peer {} trust {} exceeds the equilibrium ceiling",
                    ledger.id, ledger.trust
                ));
            }
        }
        Ok(())
    }
}
