//! Append-only log of lifecycle events, exportable as CSV.
//!
//! Each record carries the counter snapshots needed to reconstruct a trace
//! table: the step, the subject list/peer, the previous bridge step `b`,
//! the decay exponent `k - b`, the primary counter, and the trust values on
//! either side of a bridge. Fields that do not apply to an event kind stay
//! empty in the export.

use std::fmt;
use std::io::{self, Write};

use crate::scalar::{csv_cell, Scalar};
use crate::state::{ListId, PeerId};
use crate::trust::RawTrust;

/// Column header of the exported log, one row per record.
pub const EVENT_CSV_HEADER: &str = "k,event,list_id,peer_id,b,k_minus_b,s_m,trust_before,trust_after";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    PeerJoined,
    ListFormed,
    PrimarySync,
    BridgeSync,
    MissedPrimary,
    Dissolved,
}

impl EventKind {
    fn as_str(&self) -> &'static str {
        match self {
            EventKind::PeerJoined => "peer_joined",
            EventKind::ListFormed => "list_formed",
            EventKind::PrimarySync => "primary_sync",
            EventKind::BridgeSync => "bridge_sync",
            EventKind::MissedPrimary => "missed_primary",
            EventKind::Dissolved => "dissolved",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord<S> {
    pub k: u64,
    pub kind: EventKind,
    pub list_id: Option<ListId>,
    pub peer_id: Option<PeerId>,
    pub b: Option<u64>,
    pub k_minus_b: Option<u64>,
    pub s_m: Option<u32>,
    pub trust_before: Option<RawTrust<S>>,
    pub trust_after: Option<RawTrust<S>>,
}

impl<S: Scalar> EventRecord<S> {
    fn csv_row(&self) -> String {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        let trust = |v: &Option<RawTrust<S>>| {
            v.as_ref().map(|t| csv_cell(t.value())).unwrap_or_default()
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.k,
            self.kind,
            opt(&self.list_id),
            opt(&self.peer_id),
            opt(&self.b),
            opt(&self.k_minus_b),
            opt(&self.s_m),
            trust(&self.trust_before),
            trust(&self.trust_after),
        )
    }
}

/// Ordered, append-only event history of one [`crate::state::SystemState`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog<S> {
    records: Vec<EventRecord<S>>,
}

impl<S: Scalar> EventLog<S> {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, record: EventRecord<S>) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventRecord<S>> {
        self.records.iter()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{EVENT_CSV_HEADER}")?;
        for record in &self.records {
            writeln!(w, "{}", record.csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv rows are ascii")
    }
}
