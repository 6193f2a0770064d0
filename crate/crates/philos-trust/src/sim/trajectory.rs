//! Time series of one peer's trust over a simulation run.

use std::io::{self, Write};

use crate::scalar::{csv_cell, Scalar};

/// Column header of trajectory CSV files.
pub const TRAJECTORY_CSV_HEADER: &str = "peer_id,k,day,raw_trust,fractional_trust";

/// One observation of the subject peer, taken at a bridge or on the
/// sampling stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample<S> {
    pub k: u64,
    /// `k` converted to days (fractional).
    pub day: S,
    pub raw_trust: S,
    /// Share of total system trust; absent while the system holds none.
    pub fractional_trust: Option<S>,
}

/// Strictly time-ordered samples for one labeled peer.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    label: String,
    samples: Vec<TrajectorySample<S>>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            samples: Vec::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Appends a sample; a duplicate of the current step is dropped so a
    /// bridge and a stride tick landing on the same step yield one row.
    pub(crate) fn push(&mut self, sample: TrajectorySample<S>) {
        if let Some(last) = self.samples.last() {
            if last.k == sample.k {
                return;
            }
            debug_assert!(sample.k > last.k, "samples must advance in time");
        }
        self.samples.push(sample);
    }

    pub fn samples(&self) -> &[TrajectorySample<S>] {
        &self.samples
    }

    pub fn last(&self) -> Option<&TrajectorySample<S>> {
        self.samples.last()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.label,
                s.k,
                csv_cell(s.day),
                csv_cell(s.raw_trust),
                s.fractional_trust.map(csv_cell).unwrap_or_default(),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv rows are ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_dedup() {
        let mut t: Trajectory<f64> = Trajectory::new("blue");
        t.push(TrajectorySample {
            k: 48,
            day: 1.0 / 3.0,
            raw_trust: 48.0,
            fractional_trust: Some(1.0 / 3.0),
        });
        t.push(TrajectorySample {
            k: 48,
            day: 1.0 / 3.0,
            raw_trust: 48.0,
            fractional_trust: Some(1.0 / 3.0),
        });
        t.push(TrajectorySample {
            k: 144,
            day: 1.0,
            raw_trust: 48.0,
            fractional_trust: None,
        });
        assert_eq!(t.len(), 2);
        let csv = t.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "peer_id,k,day,raw_trust,fractional_trust");
        assert_eq!(lines[1], "blue,48,0.333333333333,48,0.333333333333");
        assert_eq!(lines[2], "blue,144,1,48,");
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let t: Trajectory<f64> = Trajectory::new("idle");
        assert!(t.is_empty());
        assert_eq!(t.to_csv_string(), "peer_id,k,day,raw_trust,fractional_trust\n");
    }
}
