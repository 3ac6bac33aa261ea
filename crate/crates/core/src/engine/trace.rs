use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ArrivalTime;
use crate::matroid::{ElementId, WeightAssignment};

/// Immutable id-sorted element set, shared between trace events while it
/// does not change.
pub type Snapshot = Arc<[ElementId]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventDecision {
    SampleReject,
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: ArrivalTime,
    pub element: ElementId,
    pub weight: u64,
    pub decision: EventDecision,
    /// `A` after this event.
    pub accepted: Snapshot,
    /// `I` after this event; `None` while the algorithm keeps no memory.
    pub memory: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub algorithm: String,
    pub horizon: Option<ArrivalTime>,
    pub weight_denominator: u64,
    /// `I_T`, set when the sampling stage closed.
    pub horizon_memory: Option<Snapshot>,
    pub events: Vec<TraceEvent>,
    pub accepted: Snapshot,
}

impl RunTrace {
    pub fn is_sample(&self, time: ArrivalTime) -> bool {
        self.horizon.is_some_and(|h| time <= h)
    }

    /// `A_t` seen by event `k`, i.e. after event `k - 1`.
    pub fn accepted_before(&self, k: usize) -> &[ElementId] {
        match k {
            0 => &[],
            _ => &self.events[k - 1].accepted,
        }
    }

    /// `I_t` seen by event `k`. The first post-horizon event sees `I_T`.
    pub fn memory_before(&self, k: usize) -> Option<&Snapshot> {
        let event = &self.events[k];
        if !self.is_sample(event.time) && (k == 0 || self.is_sample(self.events[k - 1].time)) {
            return self.horizon_memory.as_ref();
        }
        if k == 0 {
            None
        } else {
            self.events[k - 1].memory.as_ref()
        }
    }

    /// Arrival time per element id, `None` for ids that never arrived.
    pub fn arrival_times(&self, id_bound: usize) -> Vec<Option<ArrivalTime>> {
        let mut out = vec![None; id_bound];
        for ev in &self.events {
            if let Some(slot) = out.get_mut(ev.element.index()) {
                *slot = Some(ev.time);
            }
        }
        out
    }

    /// Index of the first event at or after `t`.
    pub fn events_before(&self, t: ArrivalTime) -> usize {
        self.events.partition_point(|e| e.time < t)
    }
}

/// Outcome of one trial against the offline optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_seed: u64,
    /// Numerators over the instance's weight denominator.
    pub utility: u128,
    pub opt_utility: u128,
    pub ratio: f64,
    /// `[i ∈ A]` for every element of the optimum, in id order.
    pub indicators: Vec<bool>,
}

pub fn trace_metrics(trace: &RunTrace, w: &WeightAssignment, opt: &[ElementId]) -> TrialRecord {
    let utility = w.total(&trace.accepted);
    let opt_utility = w.total(opt);
    let ratio = if opt_utility == 0 { f64::NAN } else { utility as f64 / opt_utility as f64 };
    let mut opt_sorted = opt.to_vec();
    opt_sorted.sort_unstable();
    let indicators = opt_sorted
        .iter()
        .map(|e| trace.accepted.binary_search(e).is_ok())
        .collect();
    TrialRecord { trial_seed: 0, utility, opt_utility, ratio, indicators }
}

/// One JSON-lines record of a trace dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub t: f64,
    pub elem: u32,
    pub w: f64,
    pub decision: EventDecision,
    #[serde(rename = "A")]
    pub accepted: Vec<u32>,
    #[serde(rename = "I")]
    pub memory: Option<Vec<u32>>,
}

impl TraceLine {
    pub fn from_event(ev: &TraceEvent, denominator: u64) -> Self {
        let ids = |s: &[ElementId]| s.iter().map(|e| e.0).collect::<Vec<_>>();
        TraceLine {
            t: ev.time.as_f64(),
            elem: ev.element.0,
            w: ev.weight as f64 / denominator as f64,
            decision: ev.decision,
            accepted: ids(&ev.accepted),
            memory: ev.memory.as_deref().map(ids),
        }
    }
}

pub fn write_trace_jsonl(trace: &RunTrace, mut out: impl Write) -> io::Result<()> {
    for ev in &trace.events {
        serde_json::to_writer(&mut out, &TraceLine::from_event(ev, trace.weight_denominator))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl(input: impl BufRead) -> io::Result<Vec<TraceLine>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(io::Error::from))
        .collect()
}
