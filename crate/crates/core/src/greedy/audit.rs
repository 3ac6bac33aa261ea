use std::sync::Arc;

use serde::Serialize;

use super::{validate_memory, MemoryViolation};
use crate::engine::{RunTrace, Snapshot};
use crate::matroid::{ElementId, IndependenceBuilder, Matroid};

/// Result of checking every memory snapshot of one trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MemoryAuditReport {
    /// Snapshots checked, the horizon snapshot included.
    pub checked: u64,
    /// `(event index, violation)`; the horizon snapshot uses the index of
    /// the first post-horizon event.
    pub violations: Vec<(usize, MemoryViolation)>,
}

impl MemoryAuditReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the [`validate_memory`] checks against the state after every
/// post-horizon event of a framework trace.
///
/// While neither `I_t` nor `A_t` changes, only the new arrival needs a
/// spanning check. When they change, containment and independence are
/// checked in full; spanning then only needs the elements dropped from the
/// previous (valid) memory plus the new arrival, since everything else
/// already lies in the closure of the previous memory.
pub fn audit_trace_memory(m: &dyn Matroid, trace: &RunTrace) -> MemoryAuditReport {
    let mut report = MemoryAuditReport::default();
    if trace.horizon.is_none() {
        return report;
    }
    let bound = m.id_bound();
    let mut sampled = vec![false; bound];
    let (mut in_mem, mut in_acc) = (vec![false; bound], vec![false; bound]);
    let mut arrived: Vec<ElementId> = Vec::with_capacity(trace.events.len());
    let mut samples: Vec<ElementId> = Vec::new();
    let empty: Snapshot = Arc::from(Vec::new());
    // Last state that passed every check, with a builder holding its memory.
    let mut valid: Option<(Snapshot, Snapshot, Box<dyn IndependenceBuilder + '_>)> = None;
    let mut horizon_checked = false;

    for (k, ev) in trace.events.iter().enumerate() {
        if trace.is_sample(ev.time) {
            arrived.push(ev.element);
            samples.push(ev.element);
            sampled[ev.element.index()] = true;
            continue;
        }
        if !horizon_checked {
            horizon_checked = true;
            if let Some(mem) = &trace.horizon_memory {
                report.checked += 1;
                let found = validate_memory(m, mem, &[], &samples, &arrived);
                valid = found.is_empty().then(|| (Arc::clone(mem), Arc::clone(&empty), closure_of(m, mem)));
                report.violations.extend(found.into_iter().map(|v| (k, v)));
            }
        }
        arrived.push(ev.element);
        let Some(mem) = &ev.memory else { continue };
        report.checked += 1;
        let e = ev.element;
        if let Some((m0, a0, b)) = &mut valid {
            if Arc::ptr_eq(m0, mem) && Arc::ptr_eq(a0, &ev.accepted) {
                if mem.binary_search(&e).is_err() && b.try_insert(e) {
                    report.violations.push((k, MemoryViolation::NotSpanning(e)));
                    valid = None;
                }
                continue;
            }
        }
        let (found, closure) = match &valid {
            Some((m0, _, _)) => {
                for x in mem.iter() {
                    in_mem[x.index()] = true;
                }
                for a in ev.accepted.iter() {
                    in_acc[a.index()] = true;
                }
                let mut found: Vec<MemoryViolation> = ev
                    .accepted
                    .iter()
                    .filter(|a| !in_mem[a.index()])
                    .map(|&a| MemoryViolation::MissingAccepted(a))
                    .collect();
                found.extend(
                    mem.iter()
                        .filter(|x| !sampled[x.index()] && !in_acc[x.index()])
                        .map(|&x| MemoryViolation::Foreign(x)),
                );
                let mut b = m.builder();
                if !mem.iter().all(|&x| b.try_insert(x)) {
                    found.push(MemoryViolation::Dependent);
                } else if let Some(x) = m0
                    .iter()
                    .copied()
                    .chain(std::iter::once(e))
                    .find(|x| !in_mem[x.index()] && b.try_insert(*x))
                {
                    found.push(MemoryViolation::NotSpanning(x));
                }
                for x in mem.iter() {
                    in_mem[x.index()] = false;
                }
                for a in ev.accepted.iter() {
                    in_acc[a.index()] = false;
                }
                (found, b)
            }
            None => (validate_memory(m, mem, &ev.accepted, &samples, &arrived), closure_of(m, mem)),
        };
        valid = found.is_empty().then(|| (Arc::clone(mem), Arc::clone(&ev.accepted), closure));
        report.violations.extend(found.into_iter().map(|v| (k, v)));
    }
    if !horizon_checked {
        if let Some(mem) = &trace.horizon_memory {
            report.checked += 1;
            let found = validate_memory(m, mem, &[], &samples, &arrived);
            report.violations.extend(found.into_iter().map(|v| (trace.events.len(), v)));
        }
    }
    report
}

fn closure_of<'m>(m: &'m dyn Matroid, memory: &[ElementId]) -> Box<dyn IndependenceBuilder + 'm> {
    let mut b = m.builder();
    for &x in memory {
        b.try_insert(x);
    }
    b
}
