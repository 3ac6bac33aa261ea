use std::cmp::Ordering;

use crate::engine::{AlgorithmError, Arrival, ArrivalTime, Decision, SecretaryAlgorithm};
use crate::matroid::{contract, ElementId, Matroid};

/// Supergreedy written directly: after `T`, accept `e` iff it is in the
/// max-weight basis of everything seen so far with the accepted set
/// contracted. Keeps no memory policy; used as a cross-check.
pub struct SupergreedyDirect<'m> {
    matroid: &'m dyn Matroid,
    horizon: ArrivalTime,
    /// `(weight, id)`, heaviest first.
    seen: Vec<(u64, ElementId)>,
    accepted: Vec<ElementId>,
}

impl<'m> SupergreedyDirect<'m> {
    pub fn new(matroid: &'m dyn Matroid, horizon: ArrivalTime) -> Self {
        SupergreedyDirect { matroid, horizon, seen: Vec::new(), accepted: Vec::new() }
    }
}

fn key(a: &(u64, ElementId), b: &(u64, ElementId)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1))
}

impl SecretaryAlgorithm for SupergreedyDirect<'_> {
    fn name(&self) -> &str {
        "supergreedy-direct"
    }

    fn horizon(&self) -> Option<ArrivalTime> {
        Some(self.horizon)
    }

    fn on_arrival(&mut self, a: Arrival) -> Result<Decision, AlgorithmError> {
        let entry = (a.weight, a.element);
        let pos = self.seen.partition_point(|x| key(x, &entry) == Ordering::Less);
        self.seen.insert(pos, entry);
        if a.time <= self.horizon {
            return Ok(Decision::Reject);
        }
        let c = contract(self.matroid, &self.accepted)?;
        let mut b = c.builder();
        let mut keep = false;
        for &(_, x) in &self.seen[..=pos] {
            if self.accepted.contains(&x) {
                continue;
            }
            keep = b.try_insert(x);
        }
        if keep {
            self.accepted.push(a.element);
            Ok(Decision::Accept)
        } else {
            Ok(Decision::Reject)
        }
    }
}
