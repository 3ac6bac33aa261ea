use std::cmp::Ordering;

use super::FrameworkError;
use crate::engine::{AlgorithmError, Arrival, ArrivalTime, Decision, SecretaryAlgorithm};
use crate::matroid::{ElementId, Matroid};

/// The virtual algorithm for `k`-uniform matroids: a late element is taken
/// iff it enters the top `k` seen so far and the element it pushes out of
/// the top `k` is a sample. Empty slots count as samples.
///
/// It remembers every element it has seen, rejected ones included, so it is
/// not an instance of [`GreedyFramework`](super::GreedyFramework).
pub struct VirtualAlgorithm {
    k: usize,
    horizon: ArrivalTime,
    /// `(weight, id, sampled)`, heaviest first.
    seen: Vec<(u64, ElementId, bool)>,
}

impl VirtualAlgorithm {
    pub fn new(m: &dyn Matroid, horizon: ArrivalTime) -> Result<Self, FrameworkError> {
        match m.uniform_capacity() {
            Some(k) if k >= 1 => Ok(VirtualAlgorithm { k, horizon, seen: Vec::new() }),
            _ => Err(FrameworkError::Configuration("virtual needs a k-uniform matroid with k >= 1".into())),
        }
    }
}

fn key(a: &(u64, ElementId, bool), b: &(u64, ElementId, bool)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1))
}

impl SecretaryAlgorithm for VirtualAlgorithm {
    fn name(&self) -> &str {
        "virtual"
    }

    fn horizon(&self) -> Option<ArrivalTime> {
        Some(self.horizon)
    }

    fn on_arrival(&mut self, a: Arrival) -> Result<Decision, AlgorithmError> {
        let sampled = a.time <= self.horizon;
        let entry = (a.weight, a.element, sampled);
        let pos = self.seen.partition_point(|x| key(x, &entry) == Ordering::Less);
        self.seen.insert(pos, entry);
        if sampled || pos >= self.k {
            return Ok(Decision::Reject);
        }
        let kicked_sample = self.seen.get(self.k).map_or(true, |x| x.2);
        Ok(if kicked_sample { Decision::Accept } else { Decision::Reject })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trial, ArrivalSchedule};
    use crate::matroid::{UniformMatroid, WeightAssignment};

    fn run(k: usize, weights: &[u64], times: &[f64]) -> Vec<ElementId> {
        let m = UniformMatroid::new(weights.len(), k);
        let w = WeightAssignment::from_integers(weights.to_vec());
        let mut alg = VirtualAlgorithm::new(&m, ArrivalTime::from_f64(0.3)).unwrap();
        run_trial(&m, &w, &ArrivalSchedule::from_f64(times), &mut alg).unwrap().accepted.to_vec()
    }

    #[test]
    fn one_uniform_takes_a_record_over_a_sampled_record() {
        // 4 beats the sampled 3 and is taken; 9 beats 4, which was not a sample.
        assert_eq!(run(1, &[3, 4, 9], &[0.1, 0.5, 0.7]), vec![ElementId(1)]);
        // 2 is no record, 9 beats the sampled 3.
        assert_eq!(run(1, &[3, 2, 9], &[0.1, 0.5, 0.7]), vec![ElementId(2)]);
    }

    #[test]
    fn all_sampled_accepts_nothing() {
        assert!(run(2, &[3, 2, 9], &[0.1, 0.2, 0.25]).is_empty());
    }

    #[test]
    fn empty_slots_count_as_samples() {
        assert_eq!(run(2, &[3, 2, 9], &[0.5, 0.6, 0.7]), vec![ElementId(0), ElementId(1)]);
    }
}
