use std::cmp::Ordering;

use super::{FrameworkError, FrameworkState, MemoryPolicy, PolicyEvent};
use crate::matroid::{greedy_basis, ElementId, Matroid};

/// `I_t = MWB((M / A_t)|S) ∪ A_t`.
///
/// Contracting one more element can only drop elements from the sample
/// basis, so after an acceptance the greedy reruns over the previous basis
/// instead of all of `S`.
#[derive(Debug, Clone, Default)]
pub struct SupergreedyPolicy {
    /// `MWB((M / A_t)|S)`, heaviest first.
    basis: Vec<ElementId>,
}

impl MemoryPolicy for SupergreedyPolicy {
    fn name(&self) -> &'static str {
        "supergreedy"
    }

    fn update(&mut self, state: &FrameworkState<'_>, event: PolicyEvent) -> Option<Vec<ElementId>> {
        match event {
            PolicyEvent::Horizon => {
                self.basis = greedy_basis(state.matroid, state.samples.iter().copied());
                Some(self.basis.clone())
            }
            PolicyEvent::Accepted(_) => {
                let mut b = state.accepted_builder();
                self.basis.retain(|&s| b.try_insert(s));
                let mut next = self.basis.clone();
                next.extend_from_slice(state.accepted);
                Some(next)
            }
            // A rejection changes neither A_t nor S.
            PolicyEvent::Rejected(_) => None,
        }
    }
}

fn require_uniform(m: &dyn Matroid, name: &str) -> Result<usize, FrameworkError> {
    match m.uniform_capacity() {
        Some(k) if k >= 1 => Ok(k),
        _ => Err(FrameworkError::Configuration(format!(
            "{name} needs a k-uniform matroid with k >= 1"
        ))),
    }
}

/// Dynkin's rule: keep the heaviest sample until something is accepted.
#[derive(Debug, Clone, Copy, Default)]
pub struct DynkinPolicy;

impl MemoryPolicy for DynkinPolicy {
    fn name(&self) -> &'static str {
        "dynkin"
    }

    fn configure(&mut self, m: &dyn Matroid) -> Result<(), FrameworkError> {
        match require_uniform(m, "dynkin")? {
            1 => Ok(()),
            k => Err(FrameworkError::Configuration(format!("dynkin needs a 1-uniform matroid, got k = {k}"))),
        }
    }

    fn update(&mut self, state: &FrameworkState<'_>, event: PolicyEvent) -> Option<Vec<ElementId>> {
        match event {
            PolicyEvent::Horizon => Some(state.samples.first().copied().into_iter().collect()),
            PolicyEvent::Accepted(_) => Some(state.accepted.to_vec()),
            PolicyEvent::Rejected(_) => None,
        }
    }
}

/// Shared bookkeeping of the two top-`k` policies: `U` starts as the `k`
/// heaviest samples and `I_t = A_t ∪ U`.
#[derive(Debug, Clone, Default)]
struct TopSamples {
    k: usize,
    /// Heaviest first.
    kept: Vec<ElementId>,
}

impl TopSamples {
    fn start(&mut self, state: &FrameworkState<'_>) -> Vec<ElementId> {
        self.kept = state.samples.iter().copied().take(self.k).collect();
        self.kept.clone()
    }

    fn after_accept(&mut self, state: &FrameworkState<'_>, pick: impl Fn(&[ElementId]) -> Option<usize>) -> Vec<ElementId> {
        if state.accepted.len() + self.kept.len() > self.k {
            if let Some(i) = pick(&self.kept) {
                self.kept.remove(i);
            }
        }
        let mut next = self.kept.clone();
        next.extend_from_slice(state.accepted);
        next
    }
}

/// On acceptance, drops the lightest element of `U`.
#[derive(Debug, Clone, Default)]
pub struct OptimisticPolicy {
    top: TopSamples,
}

impl MemoryPolicy for OptimisticPolicy {
    fn name(&self) -> &'static str {
        "optimistic"
    }

    fn configure(&mut self, m: &dyn Matroid) -> Result<(), FrameworkError> {
        self.top.k = require_uniform(m, "optimistic")?;
        Ok(())
    }

    fn update(&mut self, state: &FrameworkState<'_>, event: PolicyEvent) -> Option<Vec<ElementId>> {
        match event {
            PolicyEvent::Horizon => Some(self.top.start(state)),
            PolicyEvent::Accepted(_) => Some(self.top.after_accept(state, |u| u.len().checked_sub(1))),
            PolicyEvent::Rejected(_) => None,
        }
    }
}

/// On acceptance of `e`, drops the heaviest element of `U` lighter than `e`.
#[derive(Debug, Clone, Default)]
pub struct PessimisticPolicy {
    top: TopSamples,
}

impl MemoryPolicy for PessimisticPolicy {
    fn name(&self) -> &'static str {
        "pessimistic"
    }

    fn configure(&mut self, m: &dyn Matroid) -> Result<(), FrameworkError> {
        self.top.k = require_uniform(m, "pessimistic")?;
        Ok(())
    }

    fn update(&mut self, state: &FrameworkState<'_>, event: PolicyEvent) -> Option<Vec<ElementId>> {
        match event {
            PolicyEvent::Horizon => Some(self.top.start(state)),
            PolicyEvent::Accepted(e) => Some(
                self.top
                    .after_accept(state, |u| u.iter().position(|&x| state.key_cmp(x, e) == Ordering::Greater)),
            ),
            PolicyEvent::Rejected(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{GreedyFramework, PolicyKind};
    use crate::engine::{run_trial, ArrivalSchedule, ArrivalTime};
    use crate::matroid::{ElementId, GraphicMatroid, UniformMatroid, WeightAssignment};

    fn accepted_weights(kind: PolicyKind, k: usize, weights: &[u64], times: &[f64]) -> Vec<u64> {
        let m = UniformMatroid::new(weights.len(), k);
        let w = WeightAssignment::from_integers(weights.to_vec());
        let sched = ArrivalSchedule::from_f64(times);
        let mut alg = kind.build(&m, ArrivalTime::from_f64(0.3)).unwrap();
        let trace = run_trial(&m, &w, &sched, alg.as_mut()).unwrap();
        trace.events.iter().filter(|e| trace.accepted.contains(&e.element)).map(|e| e.weight).collect()
    }

    #[test]
    fn optimistic_hand_trace() {
        // Samples 9 and 7, then 8 and 10 arrive.
        let got = accepted_weights(PolicyKind::Optimistic, 2, &[9, 7, 8, 10], &[0.1, 0.2, 0.5, 0.6]);
        assert_eq!(got, vec![8, 10]);
    }

    #[test]
    fn pessimistic_hand_traces() {
        let got = accepted_weights(PolicyKind::Pessimistic, 2, &[9, 7, 8, 10], &[0.1, 0.2, 0.5, 0.6]);
        assert_eq!(got, vec![8, 10]);
        let got = accepted_weights(PolicyKind::Pessimistic, 2, &[9, 7, 10, 8], &[0.1, 0.2, 0.5, 0.6]);
        assert_eq!(got, vec![10, 8]);
    }

    #[test]
    fn policies_differ_on_which_sample_they_drop() {
        // Samples 9, 7; then 10 accepted. Optimistic drops 7 and keeps 9, so
        // a later 8 is rejected; pessimistic drops 9 and keeps 7, so 8 gets in.
        let w = [9, 7, 10, 8];
        let t = [0.1, 0.2, 0.5, 0.6];
        assert_eq!(accepted_weights(PolicyKind::Optimistic, 2, &w, &t), vec![10]);
        assert_eq!(accepted_weights(PolicyKind::Pessimistic, 2, &w, &t), vec![10, 8]);
    }

    #[test]
    fn large_capacity_accepts_every_late_element() {
        for kind in [PolicyKind::Optimistic, PolicyKind::Pessimistic, PolicyKind::Supergreedy] {
            let got = accepted_weights(kind, 6, &[5, 1, 4, 2, 3, 6], &[0.1, 0.4, 0.5, 0.2, 0.9, 0.7]);
            assert_eq!(got, vec![1, 4, 6, 3], "{kind}");
        }
    }

    #[test]
    fn dynkin_needs_one_uniform() {
        let m = UniformMatroid::new(4, 2);
        assert!(GreedyFramework::new(&m, ArrivalTime::inverse_e(), super::DynkinPolicy).is_err());
        let g = GraphicMatroid::complete(3);
        assert!(GreedyFramework::new(&g, ArrivalTime::inverse_e(), super::DynkinPolicy).is_err());
        assert!(PolicyKind::Optimistic.build(&g, ArrivalTime::inverse_e()).is_err());
    }

    #[test]
    fn dynkin_edge_cases() {
        // Nothing sampled: the first late element is taken.
        assert_eq!(accepted_weights(PolicyKind::Dynkin, 1, &[3, 8, 5], &[0.5, 0.6, 0.7]), vec![3]);
        // Maximum sampled: nothing is ever taken.
        assert!(accepted_weights(PolicyKind::Dynkin, 1, &[3, 8, 5], &[0.5, 0.1, 0.7]).is_empty());
    }

    #[test]
    fn supergreedy_memory_on_a_triangle() {
        let k3 = GraphicMatroid::complete(3);
        let w = WeightAssignment::from_integers(vec![3, 2, 1]);
        let sched = ArrivalSchedule::from_f64(&[0.1, 0.2, 0.9]);
        let mut alg = PolicyKind::Supergreedy.build(&k3, ArrivalTime::from_f64(0.5)).unwrap();
        let trace = run_trial(&k3, &w, &sched, alg.as_mut()).unwrap();
        assert_eq!(&**trace.horizon_memory.as_ref().unwrap(), &[ElementId(0), ElementId(1)]);
        assert!(trace.accepted.is_empty());
    }
}
