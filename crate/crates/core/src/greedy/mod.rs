//! The greedy framework: sample until `T`, keep an independent memory
//! `I_t` with `A_t ⊆ I_t ⊆ A_t ∪ S` that spans everything seen, and accept
//! `e` iff it is in the max-weight basis of `I_t ∪ {e}` after contracting
//! the accepted set.
//!
//! The choice of `I_t` is delegated to a [`MemoryPolicy`]. Policies are
//! consulted once when the sampling stage closes and after every later
//! decision; `I_t` only matters at arrivals, so nothing in between is
//! observable.

mod audit;
mod direct;
mod policies;
mod virtual_alg;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AlgorithmError, Arrival, ArrivalTime, Decision, SecretaryAlgorithm, Snapshot};
use crate::matroid::{contract, in_greedy_basis, restrict, ElementId, IndependenceBuilder, Matroid, MatroidError};

pub use audit::{audit_trace_memory, MemoryAuditReport};
pub use direct::SupergreedyDirect;
pub use policies::{DynkinPolicy, OptimisticPolicy, PessimisticPolicy, SupergreedyPolicy};
pub use virtual_alg::VirtualAlgorithm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameworkError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("memory invariant violated: {0}")]
    Invariant(MemoryViolation),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

impl FrameworkError {
    fn into_algorithm_error(self, element: ElementId) -> AlgorithmError {
        match self {
            FrameworkError::Configuration(msg) => AlgorithmError::Configuration(msg),
            FrameworkError::Invariant(v) => AlgorithmError::Invariant { element, detail: v.to_string() },
            FrameworkError::Matroid(e) => AlgorithmError::Matroid(e),
        }
    }
}

/// Which memory property failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryViolation {
    /// An accepted element is missing from `I_t`.
    MissingAccepted(ElementId),
    /// `I_t` holds an element that is neither accepted nor a sample.
    Foreign(ElementId),
    Dependent,
    /// An arrived element outside the closure of `I_t`.
    NotSpanning(ElementId),
}

impl MemoryViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            MemoryViolation::MissingAccepted(_) | MemoryViolation::Foreign(_) => "containment",
            MemoryViolation::Dependent => "independence",
            MemoryViolation::NotSpanning(_) => "spanning",
        }
    }
}

impl fmt::Display for MemoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoryViolation::MissingAccepted(e) => write!(f, "containment: accepted {e} not in memory"),
            MemoryViolation::Foreign(e) => write!(f, "containment: {e} is neither accepted nor sampled"),
            MemoryViolation::Dependent => write!(f, "independence: memory contains a circuit"),
            MemoryViolation::NotSpanning(e) => write!(f, "spanning: arrived {e} is outside the closure"),
        }
    }
}

/// Checks `A ⊆ I ⊆ A ∪ S`, independence of `I`, and that `I` spans `arrived`.
/// Returns every violation found (empty means ok).
pub fn validate_memory(
    m: &dyn Matroid,
    memory: &[ElementId],
    accepted: &[ElementId],
    samples: &[ElementId],
    arrived: &[ElementId],
) -> Vec<MemoryViolation> {
    let bound = m.id_bound();
    let mark = |s: &[ElementId]| {
        let mut v = vec![false; bound];
        for e in s {
            v[e.index()] = true;
        }
        v
    };
    let (in_mem, in_acc, in_smp) = (mark(memory), mark(accepted), mark(samples));
    let mut out: Vec<MemoryViolation> = accepted
        .iter()
        .filter(|e| !in_mem[e.index()])
        .map(|&e| MemoryViolation::MissingAccepted(e))
        .collect();
    out.extend(
        memory
            .iter()
            .filter(|e| !in_acc[e.index()] && !in_smp[e.index()])
            .map(|&e| MemoryViolation::Foreign(e)),
    );
    let mut b = m.builder();
    if !memory.iter().all(|&e| b.try_insert(e)) {
        out.push(MemoryViolation::Dependent);
        return out;
    }
    for &e in arrived {
        if !in_mem[e.index()] && b.try_insert(e) {
            out.push(MemoryViolation::NotSpanning(e));
            break;
        }
    }
    out
}

/// Arrival status of one element as the framework sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pending,
    Sampled(u64),
    Accepted(u64),
    Rejected(u64),
}

impl Status {
    pub fn weight(self) -> Option<u64> {
        match self {
            Status::Pending => None,
            Status::Sampled(w) | Status::Accepted(w) | Status::Rejected(w) => Some(w),
        }
    }
}

/// Everything a policy may look at.
pub struct FrameworkState<'a> {
    pub matroid: &'a dyn Matroid,
    pub horizon: ArrivalTime,
    /// `S`, heaviest first.
    pub samples: &'a [ElementId],
    /// `A_t` in acceptance order.
    pub accepted: &'a [ElementId],
    /// `I_t`, in no particular order.
    pub memory: &'a [ElementId],
    pub status: &'a [Status],
    /// Builder already holding `A_t`, if the caller maintains one.
    pub accepted_forest: Option<&'a dyn IndependenceBuilder>,
}

impl<'a> FrameworkState<'a> {
    /// Weight of an arrived element.
    pub fn weight(&self, e: ElementId) -> u64 {
        self.status[e.index()].weight().expect("weight of an element that has not arrived")
    }

    /// Heavier first, ties by ascending id.
    pub fn key_cmp(&self, a: ElementId, b: ElementId) -> Ordering {
        self.weight(b).cmp(&self.weight(a)).then(a.cmp(&b))
    }

    /// A fresh builder with `A_t` already inserted, i.e. independence in
    /// `M / A_t`. `A_t` is independent whenever the invariants hold.
    pub fn accepted_builder(&self) -> Box<dyn IndependenceBuilder + 'a> {
        if let Some(forest) = self.accepted_forest {
            return forest.fork();
        }
        let mut b = self.matroid.builder();
        for &a in self.accepted {
            b.try_insert(a);
        }
        b
    }
}

/// Property (iii): `e` is accepted iff `t(e) > T` and `e` lies in the
/// max-weight basis of `(M \ A_t)|(I_t ∪ {e})`.
///
/// Checks `A_t ⊆ I_t ⊆ A_t ∪ S` and independence first. `e` must already
/// carry its weight in `state.status`.
pub fn framework_accept_rule(
    state: &FrameworkState<'_>,
    e: ElementId,
    time: ArrivalTime,
) -> Result<bool, FrameworkError> {
    if time <= state.horizon {
        return Ok(false);
    }
    check_memory(state)?;
    accept_rule_reference(state, e)
}

fn check_memory(state: &FrameworkState<'_>) -> Result<(), FrameworkError> {
    let mut accepted_in_memory = 0;
    for &x in state.memory {
        match state.status[x.index()] {
            Status::Accepted(_) => accepted_in_memory += 1,
            Status::Sampled(_) => {}
            _ => return Err(FrameworkError::Invariant(MemoryViolation::Foreign(x))),
        }
    }
    if accepted_in_memory != state.accepted.len() {
        let missing = state
            .accepted
            .iter()
            .copied()
            .find(|a| !state.memory.contains(a))
            .expect("count mismatch implies a missing element");
        return Err(FrameworkError::Invariant(MemoryViolation::MissingAccepted(missing)));
    }
    // A_t ⊆ I_t, so independence of I_t is that of I_t \ A_t in M / A_t.
    let (mut b, independent) = match state.accepted_forest {
        Some(forest) => (forest.fork(), true),
        None => {
            let mut b = state.matroid.builder();
            let ok = state.accepted.iter().all(|&a| b.try_insert(a));
            (b, ok)
        }
    };
    let free = state.memory.iter().filter(|x| matches!(state.status[x.index()], Status::Sampled(_)));
    if !independent || !free.copied().all(|x| b.try_insert(x)) {
        return Err(FrameworkError::Invariant(MemoryViolation::Dependent));
    }
    Ok(())
}

/// The rule through explicit minors: contract `A_t`, restrict to
/// `(I_t \ A_t) ∪ {e}`, run the greedy up to `e`.
fn accept_rule_reference(state: &FrameworkState<'_>, e: ElementId) -> Result<bool, FrameworkError> {
    let contracted = contract(state.matroid, state.accepted)?;
    let mut free: Vec<ElementId> = state
        .memory
        .iter()
        .copied()
        .filter(|x| !matches!(state.status[x.index()], Status::Accepted(_)))
        .collect();
    free.sort_unstable_by(|&a, &b| state.key_cmp(a, b));
    let split = free.partition_point(|&x| state.key_cmp(x, e) == Ordering::Less);
    let ordered = free[..split].iter().copied().chain(std::iter::once(e));
    let mut domain = free.clone();
    domain.push(e);
    let view = restrict(&contracted, &domain)?;
    Ok(in_greedy_basis(&view, ordered, e))
}

/// Events a policy is notified about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyEvent {
    /// The sampling stage just closed.
    Horizon,
    Accepted(ElementId),
    Rejected(ElementId),
}

/// Chooses the stored independent set `I_t`.
pub trait MemoryPolicy {
    fn name(&self) -> &'static str;

    /// Rejects matroids the policy is not defined for.
    fn configure(&mut self, _m: &dyn Matroid) -> Result<(), FrameworkError> {
        Ok(())
    }

    /// New `I_t`, or `None` to keep the current one.
    fn update(&mut self, state: &FrameworkState<'_>, event: PolicyEvent) -> Option<Vec<ElementId>>;
}

/// Algorithm 1 instantiated with a memory policy.
pub struct GreedyFramework<'m, P> {
    matroid: &'m dyn Matroid,
    horizon: ArrivalTime,
    policy: P,
    status: Vec<Status>,
    samples: Vec<ElementId>,
    accepted: Vec<ElementId>,
    memory: Vec<ElementId>,
    in_memory: Vec<bool>,
    /// Forest of `A_t`, grown on every acceptance.
    accepted_forest: Box<dyn IndependenceBuilder + 'm>,
    snapshot: Option<Snapshot>,
}

impl<'m, P: MemoryPolicy> GreedyFramework<'m, P> {
    pub fn new(matroid: &'m dyn Matroid, horizon: ArrivalTime, mut policy: P) -> Result<Self, FrameworkError> {
        policy.configure(matroid)?;
        Ok(GreedyFramework {
            matroid,
            horizon,
            policy,
            status: vec![Status::Pending; matroid.id_bound()],
            samples: Vec::new(),
            accepted: Vec::new(),
            memory: Vec::new(),
            in_memory: vec![false; matroid.id_bound()],
            accepted_forest: matroid.builder(),
            snapshot: None,
        })
    }

    pub fn state(&self) -> FrameworkState<'_> {
        FrameworkState {
            matroid: self.matroid,
            horizon: self.horizon,
            samples: &self.samples,
            accepted: &self.accepted,
            memory: &self.memory,
            status: &self.status,
            accepted_forest: Some(&*self.accepted_forest),
        }
    }

    fn key_cmp(&self, a: ElementId, b: ElementId) -> Ordering {
        let w = |e: ElementId| self.status[e.index()].weight().unwrap_or(0);
        w(b).cmp(&w(a)).then(a.cmp(&b))
    }

    /// Same decision as [`framework_accept_rule`] without materializing the
    /// minors: `I_t \ A_t` consists of samples, so walking the key-sorted
    /// samples that are in memory gives the greedy order directly.
    fn decide(&self, e: ElementId) -> bool {
        let mut b = self.accepted_forest.fork();
        for &s in &self.samples {
            if self.key_cmp(s, e) == Ordering::Greater {
                break;
            }
            if self.in_memory[s.index()] {
                b.try_insert(s);
            }
        }
        b.try_insert(e)
    }

    fn notify(&mut self, event: PolicyEvent) -> Result<(), FrameworkError> {
        let state = FrameworkState {
            matroid: self.matroid,
            horizon: self.horizon,
            samples: &self.samples,
            accepted: &self.accepted,
            memory: &self.memory,
            status: &self.status,
            accepted_forest: Some(&*self.accepted_forest),
        };
        if let Some(next) = self.policy.update(&state, event) {
            for &x in &self.memory {
                self.in_memory[x.index()] = false;
            }
            self.memory.clear();
            for x in next {
                if !std::mem::replace(&mut self.in_memory[x.index()], true) {
                    self.memory.push(x);
                }
            }
            check_memory(&self.state())?;
            let ids: Vec<ElementId> = (0..self.in_memory.len())
                .filter(|&i| self.in_memory[i])
                .map(ElementId::from)
                .collect();
            self.snapshot = Some(Arc::from(ids));
        } else if self.snapshot.is_none() {
            self.snapshot = Some(Arc::from(Vec::new()));
        }
        Ok(())
    }
}

impl<P: MemoryPolicy> SecretaryAlgorithm for GreedyFramework<'_, P> {
    fn name(&self) -> &str {
        self.policy.name()
    }

    fn horizon(&self) -> Option<ArrivalTime> {
        Some(self.horizon)
    }

    fn on_horizon(&mut self) -> Result<(), AlgorithmError> {
        self.notify(PolicyEvent::Horizon)
            .map_err(|e| e.into_algorithm_error(ElementId(u32::MAX)))
    }

    fn on_arrival(&mut self, arrival: Arrival) -> Result<Decision, AlgorithmError> {
        let e = arrival.element;
        if arrival.time <= self.horizon {
            self.status[e.index()] = Status::Sampled(arrival.weight);
            let pos = self
                .samples
                .partition_point(|&x| self.key_cmp(x, e) == Ordering::Less);
            self.samples.insert(pos, e);
            return Ok(Decision::Reject);
        }
        // Weight becomes visible on arrival; status is fixed after the decision.
        self.status[e.index()] = Status::Rejected(arrival.weight);
        let accept = self.decide(e);
        let event = if accept {
            self.status[e.index()] = Status::Accepted(arrival.weight);
            self.accepted.push(e);
            self.accepted_forest.try_insert(e);
            PolicyEvent::Accepted(e)
        } else {
            PolicyEvent::Rejected(e)
        };
        self.notify(event).map_err(|err| err.into_algorithm_error(e))?;
        Ok(if accept { Decision::Accept } else { Decision::Reject })
    }

    fn memory(&self) -> Option<Snapshot> {
        self.snapshot.clone()
    }
}

/// Policy names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Supergreedy,
    Dynkin,
    Optimistic,
    Pessimistic,
    /// Not a framework algorithm; reported separately.
    Virtual,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Supergreedy,
        PolicyKind::Dynkin,
        PolicyKind::Optimistic,
        PolicyKind::Pessimistic,
        PolicyKind::Virtual,
    ];

    pub fn is_framework(self) -> bool {
        self != PolicyKind::Virtual
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Supergreedy => "supergreedy",
            PolicyKind::Dynkin => "dynkin",
            PolicyKind::Optimistic => "optimistic",
            PolicyKind::Pessimistic => "pessimistic",
            PolicyKind::Virtual => "virtual",
        }
    }

    /// Builds the algorithm for one trial.
    pub fn build<'m>(
        self,
        m: &'m dyn Matroid,
        horizon: ArrivalTime,
    ) -> Result<Box<dyn SecretaryAlgorithm + 'm>, FrameworkError> {
        Ok(match self {
            PolicyKind::Supergreedy => Box::new(GreedyFramework::new(m, horizon, SupergreedyPolicy::default())?),
            PolicyKind::Dynkin => Box::new(GreedyFramework::new(m, horizon, DynkinPolicy)?),
            PolicyKind::Optimistic => Box::new(GreedyFramework::new(m, horizon, OptimisticPolicy::default())?),
            PolicyKind::Pessimistic => Box::new(GreedyFramework::new(m, horizon, PessimisticPolicy::default())?),
            PolicyKind::Virtual => Box::new(VirtualAlgorithm::new(m, horizon)?),
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = FrameworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| FrameworkError::Configuration(format!("unknown policy {s:?}")))
    }
}
