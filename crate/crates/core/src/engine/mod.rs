//! Random-order arrival model and the trial executor.
//!
//! [`run_trial`] feeds the arrivals of one [`ArrivalSchedule`] to a
//! [`SecretaryAlgorithm`] in time order and records everything it does in
//! a [`RunTrace`]. The engine owns feasibility: an algorithm that accepts
//! an element closing a circuit of the accepted set aborts the trial with
//! [`EngineError::AlgorithmFault`]. Nothing is ever silently rejected on
//! the algorithm's behalf.

mod schedule;
mod trace;

use std::sync::Arc;

use thiserror::Error;

use crate::matroid::{ElementId, Matroid, MatroidError, WeightAssignment};

pub use schedule::{
    draw_schedule, draw_schedule_with, splitmix64, ArrivalSchedule, ArrivalTime, Stream, TrialSeed,
};
pub use trace::{
    read_trace_jsonl, trace_metrics, write_trace_jsonl, EventDecision, RunTrace, Snapshot, TraceEvent,
    TraceLine, TrialRecord,
};

/// What an algorithm learns when an element arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrival {
    pub element: ElementId,
    /// Numerator over the instance's common weight denominator.
    pub weight: u64,
    pub time: ArrivalTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgorithmError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("framework invariant violated at {element}: {detail}")]
    Invariant { element: ElementId, detail: String },
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// An online algorithm for the secretary problem.
///
/// Implementations are built per trial from the matroid and their own
/// random stream; weights reach them only through [`Arrival`]s.
pub trait SecretaryAlgorithm {
    fn name(&self) -> &str;

    /// End of the sampling stage, if the algorithm has one.
    fn horizon(&self) -> Option<ArrivalTime> {
        None
    }

    /// Called once, right before the first arrival after the horizon (or at
    /// the end of the run if every arrival was sampled).
    fn on_horizon(&mut self) -> Result<(), AlgorithmError> {
        Ok(())
    }

    fn on_arrival(&mut self, arrival: Arrival) -> Result<Decision, AlgorithmError>;

    /// The stored independent set, for algorithms that keep one.
    fn memory(&self) -> Option<Snapshot> {
        None
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("algorithm accepted {element}, which closes a circuit with the accepted set")]
    AlgorithmFault { element: ElementId, trace: Box<RunTrace> },
    #[error("algorithm failed: {source}")]
    Algorithm {
        element: Option<ElementId>,
        source: AlgorithmError,
        trace: Box<RunTrace>,
    },
    #[error("invalid trial input: {0}")]
    Input(String),
}

impl EngineError {
    /// The trace recorded up to the failure, when there is one.
    pub fn trace(&self) -> Option<&RunTrace> {
        match self {
            EngineError::AlgorithmFault { trace, .. } | EngineError::Algorithm { trace, .. } => Some(trace),
            EngineError::Input(_) => None,
        }
    }
}

/// Runs one trial and returns its full trace.
pub fn run_trial(
    m: &dyn Matroid,
    w: &WeightAssignment,
    sched: &ArrivalSchedule,
    alg: &mut dyn SecretaryAlgorithm,
) -> Result<RunTrace, EngineError> {
    if w.len() < m.id_bound() || sched.len() < m.id_bound() {
        return Err(EngineError::Input(format!(
            "matroid has id bound {} but {} weights and {} arrival times were given",
            m.id_bound(),
            w.len(),
            sched.len()
        )));
    }
    let order = sched.order(&m.elements());
    let horizon = alg.horizon();
    let mut trace = RunTrace {
        algorithm: alg.name().to_string(),
        horizon,
        weight_denominator: w.denominator(),
        horizon_memory: None,
        events: Vec::with_capacity(order.len()),
        accepted: Arc::from(Vec::new()),
    };
    let mut feasibility = m.builder();
    let mut accepted: Vec<ElementId> = Vec::new();
    let mut accepted_snapshot: Snapshot = Arc::from(Vec::new());
    let mut horizon_done = horizon.is_none();

    let fail = |trace: &RunTrace, element: Option<ElementId>, source: AlgorithmError| EngineError::Algorithm {
        element,
        source,
        trace: Box::new(trace.clone()),
    };

    for e in order {
        let time = sched.time(e);
        if !horizon_done && horizon.is_some_and(|h| time > h) {
            alg.on_horizon().map_err(|err| fail(&trace, Some(e), err))?;
            trace.horizon_memory = alg.memory();
            horizon_done = true;
        }
        let arrival = Arrival { element: e, weight: w.get(e), time };
        let decision = alg.on_arrival(arrival).map_err(|err| fail(&trace, Some(e), err))?;
        let sampled = horizon.is_some_and(|h| time <= h);
        let recorded = match decision {
            Decision::Accept => {
                if !feasibility.try_insert(e) {
                    return Err(EngineError::AlgorithmFault { element: e, trace: Box::new(trace) });
                }
                let pos = accepted.partition_point(|&x| x < e);
                accepted.insert(pos, e);
                accepted_snapshot = Arc::from(accepted.as_slice());
                EventDecision::Accept
            }
            Decision::Reject if sampled => EventDecision::SampleReject,
            Decision::Reject => EventDecision::Reject,
        };
        trace.events.push(TraceEvent {
            time,
            element: e,
            weight: arrival.weight,
            decision: recorded,
            accepted: Arc::clone(&accepted_snapshot),
            memory: alg.memory(),
        });
    }
    if !horizon_done {
        alg.on_horizon().map_err(|err| fail(&trace, None, err))?;
        trace.horizon_memory = alg.memory();
    }
    trace.accepted = accepted_snapshot;
    Ok(trace)
}
