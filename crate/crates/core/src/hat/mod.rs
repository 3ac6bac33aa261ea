//! The hat graph: `n` triangles `{a, b, v_i}` sharing the edge `{a, b}`.
//!
//! Vertex ids are `a = 0`, `b = 1`, `v_i = i + 1`. Edge ids are
//! `∞ = {a, b} = 0`, `e_i = {a, v_i} = 2i - 1` (upper) and
//! `e'_i = {b, v_i} = 2i` (lower), so claw `i` (1-based, left to right)
//! owns ids `2i - 1` and `2i`. Weights satisfy
//! `w(e_1) > ... > w(e_n) > w(e'_1) > ... > w(e'_n)` with
//! `w(e_i) ∈ (1/(2α), 1/α)`, `w(e'_i) ∈ (1/(3α), 1/(2α))` and `w(∞) = n + 1`.

mod bounds;

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{ArrivalTime, EventDecision, RunTrace, Snapshot};
use crate::matroid::{ElementId, GraphicMatroid, WeightAssignment};

pub use bounds::{
    default_bound_params, empirical_lemma_checks, eval_failure_bounds, lemma_aa_bound, scan_failure_bounds,
    y_grid, BoundParams, BoundScan, LemmaAaReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HatError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("claws {first} and {second} are both blockers")]
    DoubleBlocker { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

/// Bookkeeping for one hat graph; the matroid and weights live separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HatInstance {
    pub n: usize,
    /// `α` as a reduced fraction.
    pub alpha: (u64, u64),
}

impl HatInstance {
    pub fn infinity(&self) -> ElementId {
        ElementId(0)
    }

    pub fn upper(&self, claw: usize) -> ElementId {
        debug_assert!((1..=self.n).contains(&claw));
        ElementId(2 * claw as u32 - 1)
    }

    pub fn lower(&self, claw: usize) -> ElementId {
        debug_assert!((1..=self.n).contains(&claw));
        ElementId(2 * claw as u32)
    }

    /// Claw number and side of an edge; `None` for the infinity edge.
    pub fn claw_of(&self, e: ElementId) -> Option<(usize, Side)> {
        match e.0 {
            0 => None,
            id if id as usize > 2 * self.n => None,
            id if id % 2 == 1 => Some((id.div_ceil(2) as usize, Side::Upper)),
            id => Some((id as usize / 2, Side::Lower)),
        }
    }

    pub fn edge_count(&self) -> usize {
        2 * self.n + 1
    }
}

/// Builds the hat with `n` claws and competitive target `α = num/den > 1`.
///
/// `w(e_i) = (1/α)(1/2 + (n-i+1)/(2n+2))` and
/// `w(e'_i) = (1/α)(1/3 + (n-i+1)/(6n+6))`, all over the common
/// denominator `6 num (n+1)`.
pub fn build_hat(n: usize, alpha: (u64, u64)) -> Result<(GraphicMatroid, WeightAssignment, HatInstance), HatError> {
    let (p, q) = alpha;
    if n == 0 {
        return Err(HatError::Parameter("a hat needs at least one claw".into()));
    }
    if q == 0 || p <= q {
        return Err(HatError::Parameter(format!("alpha must be a fraction greater than 1, got {p}/{q}")));
    }
    let g = p.gcd(&q);
    let (p, q) = (p / g, q / g);
    let n64 = n as u64;
    let overflow = || HatError::Parameter("hat weights overflow 64-bit numerators".into());
    let denominator = p
        .checked_mul(6)
        .and_then(|d| d.checked_mul(n64 + 1))
        .ok_or_else(overflow)?;
    let infinity = denominator.checked_mul(n64 + 1).ok_or_else(overflow)?;
    q.checked_mul(3 * (2 * n64 + 2)).ok_or_else(overflow)?;

    let mut edges = Vec::with_capacity(2 * n + 1);
    let mut numerators = Vec::with_capacity(2 * n + 1);
    edges.push((0, 1));
    numerators.push(infinity);
    for i in 1..=n64 {
        let v = (i + 1) as u32;
        edges.push((0, v));
        numerators.push(3 * q * (2 * n64 + 2 - i));
        edges.push((1, v));
        numerators.push(q * (3 * n64 + 3 - i));
    }
    let m = GraphicMatroid::new(n + 2, edges).map_err(|e| HatError::Parameter(e.to_string()))?;
    let w = WeightAssignment::new(numerators, denominator).map_err(|e| HatError::Parameter(e.to_string()))?;
    Ok((m, w, HatInstance { n, alpha: (p, q) }))
}

/// One half of a claw label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    /// Not accepted and not a sample held in memory.
    Absent,
    Accepted,
    /// Arrived before `T` and currently in `I_t`.
    Sample,
}

impl Mark {
    fn symbol(self) -> char {
        match self {
            Mark::Absent => '-',
            Mark::Accepted => 'A',
            Mark::Sample => 'S',
        }
    }
}

/// Label of one claw: `(upper, lower)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClawState {
    pub upper: Mark,
    pub lower: Mark,
}

impl ClawState {
    pub const EMPTY: ClawState = ClawState { upper: Mark::Absent, lower: Mark::Absent };

    pub fn new(upper: Mark, lower: Mark) -> Self {
        ClawState { upper, lower }
    }

    pub fn is_blocker(self) -> bool {
        self == ClawState::new(Mark::Sample, Mark::Accepted)
    }

    pub fn is_aa(self) -> bool {
        self == ClawState::new(Mark::Accepted, Mark::Accepted)
    }
}

impl fmt::Display for ClawState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{})", self.upper.symbol(), self.lower.symbol())
    }
}

/// Labels from explicit `A_t`, `I_t` and per-id arrival times.
pub fn claw_states(
    inst: &HatInstance,
    accepted: &[ElementId],
    memory: Option<&[ElementId]>,
    times: &[Option<ArrivalTime>],
    horizon: Option<ArrivalTime>,
) -> Vec<ClawState> {
    let mut out = vec![ClawState::EMPTY; inst.n];
    let mut set = |e: ElementId, mark: Mark| {
        if let Some((i, side)) = inst.claw_of(e) {
            let st = &mut out[i - 1];
            match side {
                Side::Upper => st.upper = mark,
                Side::Lower => st.lower = mark,
            }
        }
    };
    for &x in memory.unwrap_or(&[]) {
        let sampled = matches!((times.get(x.index()), horizon), (Some(Some(t)), Some(h)) if *t <= h);
        if sampled {
            set(x, Mark::Sample);
        }
    }
    for &a in accepted {
        set(a, Mark::Accepted);
    }
    out
}

/// `A_t` and `I_t` right before event `k` (`k == len` means after the last).
fn state_before(trace: &RunTrace, k: usize) -> (Snapshot, Option<Snapshot>) {
    if k < trace.events.len() {
        let a = if k == 0 { Arc::from(Vec::new()) } else { Arc::clone(&trace.events[k - 1].accepted) };
        return (a, trace.memory_before(k).cloned());
    }
    match trace.events.last() {
        None => (Arc::from(Vec::new()), trace.horizon_memory.clone()),
        Some(last) if trace.is_sample(last.time) => (Arc::clone(&last.accepted), trace.horizon_memory.clone()),
        Some(last) => (Arc::clone(&last.accepted), last.memory.clone()),
    }
}

/// Claw labels just before time `t`.
pub fn classify_claws(trace: &RunTrace, t: ArrivalTime, inst: &HatInstance) -> Vec<ClawState> {
    let k = trace.events_before(t);
    let (a, i) = state_before(trace, k);
    let times = trace.arrival_times(inst.edge_count());
    claw_states(inst, &a, i.as_deref(), &times, trace.horizon)
}

/// The unique `(SA)` claw, 1-based.
pub fn find_blocker(states: &[ClawState]) -> Result<Option<usize>, HatError> {
    let mut found = None;
    for (i, s) in states.iter().enumerate() {
        if s.is_blocker() {
            if let Some(first) = found {
                return Err(HatError::DoubleBlocker { first, second: i + 1 });
            }
            found = Some(i + 1);
        }
    }
    Ok(found)
}

/// The algorithm loses iff it never accepts the infinity edge.
pub fn is_loss(trace: &RunTrace, inst: &HatInstance) -> bool {
    trace.accepted.binary_search(&inst.infinity()).is_err()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaKind {
    /// Upper edge of a `(-A)` claw accepted iff no blocker to its left.
    Blocker,
    /// Lower edge of an `(S-)` claw rejected while a blocker exists.
    Unprotected,
    DoubleBlocker,
    /// Loss iff an `(AA)` claw exists before the infinity edge arrives.
    Observation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCounterexample {
    pub lemma: LemmaKind,
    /// Event index in the trace; `events.len()` for the final state.
    pub event: usize,
    pub claw: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub blocker_checks: u64,
    pub unprotected_checks: u64,
    /// Distinct post-horizon states whose labels were computed.
    pub states: u64,
    pub loss: bool,
    /// The infinity edge arrived after `T`.
    pub infinity_late: bool,
    /// An `(AA)` claw existed right before the infinity edge arrived.
    pub aa_before_infinity: bool,
    pub counterexamples: Vec<LemmaCounterexample>,
}

impl LemmaReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn count(&self, kind: LemmaKind) -> usize {
        self.counterexamples.iter().filter(|c| c.lemma == kind).count()
    }
}

struct Labels {
    states: Vec<ClawState>,
    blockers: Vec<usize>,
    aa: bool,
    infinity_held: bool,
}

/// Checks the blocker lemma, the unprotected lemma, blocker uniqueness and
/// the loss characterization on one framework trace.
///
/// The blocker lemma is only checked while no `(AA)` claw exists and the
/// infinity edge is in neither `A_t` nor `I_t`, which is the setting it is
/// stated for. The other checks run at every post-horizon event.
pub fn verify_structural_lemmas(trace: &RunTrace, inst: &HatInstance) -> LemmaReport {
    let times = trace.arrival_times(inst.edge_count());
    let mut report = LemmaReport { loss: is_loss(trace, inst), ..LemmaReport::default() };
    let inf_time = times[inst.infinity().index()];
    report.infinity_late = inf_time.is_some_and(|t| !trace.is_sample(t));

    let mut cached: Option<(Snapshot, Option<Snapshot>, Labels)> = None;
    let same = |x: &Option<Snapshot>, y: &Option<Snapshot>| match (x, y) {
        (Some(x), Some(y)) => Arc::ptr_eq(x, y),
        (None, None) => true,
        _ => false,
    };

    for k in 0..=trace.events.len() {
        let event = trace.events.get(k);
        if event.is_some_and(|ev| trace.is_sample(ev.time)) {
            continue;
        }
        let (a, i) = state_before(trace, k);
        let fresh = !cached.as_ref().is_some_and(|(a0, i0, _)| Arc::ptr_eq(a0, &a) && same(i0, &i));
        if fresh {
            let states = claw_states(inst, &a, i.as_deref(), &times, trace.horizon);
            let blockers: Vec<usize> = (1..=inst.n).filter(|&c| states[c - 1].is_blocker()).collect();
            let aa = states.iter().any(|s| s.is_aa());
            let inf = inst.infinity();
            let infinity_held =
                a.binary_search(&inf).is_ok() || i.as_ref().is_some_and(|i| i.binary_search(&inf).is_ok());
            report.states += 1;
            if blockers.len() > 1 {
                report.counterexamples.push(LemmaCounterexample {
                    lemma: LemmaKind::DoubleBlocker,
                    event: k,
                    claw: blockers[1],
                });
            }
            cached = Some((a, i, Labels { states, blockers, aa, infinity_held }));
        }
        let Some(ev) = event else { break };
        let labels = &cached.as_ref().expect("labels computed above").2;
        if ev.element == inst.infinity() {
            report.aa_before_infinity = labels.aa;
        }
        let accepted = ev.decision == EventDecision::Accept;
        match inst.claw_of(ev.element) {
            Some((c, Side::Upper))
                if labels.states[c - 1] == ClawState::new(Mark::Absent, Mark::Accepted)
                    && !labels.aa
                    && !labels.infinity_held =>
            {
                report.blocker_checks += 1;
                let unblocked = labels.blockers.iter().all(|&j| j > c);
                if accepted != unblocked {
                    report.counterexamples.push(LemmaCounterexample { lemma: LemmaKind::Blocker, event: k, claw: c });
                }
            }
            Some((c, Side::Lower))
                if labels.states[c - 1] == ClawState::new(Mark::Sample, Mark::Absent) && !labels.blockers.is_empty() =>
            {
                report.unprotected_checks += 1;
                if accepted {
                    report.counterexamples.push(LemmaCounterexample {
                        lemma: LemmaKind::Unprotected,
                        event: k,
                        claw: c,
                    });
                }
            }
            _ => {}
        }
    }

    let consistent = if report.infinity_late { report.loss == report.aa_before_infinity } else { report.loss };
    if !consistent {
        report.counterexamples.push(LemmaCounterexample {
            lemma: LemmaKind::Observation,
            event: trace.events.iter().position(|e| e.element == inst.infinity()).unwrap_or(trace.events.len()),
            claw: 0,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trial, ArrivalSchedule, TraceEvent};
    use crate::greedy::PolicyKind;
    use crate::matroid::{brute_force_mwb, max_weight_basis, Matroid};

    #[test]
    fn five_claws_at_alpha_two() {
        let (m, w, h) = build_hat(5, (2, 1)).unwrap();
        assert_eq!(m.ground_size(), 11);
        assert_eq!(w.as_f64(h.infinity()), 6.0);
        for i in 1..=5 {
            let (u, l) = (w.as_f64(h.upper(i)), w.as_f64(h.lower(i)));
            assert!(0.25 < u && u < 0.5, "upper {i}: {u}");
            assert!(1.0 / 6.0 < l && l < 0.25, "lower {i}: {l}");
            assert_eq!(m.endpoints(h.upper(i)), (0, i as u32 + 1));
            assert_eq!(m.endpoints(h.lower(i)), (1, i as u32 + 1));
        }
        let mut order: Vec<ElementId> = (1..=5).map(|i| h.upper(i)).chain((1..=5).map(|i| h.lower(i))).collect();
        let sorted = {
            let mut o = order.clone();
            w.sort_by_key(&mut o);
            o
        };
        order.insert(0, h.infinity());
        assert_eq!(sorted, order[1..]);
    }

    #[test]
    fn optimum_is_infinity_plus_uppers() {
        for n in 1..=6 {
            let (m, w, h) = build_hat(n, (3, 1)).unwrap();
            let mut want: Vec<ElementId> = std::iter::once(h.infinity()).chain((1..=n).map(|i| h.upper(i))).collect();
            want.sort_unstable();
            assert_eq!(brute_force_mwb(&m, &w).unwrap(), want);
            assert_eq!(max_weight_basis(&m, &w), want);
        }
    }

    #[test]
    fn uppers_alone_stay_below_the_target() {
        let n = 9;
        let (_, w, h) = build_hat(n, (5, 2)).unwrap();
        let all_but_infinity: Vec<_> = (1..=n).map(|i| h.upper(i)).collect();
        let got = w.total(&all_but_infinity) as f64 / w.denominator() as f64;
        assert!(got < (n as f64 + 1.0) / 2.5);
    }

    #[test]
    fn bad_parameters() {
        assert!(build_hat(3, (1, 1)).is_err());
        assert!(build_hat(3, (1, 2)).is_err());
        assert!(build_hat(0, (2, 1)).is_err());
        assert!(build_hat(3, (4, 0)).is_err());
    }

    #[test]
    fn claw_ids() {
        let h = HatInstance { n: 4, alpha: (2, 1) };
        assert_eq!(h.claw_of(ElementId(0)), None);
        assert_eq!(h.claw_of(ElementId(5)), Some((3, Side::Upper)));
        assert_eq!(h.claw_of(ElementId(6)), Some((3, Side::Lower)));
        assert_eq!(h.claw_of(ElementId(9)), None);
        assert_eq!(ClawState::new(Mark::Sample, Mark::Accepted).to_string(), "(SA)");
    }

    #[test]
    fn blockers() {
        let s = |u, l| ClawState::new(u, l);
        let mut states = vec![ClawState::EMPTY; 5];
        assert_eq!(find_blocker(&states), Ok(None));
        states[2] = s(Mark::Sample, Mark::Accepted);
        assert_eq!(find_blocker(&states), Ok(Some(3)));
        states[4] = s(Mark::Sample, Mark::Accepted);
        assert_eq!(find_blocker(&states), Err(HatError::DoubleBlocker { first: 3, second: 5 }));
    }

    fn hat_trace(n: usize, times: &[f64]) -> (RunTrace, HatInstance) {
        let (m, w, h) = build_hat(n, (2, 1)).unwrap();
        let sched = ArrivalSchedule::from_f64(times);
        let mut alg = PolicyKind::Supergreedy.build(&m, ArrivalTime::from_f64(0.3)).unwrap();
        (run_trial(&m, &w, &sched, alg.as_mut()).unwrap(), h)
    }

    #[test]
    fn labels_before_and_during_a_run() {
        // ids: ∞, e1, e1', e2, e2', e3, e3'
        let (trace, h) = hat_trace(3, &[0.9, 0.1, 0.5, 0.6, 0.7, 0.2, 0.8]);
        assert!(classify_claws(&trace, ArrivalTime::ZERO, &h).iter().all(|s| *s == ClawState::EMPTY));
        // Just after T: e1 and e3 sampled and both in the max-weight basis.
        let st = classify_claws(&trace, ArrivalTime::from_f64(0.4), &h);
        assert_eq!(st[0], ClawState::new(Mark::Sample, Mark::Absent));
        assert_eq!(st[2], ClawState::new(Mark::Sample, Mark::Absent));
    }

    #[test]
    fn infinity_in_the_sample_is_a_loss() {
        let (trace, h) = hat_trace(2, &[0.1, 0.5, 0.6, 0.7, 0.8]);
        assert!(is_loss(&trace, &h));
        let report = verify_structural_lemmas(&trace, &h);
        assert!(!report.infinity_late);
        assert!(report.is_clean(), "{report:?}");
    }

    #[test]
    fn aa_claw_before_infinity_loses() {
        // e1' then e1 arrive late with nothing to block: (AA), then ∞ is refused.
        let (trace, h) = hat_trace(2, &[0.9, 0.6, 0.5, 0.1, 0.2]);
        assert!(is_loss(&trace, &h));
        let report = verify_structural_lemmas(&trace, &h);
        assert!(report.infinity_late && report.aa_before_infinity);
        assert_eq!(report.blocker_checks, 1);
        assert!(report.is_clean(), "{report:?}");
    }

    #[test]
    fn no_down_accept_claws_means_no_blocker_checks() {
        let (trace, h) = hat_trace(2, &[0.5, 0.1, 0.2, 0.15, 0.25]);
        let report = verify_structural_lemmas(&trace, &h);
        assert_eq!(report.blocker_checks, 0);
        assert!(!report.loss);
    }

    #[test]
    fn hand_built_violation_is_reported() {
        // n = 2, T = 0.3. e1' makes claw 1 a blocker; e2' then arrives
        // under (S-) claw 2 and is wrongly accepted, leaving two blockers.
        let h = HatInstance { n: 2, alpha: (2, 1) };
        let snap = |ids: &[u32]| -> Snapshot { ids.iter().map(|&i| ElementId(i)).collect::<Vec<_>>().into() };
        let ev = |t: f64, e: u32, d, a: &[u32], i: Option<&[u32]>| TraceEvent {
            time: ArrivalTime::from_f64(t),
            element: ElementId(e),
            weight: 1,
            decision: d,
            accepted: snap(a),
            memory: i.map(snap),
        };
        let trace = RunTrace {
            algorithm: "fixture".into(),
            horizon: Some(ArrivalTime::from_f64(0.3)),
            weight_denominator: 1,
            horizon_memory: Some(snap(&[0, 1, 3])),
            events: vec![
                ev(0.05, 0, EventDecision::SampleReject, &[], None),
                ev(0.1, 1, EventDecision::SampleReject, &[], None),
                ev(0.2, 3, EventDecision::SampleReject, &[], None),
                ev(0.4, 2, EventDecision::Accept, &[2], Some(&[0, 1, 2, 3])),
                ev(0.5, 4, EventDecision::Accept, &[2, 4], Some(&[0, 1, 2, 3, 4])),
            ],
            accepted: snap(&[2, 4]),
        };
        let report = verify_structural_lemmas(&trace, &h);
        assert_eq!(
            report.counterexamples,
            vec![
                LemmaCounterexample { lemma: LemmaKind::Unprotected, event: 4, claw: 2 },
                LemmaCounterexample { lemma: LemmaKind::DoubleBlocker, event: 5, claw: 2 },
            ]
        );
    }
}
