use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{ExperimentError, MeanEstimate, Proportion, SEED_DERIVATION};
use crate::engine::{draw_schedule, run_trial, write_trace_jsonl, ArrivalTime, TrialSeed};
use crate::greedy::{audit_trace_memory, MemoryAuditReport, PolicyKind};
use crate::hat::{build_hat, verify_structural_lemmas, LemmaKind, LemmaReport};
use crate::matroid::Matroid;

/// Traces dumped per `n` when a trace directory is given, on top of every
/// trial with a violation.
pub const TRACE_SAMPLE: u64 = 8;

/// Counterexample and check counts, summed over trials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HatAudits {
    pub observation: u64,
    pub double_blocker: u64,
    pub unprotected: u64,
    pub blocker: u64,
    pub blocker_checks: u64,
    pub unprotected_checks: u64,
    pub lemma_states: u64,
    pub memory_checked: u64,
    pub memory_violations: u64,
}

impl HatAudits {
    pub fn violations(&self) -> u64 {
        self.observation + self.double_blocker + self.unprotected + self.blocker + self.memory_violations
    }

    pub fn add_lemmas(&mut self, r: &LemmaReport) {
        self.observation += r.count(LemmaKind::Observation) as u64;
        self.double_blocker += r.count(LemmaKind::DoubleBlocker) as u64;
        self.unprotected += r.count(LemmaKind::Unprotected) as u64;
        self.blocker += r.count(LemmaKind::Blocker) as u64;
        self.blocker_checks += r.blocker_checks;
        self.unprotected_checks += r.unprotected_checks;
        self.lemma_states += r.states;
    }

    pub fn add_memory(&mut self, r: &MemoryAuditReport) {
        self.memory_checked += r.checked;
        self.memory_violations += r.violations.len() as u64;
    }

    pub fn merge(&mut self, o: &HatAudits) {
        self.observation += o.observation;
        self.double_blocker += o.double_blocker;
        self.unprotected += o.unprotected;
        self.blocker += o.blocker;
        self.blocker_checks += o.blocker_checks;
        self.unprotected_checks += o.unprotected_checks;
        self.lemma_states += o.lemma_states;
        self.memory_checked += o.memory_checked;
        self.memory_violations += o.memory_violations;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatRow {
    pub n: usize,
    pub trials: u64,
    /// Infinity edge not accepted.
    pub loss: Proportion,
    /// Trials where the infinity edge arrived after the horizon.
    pub late: u64,
    /// Loss rate among the `late` trials.
    pub conditioned_loss: Proportion,
    /// `w(A)/w(OPT)`.
    pub ratio: MeanEstimate,
    pub audits: HatAudits,
    pub traces_written: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatReport {
    pub alpha: (u64, u64),
    pub policy: String,
    pub seed: u64,
    pub seed_derivation: String,
    pub trials: u64,
    pub rows: Vec<HatRow>,
}

impl HatReport {
    /// Consecutive conditioned loss rates have disjoint 99% intervals, the
    /// later one higher.
    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].conditioned_loss.separated_below(&w[1].conditioned_loss))
    }

    pub fn violations(&self) -> u64 {
        self.rows.iter().map(|r| r.audits.violations()).sum()
    }
}

struct HatTrial {
    loss: bool,
    late: bool,
    ratio: f64,
    audits: HatAudits,
    wrote: bool,
}

/// Runs `policy` on the hat graph for each `n` in `ns`, `trials` times
/// each, auditing every trace. Trial `t` uses `TrialSeed::new(seed, t)`
/// for every `n`.
pub fn hat_failure_experiment(
    ns: &[usize],
    alpha: (u64, u64),
    policy: PolicyKind,
    trials: u64,
    seed: u64,
    trace_dir: Option<&Path>,
) -> Result<HatReport, ExperimentError> {
    if !policy.is_framework() {
        return Err(ExperimentError::Parameter(format!("{policy} is not a framework policy")));
    }
    if trials == 0 || ns.is_empty() {
        return Err(ExperimentError::Parameter("need at least one n and one trial".into()));
    }
    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir)?;
    }
    let horizon = ArrivalTime::inverse_e();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let (g, w, inst) = build_hat(n, alpha)?;
        let opt_total = w.total(&crate::matroid::max_weight_basis(&g, &w));
        policy.build(&g, horizon)?;
        let results: Vec<HatTrial> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = TrialSeed::new(seed, t);
                let sched = draw_schedule(g.id_bound(), seed);
                let mut alg = policy.build(&g, horizon)?;
                let trace = run_trial(&g, &w, &sched, alg.as_mut()).map_err(|e| ExperimentError::engine(t, e))?;
                let lemmas = verify_structural_lemmas(&trace, &inst);
                let mut audits = HatAudits::default();
                audits.add_lemmas(&lemmas);
                audits.add_memory(&audit_trace_memory(&g, &trace));
                let wrote = match trace_dir {
                    Some(dir) if t < TRACE_SAMPLE || audits.violations() > 0 => {
                        let file = File::create(dir.join(format!("hat-n{n}-trial{t}.jsonl")))?;
                        write_trace_jsonl(&trace, BufWriter::new(file))?;
                        true
                    }
                    _ => false,
                };
                Ok(HatTrial {
                    loss: lemmas.loss,
                    late: lemmas.infinity_late,
                    ratio: w.total(&trace.accepted) as f64 / opt_total as f64,
                    audits,
                    wrote,
                })
            })
            .collect::<Result<_, ExperimentError>>()?;
        let mut audits = HatAudits::default();
        for r in &results {
            audits.merge(&r.audits);
        }
        let losses = results.iter().filter(|r| r.loss).count() as u64;
        let late = results.iter().filter(|r| r.late).count() as u64;
        let late_losses = results.iter().filter(|r| r.late && r.loss).count() as u64;
        rows.push(HatRow {
            n,
            trials,
            loss: Proportion::new(losses, trials),
            late,
            conditioned_loss: Proportion::new(late_losses, late),
            ratio: MeanEstimate::from_values(results.iter().map(|r| r.ratio)),
            audits,
            traces_written: results.iter().filter(|r| r.wrote).count() as u64,
        });
    }
    Ok(HatReport {
        alpha,
        policy: policy.as_str().to_string(),
        seed,
        seed_derivation: SEED_DERIVATION.to_string(),
        trials,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_clean_and_dumps_traces() {
        let dir = std::env::temp_dir().join(format!("msplab-hat-{}", std::process::id()));
        let r = hat_failure_experiment(&[6, 10], (5, 1), PolicyKind::Supergreedy, 40, 1, Some(&dir)).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.violations(), 0);
        for row in &r.rows {
            assert_eq!(row.traces_written, TRACE_SAMPLE);
            assert!(row.audits.memory_checked > 0);
            assert!(row.conditioned_loss.trials == row.late);
            assert!(row.loss.hits >= row.conditioned_loss.hits);
        }
        let dumped = fs::read_dir(&dir).unwrap().count();
        assert_eq!(dumped as u64, 2 * TRACE_SAMPLE);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn virtual_is_rejected() {
        let err = hat_failure_experiment(&[6], (5, 1), PolicyKind::Virtual, 5, 0, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rows_are_reproducible() {
        let a = hat_failure_experiment(&[8], (5, 1), PolicyKind::Supergreedy, 60, 2, None).unwrap();
        let b = hat_failure_experiment(&[8], (5, 1), PolicyKind::Supergreedy, 60, 2, None).unwrap();
        assert_eq!(a, b);
    }
}
