use std::borrow::Cow;
use std::fs;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::hat_exp::HatAudits;
use super::{
    ExperimentConfig, ExperimentError, InstanceSpec, MeanEstimate, Proportion, SEED_DERIVATION,
};
use crate::engine::{
    run_trial, draw_schedule, Arrival, ArrivalTime, Decision, RunTrace, SecretaryAlgorithm, Stream, TrialRecord,
    TrialSeed,
};
use crate::greedy::{audit_trace_memory, PolicyKind};
use crate::hat::{build_hat, verify_structural_lemmas, HatInstance};
use crate::matroid::{
    max_weight_basis, parse_graph, parse_weights, ElementId, GraphicMatroid, Matroid, UniformMatroid,
    WeightAssignment,
};
use crate::partition::{korula_pal_partition, plant_broom, BroomInstance, PartitionDynkin};

/// Algorithms the estimators can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmSpec {
    Policy(PolicyKind),
    /// Per-part Dynkin on a fresh Korula–Pal partition of `K_n`.
    KorulaPal,
    /// Accepts exactly the max-weight basis; knows all weights up front.
    Offline,
}

impl AlgorithmSpec {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmSpec::Policy(p) => p.as_str(),
            AlgorithmSpec::KorulaPal => "korula-pal",
            AlgorithmSpec::Offline => "offline",
        }
    }
}

impl FromStr for AlgorithmSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "korula-pal" => Ok(AlgorithmSpec::KorulaPal),
            "offline" => Ok(AlgorithmSpec::Offline),
            _ => s.parse::<PolicyKind>().map(AlgorithmSpec::Policy).map_err(|_| {
                ExperimentError::Parameter(format!(
                    "unknown algorithm {s:?} (expected supergreedy, dynkin, optimistic, pessimistic, virtual, korula-pal or offline)"
                ))
            }),
        }
    }
}

/// Offline baseline: accepts an element iff it is in the max-weight basis.
#[derive(Debug, Clone)]
pub struct OfflineGreedy {
    keep: Vec<bool>,
}

impl OfflineGreedy {
    pub fn new(m: &dyn Matroid, w: &WeightAssignment) -> Self {
        let mut keep = vec![false; m.id_bound()];
        for e in max_weight_basis(m, w) {
            keep[e.index()] = true;
        }
        OfflineGreedy { keep }
    }
}

impl SecretaryAlgorithm for OfflineGreedy {
    fn name(&self) -> &str {
        "offline"
    }

    fn on_arrival(&mut self, a: Arrival) -> Result<Decision, crate::engine::AlgorithmError> {
        Ok(if self.keep[a.element.index()] { Decision::Accept } else { Decision::Reject })
    }
}

pub enum InstanceWeights {
    Fixed(WeightAssignment),
    /// A fresh uniformly random permutation of `1..=m` per trial.
    RandomDistinct,
    /// A fresh broom per trial.
    Broom,
}

/// A loaded instance spec.
pub struct Instance {
    pub spec: InstanceSpec,
    pub matroid: Box<dyn Matroid>,
    pub weights: InstanceWeights,
    pub hat: Option<HatInstance>,
    /// `n` when the matroid is `K_n` with edges in the standard order.
    pub complete_n: Option<usize>,
}

impl Instance {
    pub fn load(spec: &InstanceSpec, weights: Option<&str>) -> Result<Self, ExperimentError> {
        let no_weights = |what: &str| match weights {
            None => Ok(()),
            Some(_) => Err(ExperimentError::Parameter(format!("{what} instances carry their own weights"))),
        };
        let (matroid, fixed, hat, complete_n): (Box<dyn Matroid>, Option<WeightAssignment>, _, _) = match spec {
            InstanceSpec::Uniform { k, n } => {
                if *n == 0 || k > n {
                    return Err(ExperimentError::Parameter(format!("uniform:{k}:{n} needs 1 <= n and k <= n")));
                }
                (Box::new(UniformMatroid::new(*n, *k)), None, None, None)
            }
            InstanceSpec::Graphic { path } => {
                let g = parse_graph(&fs::read_to_string(path)?)?;
                let complete = GraphicMatroid::complete(g.vertex_count());
                let n = (g.edges() == complete.edges()).then_some(g.vertex_count());
                (Box::new(g), None, None, n)
            }
            InstanceSpec::Complete { n } => {
                if *n < 2 {
                    return Err(ExperimentError::Parameter(format!("complete:{n} needs n >= 2")));
                }
                (Box::new(GraphicMatroid::complete(*n)), None, None, Some(*n))
            }
            InstanceSpec::Hat { n, alpha } => {
                no_weights("hat")?;
                let (g, w, inst) = build_hat(*n, *alpha)?;
                (Box::new(g), Some(w), Some(inst), None)
            }
            InstanceSpec::Broom { n } => {
                no_weights("broom")?;
                if *n < 4 || n % 2 != 0 {
                    return Err(ExperimentError::Parameter(format!("broom:{n} needs an even n >= 4")));
                }
                (Box::new(GraphicMatroid::complete(*n)), None, None, Some(*n))
            }
        };
        let weights = match (fixed, spec, weights) {
            (Some(w), _, _) => InstanceWeights::Fixed(w),
            (None, InstanceSpec::Broom { .. }, _) => InstanceWeights::Broom,
            (None, _, None | Some("random")) => InstanceWeights::RandomDistinct,
            (None, _, Some("descending")) => {
                let m = matroid.id_bound() as u64;
                InstanceWeights::Fixed(WeightAssignment::from_integers((0..m).map(|i| m - i).collect()))
            }
            (None, _, Some(other)) => match other.strip_prefix("file:") {
                Some(path) => {
                    let w = parse_weights(&fs::read_to_string(path)?)?;
                    if w.len() != matroid.id_bound() {
                        return Err(ExperimentError::Parameter(format!(
                            "{path} has {} weights, the instance has {} elements",
                            w.len(),
                            matroid.id_bound()
                        )));
                    }
                    InstanceWeights::Fixed(w)
                }
                None => {
                    return Err(ExperimentError::Parameter(format!(
                        "unknown weights {other:?} (expected random, descending or file:PATH)"
                    )))
                }
            },
        };
        Ok(Instance { spec: spec.clone(), matroid, weights, hat, complete_n })
    }

    /// Weights of trial `seed`, plus the broom when one was planted.
    pub fn weights_for(&self, seed: TrialSeed) -> Result<(Cow<'_, WeightAssignment>, Option<BroomInstance>), ExperimentError> {
        match &self.weights {
            InstanceWeights::Fixed(w) => Ok((Cow::Borrowed(w), None)),
            InstanceWeights::RandomDistinct => {
                let m = self.matroid.id_bound() as u64;
                let mut values: Vec<u64> = (1..=m).collect();
                values.shuffle(&mut seed.rng(Stream::Instance));
                Ok((Cow::Owned(WeightAssignment::from_integers(values)), None))
            }
            InstanceWeights::Broom => {
                let n = self.complete_n.expect("broom instances are complete graphs");
                let (w, broom) = plant_broom(n, &mut seed.rng(Stream::Instance))?;
                Ok((Cow::Owned(w), Some(broom)))
            }
        }
    }

    fn weight_denominator(&self) -> u64 {
        match &self.weights {
            InstanceWeights::Fixed(w) => w.denominator(),
            _ => 1,
        }
    }
}

fn build_algorithm<'m>(
    spec: AlgorithmSpec,
    inst: &'m Instance,
    w: &WeightAssignment,
    seed: TrialSeed,
) -> Result<Box<dyn SecretaryAlgorithm + 'm>, ExperimentError> {
    Ok(match spec {
        AlgorithmSpec::Policy(p) => p.build(&*inst.matroid, ArrivalTime::inverse_e())?,
        AlgorithmSpec::KorulaPal => {
            let n = inst.complete_n.ok_or_else(|| {
                ExperimentError::Parameter("korula-pal needs a complete graph (complete:n, broom:n or a K_n file)".into())
            })?;
            let p = korula_pal_partition(n, &mut seed.rng(Stream::Algorithm))?;
            Box::new(PartitionDynkin::named(&p, "korula-pal"))
        }
        AlgorithmSpec::Offline => Box::new(OfflineGreedy::new(&*inst.matroid, w)),
    })
}

/// Acceptance frequency of one optimum element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementProbability {
    /// Position among the positive-weight optimum elements, heaviest first.
    pub rank: usize,
    /// Element id, when the optimum is the same in every trial.
    pub id: Option<u32>,
    pub hits: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ElementProbability {
    pub fn new(rank: usize, id: Option<u32>, hits: u64, trials: u64) -> Self {
        let Proportion { p, lo, hi, .. } = Proportion::new(hits, trials);
        ElementProbability { rank, id, hits, p, lo, hi }
    }

    /// Lowest `p`, earliest rank on ties.
    pub fn min_of(all: &[ElementProbability]) -> Option<ElementProbability> {
        all.iter().copied().min_by(|a, b| a.p.total_cmp(&b.p).then(a.rank.cmp(&b.rank)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EstimateAudits {
    /// Memory snapshots validated (framework algorithms only).
    pub memory_checked: u64,
    pub memory_violations: u64,
    /// Structural checks, for framework algorithms on hat instances.
    pub hat: Option<HatAudits>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub config: ExperimentConfig,
    pub algorithm: String,
    pub seed_derivation: String,
    pub trials: u64,
    /// Mean of `w(A)/w(OPT)`.
    pub mean: f64,
    pub ci99: [f64; 2],
    pub ratio: MeanEstimate,
    /// Over the positive-weight optimum elements.
    pub per_element: Vec<ElementProbability>,
    pub min_probability: Option<ElementProbability>,
    pub audits: EstimateAudits,
}

pub struct EstimateRun {
    pub report: EstimateReport,
    /// Indicators follow `report.per_element` order.
    pub records: Vec<TrialRecord>,
    /// Utilities in `records` are numerators over this.
    pub weight_denominator: u64,
}

struct Prepared {
    instance: Instance,
    algorithm: AlgorithmSpec,
    /// Positive-weight optimum, heaviest first, when weights are fixed.
    fixed_opt: Option<(Vec<ElementId>, u128)>,
}

pub struct SimulatedTrial {
    pub trace: RunTrace,
    pub record: TrialRecord,
    pub weights: WeightAssignment,
    pub broom: Option<BroomInstance>,
}

struct TrialResult {
    record: TrialRecord,
    memory: Option<(u64, u64)>,
    hat: Option<HatAudits>,
}

fn ranked_opt(m: &dyn Matroid, w: &WeightAssignment) -> (Vec<ElementId>, u128) {
    let mut opt = max_weight_basis(m, w);
    let total = w.total(&opt);
    opt.retain(|&e| w.get(e) > 0);
    w.sort_by_key(&mut opt);
    (opt, total)
}

impl Prepared {
    fn new(cfg: &ExperimentConfig) -> Result<Self, ExperimentError> {
        let spec: InstanceSpec = cfg.instance.parse()?;
        let instance = Instance::load(&spec, cfg.weights.as_deref())?;
        let algorithm: AlgorithmSpec = cfg.algorithm.parse()?;
        let fixed_opt = match &instance.weights {
            InstanceWeights::Fixed(w) => {
                let (opt, total) = ranked_opt(&*instance.matroid, w);
                if total == 0 {
                    return Err(ExperimentError::Degenerate("w(OPT) = 0".into()));
                }
                Some((opt, total))
            }
            _ => None,
        };
        let prepared = Prepared { instance, algorithm, fixed_opt };
        // Surface configuration errors before any trial runs.
        let (w, _) = prepared.instance.weights_for(TrialSeed::new(cfg.seed, 0))?;
        build_algorithm(algorithm, &prepared.instance, &w, TrialSeed::new(cfg.seed, 0))?;
        Ok(prepared)
    }

    fn run(&self, seed: TrialSeed) -> Result<(TrialResult, SimulatedTrial), ExperimentError> {
        let trial = seed.trial_index;
        let m = &*self.instance.matroid;
        let (w, broom) = self.instance.weights_for(seed)?;
        let (opt, opt_total) = match &self.fixed_opt {
            Some((opt, total)) => (Cow::Borrowed(opt), *total),
            None => {
                let (opt, total) = ranked_opt(m, &w);
                if total == 0 {
                    return Err(ExperimentError::Degenerate(format!("w(OPT) = 0 in trial {trial}")));
                }
                (Cow::Owned(opt), total)
            }
        };
        let mut alg = build_algorithm(self.algorithm, &self.instance, &w, seed)?;
        let sched = draw_schedule(m.id_bound(), seed);
        let trace = run_trial(m, &w, &sched, alg.as_mut()).map_err(|e| ExperimentError::engine(trial, e))?;
        let utility = w.total(&trace.accepted);
        let record = TrialRecord {
            trial_seed: seed.derived(),
            utility,
            opt_utility: opt_total,
            ratio: utility as f64 / opt_total as f64,
            indicators: opt.iter().map(|e| trace.accepted.binary_search(e).is_ok()).collect(),
        };
        let framework = matches!(self.algorithm, AlgorithmSpec::Policy(p) if p.is_framework());
        let memory = framework.then(|| {
            let audit = audit_trace_memory(m, &trace);
            (audit.checked, audit.violations.len() as u64)
        });
        let hat = match (&self.instance.hat, framework) {
            (Some(inst), true) => {
                let mut audits = HatAudits::default();
                audits.add_lemmas(&verify_structural_lemmas(&trace, inst));
                Some(audits)
            }
            _ => None,
        };
        let weights = w.into_owned();
        Ok((TrialResult { record: record.clone(), memory, hat }, SimulatedTrial { trace, record, weights, broom }))
    }
}

/// Runs `cfg.trials` trials and aggregates both competitiveness notions.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<EstimateRun, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::Parameter("trials must be positive".into()));
    }
    let prepared = Prepared::new(cfg)?;
    let results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| prepared.run(TrialSeed::new(cfg.seed, t)).map(|(r, _)| r))
        .collect::<Result<_, _>>()?;

    let ratio = MeanEstimate::from_values(results.iter().map(|r| r.record.ratio));
    let width = results.iter().map(|r| r.record.indicators.len()).max().unwrap_or(0);
    let mut hits = vec![0u64; width];
    let mut audits = EstimateAudits::default();
    for r in &results {
        for (h, &i) in hits.iter_mut().zip(&r.record.indicators) {
            *h += u64::from(i);
        }
        if let Some((checked, bad)) = r.memory {
            audits.memory_checked += checked;
            audits.memory_violations += bad;
        }
        if let Some(h) = &r.hat {
            audits.hat.get_or_insert_with(HatAudits::default).merge(h);
        }
    }
    let ids = prepared.fixed_opt.as_ref().map(|(opt, _)| opt);
    let per_element: Vec<ElementProbability> = hits
        .iter()
        .enumerate()
        .map(|(rank, &h)| ElementProbability::new(rank, ids.map(|o| o[rank].0), h, cfg.trials))
        .collect();
    let report = EstimateReport {
        config: cfg.clone(),
        algorithm: prepared.algorithm.name().to_string(),
        seed_derivation: SEED_DERIVATION.to_string(),
        trials: cfg.trials,
        mean: ratio.mean,
        ci99: ratio.ci99(),
        ratio,
        min_probability: ElementProbability::min_of(&per_element),
        per_element,
        audits,
    };
    Ok(EstimateRun {
        report,
        records: results.into_iter().map(|r| r.record).collect(),
        weight_denominator: prepared.instance.weight_denominator(),
    })
}

/// `E[w(A)] / w(OPT)` with its interval; see [`run_estimate`].
pub fn estimate_utility_competitiveness(cfg: &ExperimentConfig) -> Result<EstimateReport, ExperimentError> {
    run_estimate(cfg).map(|r| r.report)
}

/// Per-element acceptance frequencies over the optimum; the headline is
/// `min_probability`. Same run as [`estimate_utility_competitiveness`].
pub fn estimate_probability_competitiveness(cfg: &ExperimentConfig) -> Result<EstimateReport, ExperimentError> {
    run_estimate(cfg).map(|r| r.report)
}

/// Trial `trial` of `cfg`, with its full trace.
pub fn simulate_trial(cfg: &ExperimentConfig, trial: u64) -> Result<SimulatedTrial, ExperimentError> {
    Prepared::new(cfg)?.run(TrialSeed::new(cfg.seed, trial)).map(|(_, s)| s)
}
