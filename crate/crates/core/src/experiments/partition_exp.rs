use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{ElementProbability, ExperimentError, MeanEstimate, Proportion, SEED_DERIVATION};
use crate::engine::{draw_schedule, Stream, TrialSeed};
use crate::matroid::ElementId;
use crate::partition::{
    deterministic_adversary_weights, edge_degree, find_shattered_triangle, plant_broom, run_partition_dynkin,
    DistributionKind, EdgePartition, PartitionDistribution, PartitionError,
};

/// Sampled partitions are checked with the cubic triangle test on this
/// many leading trials. Every trial still checks that the accepted set is
/// a forest, which is what an invalid partition would break.
pub const VALIDATED_TRIALS: u64 = 16;

fn distribution_fault(trial: u64, e: PartitionError) -> ExperimentError {
    match e {
        PartitionError::ValidityBreach { accepted } => ExperimentError::DistributionFault {
            trial,
            message: format!("accepted set {:?} contains a cycle", accepted.iter().map(|e| e.0).collect::<Vec<_>>()),
        },
        PartitionError::Internal(message) => ExperimentError::DistributionFault { trial, message },
        other => other.into(),
    }
}

fn check_triangles(p: &EdgePartition, trial: u64) -> Result<(), ExperimentError> {
    match find_shattered_triangle(p) {
        Some([a, b, c]) => Err(ExperimentError::DistributionFault {
            trial,
            message: format!("triangle {a}-{b}-{c} has its edges in three different parts"),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroomReport {
    pub n: usize,
    pub distribution: String,
    pub trials: u64,
    pub seed: u64,
    pub seed_derivation: String,
    /// Legs accepted over `n - 2`, the optimum.
    pub ratio: MeanEstimate,
    /// Acceptance frequency per leg slot.
    pub legs: Vec<Proportion>,
    pub min_leg_slot: usize,
    pub min_leg: Proportion,
    /// `n^{1/8}`.
    pub degree_threshold: f64,
    /// `deg(handle)` histogram.
    pub handle_degrees: BTreeMap<u32, u64>,
    /// Trials with `deg(handle) ≥ degree_threshold`.
    pub high_degree: Proportion,
    pub validated_partitions: u64,
}

struct BroomTrial {
    legs: Vec<bool>,
    degree: u32,
}

/// Fresh partition, broom and schedule every trial, all from trial `t`'s
/// seed.
pub fn broom_attack_experiment(
    n: usize,
    distribution: DistributionKind,
    trials: u64,
    seed: u64,
) -> Result<BroomReport, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Parameter("trials must be positive".into()));
    }
    if n < 4 || n % 2 != 0 {
        return Err(ExperimentError::Parameter(format!("the broom needs an even n >= 4, got {n}")));
    }
    let results: Vec<BroomTrial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = TrialSeed::new(seed, t);
            let mut rng = seed.rng(Stream::Instance);
            let p = distribution.sample(n, &mut rng)?;
            if t < VALIDATED_TRIALS {
                check_triangles(&p, t)?;
            }
            let (w, broom) = plant_broom(n, &mut rng)?;
            let sched = draw_schedule(p.edge_count(), seed);
            let accepted = run_partition_dynkin(&p, &w, &sched).map_err(|e| distribution_fault(t, e))?;
            Ok(BroomTrial {
                legs: broom.legs.iter().map(|e| accepted.binary_search(e).is_ok()).collect(),
                degree: edge_degree(&p, broom.handle_edge),
            })
        })
        .collect::<Result<_, ExperimentError>>()?;

    let slots = n - 2;
    let mut hits = vec![0u64; slots];
    let mut handle_degrees = BTreeMap::new();
    let threshold = (n as f64).powf(0.125);
    let mut high = 0;
    for r in &results {
        for (h, &l) in hits.iter_mut().zip(&r.legs) {
            *h += u64::from(l);
        }
        *handle_degrees.entry(r.degree).or_insert(0) += 1;
        high += u64::from(f64::from(r.degree) >= threshold);
    }
    let legs: Vec<Proportion> = hits.iter().map(|&h| Proportion::new(h, trials)).collect();
    let (min_leg_slot, min_leg) = legs
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.p.total_cmp(&b.1.p).then(a.0.cmp(&b.0)))
        .expect("n >= 4 gives at least two legs");
    Ok(BroomReport {
        n,
        distribution: distribution.to_string(),
        trials,
        seed,
        seed_derivation: SEED_DERIVATION.to_string(),
        ratio: MeanEstimate::from_values(
            results.iter().map(|r| r.legs.iter().filter(|&&l| l).count() as f64 / slots as f64),
        ),
        legs,
        min_leg_slot,
        min_leg,
        degree_threshold: threshold,
        handle_degrees,
        high_degree: Proportion::new(high, trials),
        validated_partitions: trials.min(VALIDATED_TRIALS),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub n: usize,
    pub distribution: String,
    pub trials: u64,
    pub seed: u64,
    pub seed_derivation: String,
    /// Part holding the weight.
    pub part: u32,
    pub forest: Vec<ElementId>,
    /// Over the forest edges, which form the positive-weight optimum.
    pub per_element: Vec<ElementProbability>,
    pub min: ElementProbability,
    /// `2√2/√n`.
    pub threshold: f64,
    /// `min.hi ≤ threshold`.
    pub passed: bool,
    pub ratio: MeanEstimate,
}

/// Fixes one partition drawn from trial 0's instance stream, puts the
/// adversary weights on it and reruns only the arrival order.
pub fn deterministic_attack_experiment(
    n: usize,
    distribution: DistributionKind,
    trials: u64,
    seed: u64,
) -> Result<AttackReport, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Parameter("trials must be positive".into()));
    }
    let p = distribution.sample(n, &mut TrialSeed::new(seed, 0).rng(Stream::Instance))?;
    check_triangles(&p, 0)?;
    let adv = deterministic_adversary_weights(&p).map_err(|e| distribution_fault(0, e))?;
    let forest = adv.forest;
    let results: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sched = draw_schedule(p.edge_count(), TrialSeed::new(seed, t));
            let accepted = run_partition_dynkin(&p, &adv.weights, &sched).map_err(|e| distribution_fault(t, e))?;
            Ok(forest.iter().map(|e| accepted.binary_search(e).is_ok()).collect())
        })
        .collect::<Result<_, ExperimentError>>()?;
    let mut hits = vec![0u64; forest.len()];
    for r in &results {
        for (h, &a) in hits.iter_mut().zip(r) {
            *h += u64::from(a);
        }
    }
    let per_element: Vec<ElementProbability> = hits
        .iter()
        .zip(&forest)
        .enumerate()
        .map(|(rank, (&h, e))| ElementProbability::new(rank, Some(e.0), h, trials))
        .collect();
    let min = ElementProbability::min_of(&per_element).expect("the forest is nonempty");
    let threshold = 2.0 * 2f64.sqrt() / (n as f64).sqrt();
    Ok(AttackReport {
        n,
        distribution: distribution.to_string(),
        trials,
        seed,
        seed_derivation: SEED_DERIVATION.to_string(),
        part: adv.part,
        ratio: MeanEstimate::from_values(
            results.iter().map(|r| r.iter().filter(|&&a| a).count() as f64 / forest.len() as f64),
        ),
        forest,
        per_element,
        min,
        threshold,
        passed: min.hi <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_part_broom_is_one_dynkin() {
        let r = broom_attack_experiment(8, DistributionKind::SinglePart, 2000, 4).unwrap();
        // Every edge has degree 2(n-1)-1 in the single part.
        assert_eq!(r.handle_degrees.keys().copied().collect::<Vec<_>>(), vec![13]);
        assert_eq!(r.high_degree.hits, 2000);
        // One Dynkin accepts at most one leg.
        assert!(r.ratio.mean <= 1.0 / 6.0 + 1e-12);
        assert_eq!(r.legs.len(), 6);
    }

    #[test]
    fn korula_pal_broom_runs() {
        let r = broom_attack_experiment(16, DistributionKind::KorulaPal, 500, 9).unwrap();
        assert_eq!(r.validated_partitions, VALIDATED_TRIALS);
        assert_eq!(r.handle_degrees.values().sum::<u64>(), 500);
        assert!(r.min_leg.p <= r.legs[r.min_leg_slot].p);
        let again = broom_attack_experiment(16, DistributionKind::KorulaPal, 500, 9).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn deterministic_attack_on_single_part() {
        // All weight sits in one Dynkin instance, so at most one forest edge
        // is taken per trial. Ties go to the lowest id, which is the favorite.
        let r = deterministic_attack_experiment(8, DistributionKind::SinglePart, 3000, 1).unwrap();
        assert_eq!(r.forest.len(), 7);
        assert!(r.per_element.iter().map(|e| e.p).sum::<f64>() <= 1.0 + 1e-12);
        assert!(r.per_element[0].p > 0.3);
        assert!(r.min.p < 0.1);
        assert!(r.passed);
    }

    #[test]
    fn odd_broom_is_a_parameter_error() {
        assert_eq!(broom_attack_experiment(7, DistributionKind::KorulaPal, 10, 0).unwrap_err().exit_code(), 2);
    }
}
