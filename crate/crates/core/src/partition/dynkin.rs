use super::{EdgePartition, PartitionError};
use crate::engine::{Arrival, ArrivalSchedule, ArrivalTime, Decision, SecretaryAlgorithm};
use crate::matroid::{Components, ElementId, WeightAssignment};

/// `a` beats `b` in the (weight desc, id asc) order.
fn beats(a: (u64, ElementId), b: (u64, ElementId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Endpoints of edge id `e` of `K_n`.
pub(crate) fn edge_endpoints(n: usize, e: ElementId) -> (u32, u32) {
    let e = e.index();
    // First id owned by vertex u as the smaller endpoint.
    let offset = |u: usize| u * (2 * n - u - 1) / 2;
    let (mut lo, mut hi) = (0, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if offset(mid) <= e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo as u32, (e - offset(lo) + lo + 1) as u32)
}

/// Dynkin's rule on every part at once, with the global horizon `1/e`:
/// each part takes its first post-horizon edge that beats all of the
/// part's samples. A part without samples takes its first late edge.
///
/// Runs in one pass per stage without sorting arrivals. The union of the
/// picks is checked for acyclicity; a cycle means the partition was not
/// valid.
pub fn run_partition_dynkin(
    p: &EdgePartition,
    w: &WeightAssignment,
    sched: &ArrivalSchedule,
) -> Result<Vec<ElementId>, PartitionError> {
    let m = p.edge_count();
    if w.len() < m || sched.len() < m {
        return Err(PartitionError::Parameter(format!(
            "K_{} has {m} edges but {} weights and {} arrival times were given",
            p.n(),
            w.len(),
            sched.len()
        )));
    }
    let horizon = ArrivalTime::inverse_e();
    let times = &sched.times()[..m];
    let labels = p.labels();
    let mut best: Vec<Option<(u64, ElementId)>> = vec![None; p.num_parts()];
    for (i, &t) in times.iter().enumerate() {
        if t <= horizon {
            let key = (w.get(ElementId(i as u32)), ElementId(i as u32));
            let slot = &mut best[labels[i] as usize];
            if slot.is_none_or(|b| beats(key, b)) {
                *slot = Some(key);
            }
        }
    }
    let mut pick: Vec<Option<(ArrivalTime, ElementId)>> = vec![None; p.num_parts()];
    for (i, &t) in times.iter().enumerate() {
        if t > horizon {
            let e = ElementId(i as u32);
            let part = labels[i] as usize;
            if best[part].is_none_or(|b| beats((w.get(e), e), b)) && pick[part].is_none_or(|q| (t, e) < q) {
                pick[part] = Some((t, e));
            }
        }
    }
    let mut accepted: Vec<ElementId> = pick.into_iter().flatten().map(|(_, e)| e).collect();
    accepted.sort_unstable();
    let mut forest = Components::new(p.n());
    for &e in &accepted {
        let (u, v) = edge_endpoints(p.n(), e);
        if !forest.union(u, v) {
            return Err(PartitionError::ValidityBreach { accepted });
        }
    }
    Ok(accepted)
}

/// [`run_partition_dynkin`] as an online algorithm for the trial engine.
#[derive(Debug, Clone)]
pub struct PartitionDynkin {
    name: &'static str,
    part: Vec<u32>,
    horizon: ArrivalTime,
    best: Vec<Option<(u64, ElementId)>>,
    done: Vec<bool>,
}

impl PartitionDynkin {
    pub fn new(p: &EdgePartition) -> Self {
        Self::named(p, "partition-dynkin")
    }

    pub fn named(p: &EdgePartition, name: &'static str) -> Self {
        PartitionDynkin {
            name,
            part: p.labels().to_vec(),
            horizon: ArrivalTime::inverse_e(),
            best: vec![None; p.num_parts()],
            done: vec![false; p.num_parts()],
        }
    }
}

impl SecretaryAlgorithm for PartitionDynkin {
    fn name(&self) -> &str {
        self.name
    }

    fn horizon(&self) -> Option<ArrivalTime> {
        Some(self.horizon)
    }

    fn on_arrival(&mut self, a: Arrival) -> Result<Decision, crate::engine::AlgorithmError> {
        let part = self.part[a.element.index()] as usize;
        let key = (a.weight, a.element);
        let beats_samples = self.best[part].is_none_or(|b| beats(key, b));
        if a.time <= self.horizon {
            if beats_samples {
                self.best[part] = Some(key);
            }
            return Ok(Decision::Reject);
        }
        if beats_samples && !self.done[part] {
            self.done[part] = true;
            return Ok(Decision::Accept);
        }
        Ok(Decision::Reject)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{draw_schedule, run_trial, TrialSeed};
    use crate::matroid::GraphicMatroid;
    use crate::partition::korula_pal_partition;

    #[test]
    fn endpoints_invert_edge_ids() {
        for n in 2..12 {
            for (i, &uv) in GraphicMatroid::complete(n).edges().iter().enumerate() {
                assert_eq!(edge_endpoints(n, ElementId::from(i)), uv);
            }
        }
    }

    #[test]
    fn one_part_is_plain_dynkin() {
        let p = EdgePartition::single_part(3).unwrap();
        let w = WeightAssignment::from_integers(vec![5, 9, 7]);
        // 9 sampled: nothing beats it.
        let s = ArrivalSchedule::from_f64(&[0.5, 0.1, 0.9]);
        assert!(run_partition_dynkin(&p, &w, &s).unwrap().is_empty());
        // 5 sampled: 7 arrives before 9 and is taken.
        let s = ArrivalSchedule::from_f64(&[0.1, 0.9, 0.5]);
        assert_eq!(run_partition_dynkin(&p, &w, &s).unwrap(), vec![ElementId(2)]);
    }

    #[test]
    fn shattered_triangle_is_reported() {
        let p = EdgePartition::new(3, vec![0, 1, 2]).unwrap();
        let w = WeightAssignment::from_integers(vec![1, 1, 1]);
        let s = ArrivalSchedule::from_f64(&[0.5, 0.6, 0.7]);
        assert!(matches!(run_partition_dynkin(&p, &w, &s), Err(PartitionError::ValidityBreach { .. })));
    }

    #[test]
    fn fast_path_matches_engine() {
        let g = GraphicMatroid::complete(7);
        for t in 0..300 {
            let seed = TrialSeed::new(11, t);
            let mut rng = seed.rng(crate::engine::Stream::Instance);
            let p = korula_pal_partition(7, &mut rng).unwrap();
            let w = WeightAssignment::from_integers((0..21).map(|i| (i * 7 + t) % 5).collect());
            let s = draw_schedule(21, seed);
            let fast = run_partition_dynkin(&p, &w, &s).unwrap();
            let mut alg = PartitionDynkin::new(&p);
            let trace = run_trial(&g, &w, &s, &mut alg).unwrap();
            assert_eq!(&*trace.accepted, &fast[..], "trial {t}");
        }
    }
}
