use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::dynkin::edge_endpoints;
use super::{edge_index, EdgePartition, PartitionError};
use crate::matroid::{Components, ElementId, WeightAssignment};

/// Weights that defeat a fixed partition: 1 on a spanning forest of one
/// large part, 0 elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryWeights {
    pub weights: WeightAssignment,
    pub part: u32,
    /// Weight-1 edges, ascending.
    pub forest: Vec<ElementId>,
}

/// Picks the largest part (lowest index on ties), which has at least `n/2`
/// edges whenever there are at most `n - 1` parts, and puts weight 1 on a
/// spanning forest of it. All of that weight then competes inside a single
/// Dynkin instance.
pub fn deterministic_adversary_weights(p: &EdgePartition) -> Result<AdversaryWeights, PartitionError> {
    let parts = p.parts();
    let (part, edges) = parts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .ok_or_else(|| PartitionError::Internal("partition has no parts".into()))?;
    if 2 * edges.len() < p.n() {
        return Err(PartitionError::Internal(format!(
            "largest part has {} edges, fewer than n/2 = {}; a valid partition of K_{} cannot have {} parts",
            edges.len(),
            p.n() as f64 / 2.0,
            p.n(),
            p.num_parts()
        )));
    }
    let mut components = Components::new(p.n());
    let forest: Vec<ElementId> = edges
        .iter()
        .copied()
        .filter(|&e| {
            let (u, v) = edge_endpoints(p.n(), e);
            components.union(u, v)
        })
        .collect();
    let mut weights = vec![0; p.edge_count()];
    for e in &forest {
        weights[e.index()] = 1;
    }
    Ok(AdversaryWeights { weights: WeightAssignment::from_integers(weights), part: part as u32, forest })
}

/// Two stars joined by a handle edge `{u, v}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroomInstance {
    pub n: usize,
    /// `u < v`.
    pub handle: (u32, u32),
    pub handle_edge: ElementId,
    /// Ascending; `x` hangs off `u`, `y` off `v`.
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    /// `{u, x}` for `x ∈ X` then `{v, y}` for `y ∈ Y`, in that order. The
    /// position in this list is the leg's slot.
    pub legs: Vec<ElementId>,
}

/// A uniformly random edge `{u, v}` of `K_n` as the handle, the other
/// vertices split evenly at random into `X` and `Y`. Legs get weight 1,
/// every other edge (the handle included) weight 0.
pub fn plant_broom(n: usize, rng: &mut dyn RngCore) -> Result<(WeightAssignment, BroomInstance), PartitionError> {
    if n < 4 || n % 2 != 0 {
        return Err(PartitionError::Parameter(format!("the broom needs an even n >= 4, got {n}")));
    }
    let m = n * (n - 1) / 2;
    let handle_edge = ElementId::from(rng.gen_range(0..m));
    let (u, v) = edge_endpoints(n, handle_edge);
    let mut rest: Vec<u32> = (0..n as u32).filter(|&z| z != u && z != v).collect();
    rest.shuffle(rng);
    let (x, y) = rest.split_at(rest.len() / 2);
    let (mut x, mut y) = (x.to_vec(), y.to_vec());
    x.sort_unstable();
    y.sort_unstable();
    let legs: Vec<ElementId> = x
        .iter()
        .map(|&z| edge_index(n, u, z))
        .chain(y.iter().map(|&z| edge_index(n, v, z)))
        .collect();
    let mut weights = vec![0; m];
    for e in &legs {
        weights[e.index()] = 1;
    }
    Ok((WeightAssignment::from_integers(weights), BroomInstance { n, handle: (u, v), handle_edge, x, y, legs }))
}
