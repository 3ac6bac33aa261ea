//! Matroid oracles, minors, and exact offline optimization.
//!
//! Every matroid exposes an indexed ground set and an incremental
//! independence tester ([`IndependenceBuilder`]). Queries such as
//! [`is_independent`], [`rank`] and [`max_weight_basis`] are written once
//! against that interface, so graphic, uniform, restricted and contracted
//! matroids all share the same greedy machinery.

mod basis;
mod graphic;
mod minors;
mod uniform;
mod weights;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::{brute_force_mwb, greedy_basis, in_greedy_basis, max_weight_basis, BRUTE_FORCE_LIMIT};
pub use graphic::{parse_graph, GraphicMatroid};
pub(crate) use graphic::Components;
pub use minors::{contract, restrict, Contraction, Restriction};
pub use uniform::UniformMatroid;
pub use weights::{parse_rational, parse_weights, WeightAssignment};

/// Index of an element in a matroid's ground set.
///
/// The derived order is the lexicographic tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(u32::try_from(i).expect("element index exceeds u32"))
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("element {element} is not in the ground set")]
    OutOfDomain { element: ElementId },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("ground set of {size} elements exceeds the brute-force limit of {limit}")]
    Capacity { size: usize, limit: usize },
    #[error("malformed input: {0}")]
    Parse(String),
}

/// Incremental independence test: starts at the empty set and grows.
pub trait IndependenceBuilder {
    /// Adds `e` if the current set plus `e` stays independent.
    ///
    /// Callers must only pass ground-set elements not already inserted.
    fn try_insert(&mut self, e: ElementId) -> bool;

    /// An independent copy of the current state.
    fn fork(&self) -> Box<dyn IndependenceBuilder + '_>;
}

/// Independence oracle over an indexed ground set.
///
/// Ground sets are subsets of `0..id_bound()` so that restriction and
/// contraction preserve element ids.
pub trait Matroid: Send + Sync {
    /// Exclusive upper bound on element indices.
    fn id_bound(&self) -> usize;

    fn contains(&self, e: ElementId) -> bool;

    fn builder(&self) -> Box<dyn IndependenceBuilder + '_>;

    /// `Some(k)` when the matroid is known to be k-uniform.
    fn uniform_capacity(&self) -> Option<usize> {
        None
    }

    fn elements(&self) -> Vec<ElementId> {
        (0..self.id_bound())
            .map(ElementId::from)
            .filter(|&e| self.contains(e))
            .collect()
    }

    fn ground_size(&self) -> usize {
        self.elements().len()
    }
}

fn check_domain(m: &dyn Matroid, s: &[ElementId]) -> Result<(), MatroidError> {
    match s.iter().find(|&&e| !m.contains(e)) {
        Some(&element) => Err(MatroidError::OutOfDomain { element }),
        None => Ok(()),
    }
}

fn dedup(s: &[ElementId]) -> Vec<ElementId> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn is_independent(m: &dyn Matroid, s: &[ElementId]) -> Result<bool, MatroidError> {
    check_domain(m, s)?;
    let mut b = m.builder();
    Ok(dedup(s).into_iter().all(|e| b.try_insert(e)))
}

pub fn rank(m: &dyn Matroid, s: &[ElementId]) -> Result<usize, MatroidError> {
    check_domain(m, s)?;
    let mut b = m.builder();
    Ok(dedup(s).into_iter().filter(|&e| b.try_insert(e)).count())
}

/// True iff `target` lies in the closure of the independent set `i`.
pub fn spans(m: &dyn Matroid, i: &[ElementId], target: &[ElementId]) -> Result<bool, MatroidError> {
    check_domain(m, i)?;
    check_domain(m, target)?;
    let i = dedup(i);
    let mut b = m.builder();
    if !i.iter().all(|&e| b.try_insert(e)) {
        return Err(MatroidError::Contract("spanning set is not independent".into()));
    }
    let members: std::collections::HashSet<_> = i.iter().copied().collect();
    Ok(dedup(target)
        .into_iter()
        .filter(|e| !members.contains(e))
        .all(|e| !b.try_insert(e)))
}
