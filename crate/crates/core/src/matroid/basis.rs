use super::{ElementId, Matroid, MatroidError, WeightAssignment};

/// Largest ground set [`brute_force_mwb`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Greedy over an already-ordered element sequence.
pub fn greedy_basis(m: &dyn Matroid, ordered: impl IntoIterator<Item = ElementId>) -> Vec<ElementId> {
    let mut b = m.builder();
    ordered.into_iter().filter(|&e| b.try_insert(e)).collect()
}

/// Whether `target` survives the greedy pass over `ordered`.
///
/// Stops as soon as `target` is reached; elements after it cannot change
/// its membership.
pub fn in_greedy_basis(
    m: &dyn Matroid,
    ordered: impl IntoIterator<Item = ElementId>,
    target: ElementId,
) -> bool {
    let mut b = m.builder();
    for e in ordered {
        let added = b.try_insert(e);
        if e == target {
            return added;
        }
    }
    false
}

/// Max-weight basis by the weight-descending greedy, ties by ascending id.
/// Returned sorted by id.
pub fn max_weight_basis(m: &dyn Matroid, w: &WeightAssignment) -> Vec<ElementId> {
    let mut order = m.elements();
    w.sort_by_key(&mut order);
    let mut basis = greedy_basis(m, order);
    basis.sort_unstable();
    basis
}

/// Exhaustive max-weight independent set.
///
/// Among sets of equal weight the winner is the one whose membership
/// vector, read in (weight desc, id asc) order, is lexicographically
/// largest; this always yields a basis.
pub fn brute_force_mwb(m: &dyn Matroid, w: &WeightAssignment) -> Result<Vec<ElementId>, MatroidError> {
    let mut ground = m.elements();
    if ground.len() > BRUTE_FORCE_LIMIT {
        return Err(MatroidError::Capacity { size: ground.len(), limit: BRUTE_FORCE_LIMIT });
    }
    w.sort_by_key(&mut ground);
    let n = ground.len();
    let mut best: Option<(u128, u32)> = None;
    for mask in 0u32..(1u32 << n) {
        let members: Vec<ElementId> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ground[i]).collect();
        let mut b = m.builder();
        if !members.iter().all(|&e| b.try_insert(e)) {
            continue;
        }
        let weight = w.total(&members);
        // Bit for key position i sits at n-1-i so earlier positions dominate.
        let tie = (0..n).filter(|i| mask >> i & 1 == 1).fold(0u32, |acc, i| acc | 1 << (n - 1 - i));
        if best.map_or(true, |cur| (weight, tie) > cur) {
            best = Some((weight, tie));
        }
    }
    let (_, tie) = best.expect("the empty set is independent");
    let mut out: Vec<ElementId> = (0..n).filter(|i| tie >> (n - 1 - i) & 1 == 1).map(|i| ground[i]).collect();
    out.sort_unstable();
    Ok(out)
}
