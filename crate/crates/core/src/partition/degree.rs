use serde::Serialize;

use super::dynkin::edge_endpoints;
use super::{edge_index, EdgePartition, PartitionError};
use crate::matroid::ElementId;

/// `deg(e) = deg_i(a) + deg_i(b) - 1` for `e = {a, b}` in part `i`, where
/// `deg_i` counts edges of part `i`.
pub fn edge_degree(p: &EdgePartition, e: ElementId) -> u32 {
    let (a, b) = edge_endpoints(p.n(), e);
    let part = p.part_of(e);
    let local = |x: u32| {
        (0..p.n() as u32)
            .filter(|&z| z != x && p.part_of(edge_index(p.n(), x, z)) == part)
            .count() as u32
    };
    local(a) + local(b) - 1
}

/// `deg(e)` for every edge, computed part by part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeTable {
    pub degrees: Vec<u32>,
}

impl DegreeTable {
    pub fn new(p: &EdgePartition) -> Self {
        let n = p.n();
        let mut local = vec![0u32; n];
        let mut degrees = vec![0u32; p.edge_count()];
        for part in p.parts() {
            let ends: Vec<(u32, u32)> = part.iter().map(|&e| edge_endpoints(n, e)).collect();
            for &(a, b) in &ends {
                local[a as usize] += 1;
                local[b as usize] += 1;
            }
            for (&e, &(a, b)) in part.iter().zip(&ends) {
                degrees[e.index()] = local[a as usize] + local[b as usize] - 1;
            }
            for &(a, b) in &ends {
                local[a as usize] = 0;
                local[b as usize] = 0;
            }
        }
        DegreeTable { degrees }
    }

    /// Edges with `deg(e) < c`.
    pub fn count_below(&self, c: f64) -> usize {
        self.degrees.iter().filter(|&&d| f64::from(d) < c).count()
    }
}

/// Number of low-degree edges, `|{e : deg(e) < c}|`. Validity of `p` is
/// not assumed.
pub fn count_low_degree(p: &EdgePartition, c: f64) -> usize {
    DegreeTable::new(p).count_below(c)
}

/// `a = ε/3`, `C = N^{ε/3}`, `b = (4/a)(N/C)^{1/2 + ε/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceParams {
    pub epsilon: f64,
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RecurrenceParams {
    pub fn new(epsilon: f64, n: u64) -> Result<Self, PartitionError> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(PartitionError::Parameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
        }
        if n < 2 {
            return Err(PartitionError::Parameter(format!("N must be at least 2, got {n}")));
        }
        let nf = n as f64;
        let a = epsilon / 3.0;
        let c = nf.powf(epsilon / 3.0);
        let b = (4.0 / a) * (nf / c).powf(0.5 + epsilon / 3.0);
        Ok(RecurrenceParams { epsilon, n, a, b, c })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub params: RecurrenceParams,
    /// Values of `n` scanned, `2..=N`.
    pub checked: u64,
    /// `2(n-1)/(a b n^{1+a}) < (1+a) b C/(2 n^{1-a})` for every scanned `n`.
    pub condition_holds: bool,
    pub first_violation: Option<u64>,
    /// `b C N^{1+a}`.
    pub bound: f64,
    /// `N^{3/2+ε}`.
    pub target: f64,
    pub bound_within_target: bool,
    /// Largest `n` with `(n-1)/2 < C`, where `T(n) = n(n-1)/2` exactly.
    pub base_case_limit: u64,
    /// `N(N-1)/2` when `N` itself is in the base-case regime.
    pub base_case_value: Option<f64>,
}

/// Scans the induction condition for every `n ≤ N` with `a`, `b`, `C`
/// fixed at their values for `N`.
pub fn recurrence_check(n_max: u64, epsilon: f64) -> Result<RecurrenceReport, PartitionError> {
    let params = RecurrenceParams::new(epsilon, n_max)?;
    let RecurrenceParams { a, b, c, .. } = params;
    let first_violation = (2..=n_max).find(|&n| {
        let nf = n as f64;
        let lhs = 2.0 * (nf - 1.0) / (a * b * nf.powf(1.0 + a));
        let rhs = (1.0 + a) * b * c / (2.0 * nf.powf(1.0 - a));
        lhs >= rhs
    });
    let nf = n_max as f64;
    let bound = b * c * nf.powf(1.0 + a);
    let target = nf.powf(1.5 + epsilon);
    // (n-1)/2 < C  ⟺  n < 2C + 1.
    let limit = 2.0 * c + 1.0;
    let base_case_limit = if limit.fract() == 0.0 { limit as u64 - 1 } else { limit.floor() as u64 };
    Ok(RecurrenceReport {
        params,
        checked: n_max - 1,
        condition_holds: first_violation.is_none(),
        first_violation,
        bound,
        target,
        bound_within_target: bound <= target,
        base_case_limit,
        base_case_value: (n_max <= base_case_limit).then(|| nf * (nf - 1.0) / 2.0),
    })
}

/// `((1-γ)n)^{1+a} + (γn)^{1+a}`, the maximum of `Σ x_i^{1+a}` over
/// nonnegative `x` summing to `n` with every `x_i ≤ (1-γ)n`.
pub fn convex_extremum(n: u64, gamma: f64, a: f64) -> Result<f64, PartitionError> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(PartitionError::Parameter(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(PartitionError::Parameter(format!("a must lie in (0, 1), got {a}")));
    }
    let small = gamma * n as f64;
    if (small - small.round()).abs() > 1e-9 {
        return Err(PartitionError::Parameter(format!("gamma * n = {small} is not an integer")));
    }
    let small = small.round();
    Ok((n as f64 - small).powf(1.0 + a) + small.powf(1.0 + a))
}
