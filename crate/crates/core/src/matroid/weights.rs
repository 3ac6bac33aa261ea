use std::cmp::Ordering;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{ElementId, MatroidError};

/// Exact non-negative weights stored as numerators over one shared
/// denominator, so comparisons and sums are integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightAssignment {
    numerators: Vec<u64>,
    denominator: u64,
}

impl WeightAssignment {
    pub fn from_integers(numerators: Vec<u64>) -> Self {
        WeightAssignment { numerators, denominator: 1 }
    }

    pub fn new(numerators: Vec<u64>, denominator: u64) -> Result<Self, MatroidError> {
        if denominator == 0 {
            return Err(MatroidError::Parse("zero weight denominator".into()));
        }
        Ok(WeightAssignment { numerators, denominator })
    }

    /// Brings `(numerator, denominator)` pairs onto a common denominator.
    pub fn from_rationals(values: &[(u64, u64)]) -> Result<Self, MatroidError> {
        let overflow = || MatroidError::Parse("weight denominators overflow u64".into());
        let mut common = 1u64;
        for &(_, d) in values {
            if d == 0 {
                return Err(MatroidError::Parse("zero weight denominator".into()));
            }
            common = (common / common.gcd(&d)).checked_mul(d).ok_or_else(overflow)?;
        }
        let numerators = values
            .iter()
            .map(|&(n, d)| n.checked_mul(common / d).ok_or_else(overflow))
            .collect::<Result<_, _>>()?;
        Ok(WeightAssignment { numerators, denominator: common })
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    /// Numerator of `e`'s weight; only meaningful relative to this assignment.
    pub fn get(&self, e: ElementId) -> u64 {
        self.numerators[e.index()]
    }

    pub fn as_f64(&self, e: ElementId) -> f64 {
        self.get(e) as f64 / self.denominator as f64
    }

    /// Sum of numerators over `s`.
    pub fn total(&self, s: &[ElementId]) -> u128 {
        s.iter().map(|&e| u128::from(self.get(e))).sum()
    }

    /// Greedy order: heavier first, ties by ascending id.
    pub fn key_cmp(&self, a: ElementId, b: ElementId) -> Ordering {
        self.get(b).cmp(&self.get(a)).then(a.cmp(&b))
    }

    pub fn sort_by_key(&self, elements: &mut [ElementId]) {
        elements.sort_unstable_by(|&a, &b| self.key_cmp(a, b));
    }

    /// Applies `f` to every numerator (same denominator).
    pub fn map(&self, f: impl Fn(u64) -> u64) -> Self {
        WeightAssignment {
            numerators: self.numerators.iter().map(|&w| f(w)).collect(),
            denominator: self.denominator,
        }
    }
}

/// Parses `"3"`, `"0.25"`, or `"7/3"` into a reduced `(numerator, denominator)`.
pub fn parse_rational(token: &str) -> Result<(u64, u64), MatroidError> {
    let bad = || MatroidError::Parse(format!("not a non-negative rational: {token:?}"));
    let token = token.trim();
    let (num, den) = if let Some((n, d)) = token.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        (n, d)
    } else if let Some((int, frac)) = token.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let n = int
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        (n, scale)
    } else {
        (token.parse().map_err(|_| bad())?, 1)
    };
    if den == 0 {
        return Err(bad());
    }
    let g = num.gcd(&den).max(1);
    Ok((num / g, den / g))
}

/// Whitespace-separated rationals, one per element id.
pub fn parse_weights(text: &str) -> Result<WeightAssignment, MatroidError> {
    let values = text
        .split_whitespace()
        .map(parse_rational)
        .collect::<Result<Vec<_>, _>>()?;
    WeightAssignment::from_rationals(&values)
}
