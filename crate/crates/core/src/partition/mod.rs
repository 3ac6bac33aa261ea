//! Edge partitions of `K_n` and the per-part Dynkin algorithm.
//!
//! Edges use the id order of [`GraphicMatroid::complete`]: `(0,1), (0,2),
//! …, (n-2,n-1)`. A partition is valid when parallel Dynkin runs on its
//! parts can never accept a cycle, which holds iff no triangle has its
//! three edges in three different parts.

mod broom;
mod degree;
mod dynkin;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matroid::{ElementId, GraphicMatroid};

pub use broom::{deterministic_adversary_weights, plant_broom, AdversaryWeights, BroomInstance};
pub use degree::{
    convex_extremum, count_low_degree, edge_degree, recurrence_check, DegreeTable, RecurrenceParams,
    RecurrenceReport,
};
pub use dynkin::{run_partition_dynkin, PartitionDynkin};

/// Largest `n` for which the cycle enumeration runs.
pub const BRUTE_FORCE_VERTICES: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("cycle enumeration supports n <= {limit}, got n = {n}")]
    Capacity { n: usize, limit: usize },
    #[error("per-part Dynkin accepted a cycle among {accepted:?}; the partition is not valid")]
    ValidityBreach { accepted: Vec<ElementId> },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Id of `{u, v}` in `K_n`.
pub fn edge_index(n: usize, u: u32, v: u32) -> ElementId {
    let (u, v) = (u.min(v) as usize, u.max(v) as usize);
    debug_assert!(u < v && v < n);
    ElementId::from(u * (2 * n - u - 1) / 2 + (v - u - 1))
}

/// Assignment of every edge of `K_n` to a part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePartition {
    n: usize,
    part: Vec<u32>,
    num_parts: usize,
}

impl EdgePartition {
    /// `part[e]` is the part of edge id `e`; part indices are `0..max + 1`.
    pub fn new(n: usize, part: Vec<u32>) -> Result<Self, PartitionError> {
        if n < 2 {
            return Err(PartitionError::Parameter(format!("K_n needs n >= 2, got {n}")));
        }
        let m = n * (n - 1) / 2;
        if part.len() != m {
            return Err(PartitionError::Parameter(format!(
                "K_{n} has {m} edges but {} part labels were given",
                part.len()
            )));
        }
        let num_parts = part.iter().max().map_or(0, |&p| p as usize + 1);
        Ok(EdgePartition { n, part, num_parts })
    }

    /// Every edge in part 0.
    pub fn single_part(n: usize) -> Result<Self, PartitionError> {
        Self::new(n, vec![0; n * n.saturating_sub(1) / 2])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.part.len()
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn part_of(&self, e: ElementId) -> u32 {
        self.part[e.index()]
    }

    pub fn labels(&self) -> &[u32] {
        &self.part
    }

    /// Edge ids of every part, ascending.
    pub fn parts(&self) -> Vec<Vec<ElementId>> {
        let mut out = vec![Vec::new(); self.num_parts];
        for (e, &p) in self.part.iter().enumerate() {
            out[p as usize].push(ElementId::from(e));
        }
        out
    }

    pub fn matroid(&self) -> GraphicMatroid {
        GraphicMatroid::complete(self.n)
    }

    fn same(&self, a: ElementId, b: ElementId) -> bool {
        self.part[a.index()] == self.part[b.index()]
    }

    /// One line per part, tokens `u-v`. Empty parts are written as empty
    /// lines so that line numbers stay part indices.
    pub fn to_text(&self) -> String {
        let edges = self.matroid().edges().to_vec();
        let mut out = String::new();
        for part in self.parts() {
            let tokens: Vec<String> = part.iter().map(|e| format!("{}-{}", edges[e.index()].0, edges[e.index()].1)).collect();
            out.push_str(&tokens.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses one part per line, space-separated `u-v` tokens with 0-indexed
/// vertices. `n` is one more than the largest vertex mentioned. Lines
/// starting with `#` are ignored; other lines, blank ones included, are
/// parts in order.
pub fn parse_partition(text: &str) -> Result<EdgePartition, PartitionError> {
    let mut parts: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    let mut body: Vec<&str> = text.lines().collect();
    while body.last().is_some_and(|l| l.trim().is_empty()) {
        body.pop();
    }
    for (i, raw) in body.iter().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        let mut part = Vec::new();
        for token in line.split_whitespace() {
            let bad = |message: String| PartitionError::Parse { line: i + 1, message };
            let (u, v) = token.split_once('-').ok_or_else(|| bad(format!("expected u-v, got {token:?}")))?;
            let u: u32 = u.parse().map_err(|_| bad(format!("bad vertex in {token:?}")))?;
            let v: u32 = v.parse().map_err(|_| bad(format!("bad vertex in {token:?}")))?;
            if u == v {
                return Err(bad(format!("{token} is a loop")));
            }
            part.push((u.min(v), u.max(v)));
        }
        parts.push(part);
        lines.push(i + 1);
    }
    let n = parts.iter().flatten().map(|&(_, v)| v as usize + 1).max().unwrap_or(0);
    if n < 2 {
        return Err(PartitionError::Parse { line: 0, message: "no edges".into() });
    }
    let mut label = vec![u32::MAX; n * (n - 1) / 2];
    for (p, part) in parts.iter().enumerate() {
        for &(u, v) in part {
            let slot = &mut label[edge_index(n, u, v).index()];
            if *slot != u32::MAX {
                return Err(PartitionError::Parse { line: lines[p], message: format!("edge {u}-{v} listed twice") });
            }
            *slot = p as u32;
        }
    }
    if let Some(e) = label.iter().position(|&l| l == u32::MAX) {
        let (u, v) = GraphicMatroid::complete(n).edges()[e];
        return Err(PartitionError::Parse { line: 0, message: format!("edge {u}-{v} of K_{n} is in no part") });
    }
    EdgePartition::new(n, label)
}

/// Korula–Pal with the given vertex order: edge `{u, v}` goes to the part
/// of whichever endpoint comes first. Part `r` belongs to the vertex at
/// position `r`, so it holds `n - 1 - r` edges and the last vertex owns
/// none (there are `n - 1` parts).
pub fn korula_pal_from_order(order: &[u32]) -> Result<EdgePartition, PartitionError> {
    let n = order.len();
    let mut rank = vec![u32::MAX; n];
    for (r, &v) in order.iter().enumerate() {
        match rank.get_mut(v as usize) {
            Some(slot) if *slot == u32::MAX => *slot = r as u32,
            _ => return Err(PartitionError::Parameter(format!("{order:?} is not a permutation of 0..{n}"))),
        }
    }
    let mut part = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            part.push(rank[u].min(rank[v]));
        }
    }
    EdgePartition::new(n, part)
}

/// Korula–Pal with a uniformly random vertex order.
pub fn korula_pal_partition(n: usize, rng: &mut dyn RngCore) -> Result<EdgePartition, PartitionError> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    korula_pal_from_order(&order)
}

/// A source of partitions. Sampled partitions are meant to be valid.
pub trait PartitionDistribution {
    fn name(&self) -> &'static str;

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<EdgePartition, PartitionError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    KorulaPal,
    /// Every edge in one part: a single Dynkin over all of `K_n`.
    SinglePart,
}

impl PartitionDistribution for DistributionKind {
    fn name(&self) -> &'static str {
        match self {
            DistributionKind::KorulaPal => "korula-pal",
            DistributionKind::SinglePart => "single-part",
        }
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<EdgePartition, PartitionError> {
        match self {
            DistributionKind::KorulaPal => korula_pal_partition(n, rng),
            DistributionKind::SinglePart => EdgePartition::single_part(n),
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "korula-pal" => Ok(DistributionKind::KorulaPal),
            "single-part" => Ok(DistributionKind::SinglePart),
            _ => Err(PartitionError::Parameter(format!(
                "unknown distribution {s:?} (expected korula-pal or single-part)"
            ))),
        }
    }
}

/// A triangle `u < v < w` whose three edges lie in three different parts.
pub fn find_shattered_triangle(p: &EdgePartition) -> Option<[u32; 3]> {
    let n = p.n as u32;
    for u in 0..n {
        for v in u + 1..n {
            let uv = edge_index(p.n, u, v);
            for w in v + 1..n {
                let (uw, vw) = (edge_index(p.n, u, w), edge_index(p.n, v, w));
                if !p.same(uv, uw) && !p.same(uv, vw) && !p.same(uw, vw) {
                    return Some([u, v, w]);
                }
            }
        }
    }
    None
}

/// Every triangle has two edges in one part.
pub fn validate_partition_triangles(p: &EdgePartition) -> bool {
    find_shattered_triangle(p).is_none()
}

/// No cycle of `K_n` has its edges in pairwise distinct parts. Enumerates
/// cycles, so `n` is capped at [`BRUTE_FORCE_VERTICES`].
pub fn validate_partition_bruteforce(p: &EdgePartition) -> Result<bool, PartitionError> {
    if p.n > BRUTE_FORCE_VERTICES {
        return Err(PartitionError::Capacity { n: p.n, limit: BRUTE_FORCE_VERTICES });
    }
    Ok(find_shattered_cycle(p).is_none())
}

/// A cycle (vertex sequence) whose edges are in pairwise distinct parts.
pub fn find_shattered_cycle(p: &EdgePartition) -> Option<Vec<u32>> {
    struct Search<'a> {
        p: &'a EdgePartition,
        path: Vec<u32>,
        on_path: Vec<bool>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        // Extends a path that starts at its smallest vertex; every
        // prefix already uses distinct parts.
        fn extend(&mut self) -> bool {
            let n = self.p.n as u32;
            let start = self.path[0];
            let last = *self.path.last().unwrap();
            for next in start + 1..n {
                if self.on_path[next as usize] {
                    continue;
                }
                let part = self.p.part_of(edge_index(self.p.n, last, next)) as usize;
                if self.used[part] {
                    continue;
                }
                self.used[part] = true;
                self.on_path[next as usize] = true;
                self.path.push(next);
                if self.path.len() >= 3 {
                    let closing = self.p.part_of(edge_index(self.p.n, next, start)) as usize;
                    if !self.used[closing] {
                        return true;
                    }
                }
                if self.extend() {
                    return true;
                }
                self.path.pop();
                self.on_path[next as usize] = false;
                self.used[part] = false;
            }
            false
        }
    }

    let mut s = Search {
        p,
        path: Vec::new(),
        on_path: vec![false; p.n],
        used: vec![false; p.num_parts],
    };
    for start in 0..p.n as u32 {
        s.path = vec![start];
        s.on_path[start as usize] = true;
        if s.extend() {
            return Some(s.path);
        }
        s.on_path[start as usize] = false;
    }
    None
}
