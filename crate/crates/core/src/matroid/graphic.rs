use super::{ElementId, IndependenceBuilder, Matroid, MatroidError};

/// Cycle matroid of a multigraph; edge index is the element id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicMatroid {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
}

impl GraphicMatroid {
    /// Builds from vertex pairs; pairs are stored as `(min, max)`.
    /// Parallel edges are allowed, loops are not.
    pub fn new(vertex_count: usize, edges: Vec<(u32, u32)>) -> Result<Self, MatroidError> {
        let mut canonical = Vec::with_capacity(edges.len());
        for (i, (u, v)) in edges.into_iter().enumerate() {
            if u == v {
                return Err(MatroidError::Parse(format!("edge {i} is a loop at vertex {u}")));
            }
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(MatroidError::Parse(format!(
                    "edge {i} = ({u},{v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        Ok(GraphicMatroid { vertex_count, edges: canonical })
    }

    /// `K_n` with edges in lexicographic order `(0,1), (0,2), …, (n-2,n-1)`.
    pub fn complete(n: usize) -> Self {
        let n32 = n as u32;
        let edges = (0..n32)
            .flat_map(|u| (u + 1..n32).map(move |v| (u, v)))
            .collect();
        GraphicMatroid { vertex_count: n, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn endpoints(&self, e: ElementId) -> (u32, u32) {
        self.edges[e.index()]
    }

    /// `vertex_count` minus the number of connected components.
    pub fn full_rank(&self) -> usize {
        let mut uf = Components::new(self.vertex_count);
        self.edges.iter().filter(|&&(u, v)| uf.union(u, v)).count()
    }
}

/// Disjoint sets over vertices: path halving, union by size.
#[derive(Clone)]
pub(crate) struct Components {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Components {
    pub(crate) fn new(n: usize) -> Self {
        Components { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        let p = &mut self.parent;
        while p[x as usize] != x {
            let grand = p[p[x as usize] as usize];
            p[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// `false` if `u` and `v` were already joined.
    pub(crate) fn union(&mut self, u: u32, v: u32) -> bool {
        let (mut a, mut b) = (self.find(u), self.find(v));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        true
    }
}

#[derive(Clone)]
struct ForestBuilder<'a> {
    edges: &'a [(u32, u32)],
    components: Components,
}

impl IndependenceBuilder for ForestBuilder<'_> {
    fn try_insert(&mut self, e: ElementId) -> bool {
        let (u, v) = self.edges[e.index()];
        self.components.union(u, v)
    }

    fn fork(&self) -> Box<dyn IndependenceBuilder + '_> {
        Box::new(self.clone())
    }
}

impl Matroid for GraphicMatroid {
    fn id_bound(&self) -> usize {
        self.edges.len()
    }

    fn contains(&self, e: ElementId) -> bool {
        e.index() < self.edges.len()
    }

    fn builder(&self) -> Box<dyn IndependenceBuilder + '_> {
        Box::new(ForestBuilder {
            edges: &self.edges,
            components: Components::new(self.vertex_count),
        })
    }
}

/// Parses `"n m"` followed by `m` lines `"u v"` (0-indexed vertices).
pub fn parse_graph(text: &str) -> Result<GraphicMatroid, MatroidError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| MatroidError::Parse("empty graph file".into()))?;
    let (n, m) = parse_pair(header)?;
    let mut edges = Vec::with_capacity(m as usize);
    for line in lines.by_ref().take(m as usize) {
        edges.push(parse_pair(line)?);
    }
    if edges.len() != m as usize {
        return Err(MatroidError::Parse(format!(
            "header promises {m} edges, found {}",
            edges.len()
        )));
    }
    if lines.next().is_some() {
        return Err(MatroidError::Parse("trailing lines after the edge list".into()));
    }
    GraphicMatroid::new(n as usize, edges)
}

fn parse_pair(line: &str) -> Result<(u32, u32), MatroidError> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<u32>()
            .map_err(|_| MatroidError::Parse(format!("not a vertex index: {t:?}")))
    });
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a?, b?)),
        _ => Err(MatroidError::Parse(format!("expected two integers, got {line:?}"))),
    }
}
