//! Simple undirected graphs and vertex relabelings.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("permutation of length {perm} applied to a graph on {n} vertices")]
    LengthMismatch { perm: usize, n: usize },
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
}

/// A simple undirected graph on vertices `0..n`.
///
/// Edges are stored normalized (`u < v`) and sorted, so two graphs compare
/// equal exactly when they have the same vertex count and edge set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Repeated edges (in either
    /// orientation) collapse to one; self-loops and out-of-range endpoints
    /// are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut norm = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Self::from_normalized(n, norm))
    }

    /// `edges` must already be sorted, deduplicated, loop-free and `u < v`.
    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Graph { n, edges, adj }
    }

    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, [])
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (0..n).flat_map(|j| (0..j).map(move |i| (i, j))))
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Disjoint union; the vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + off, v + off)))
            .collect::<Vec<_>>();
        Self::from_normalized(self.n + other.n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edges with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Relabels vertex `v` as `p[v]`. See [`apply_permutation`].
    pub fn relabel(&self, p: &Permutation) -> Result<Graph, GraphError> {
        apply_permutation(self, p)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

/// A bijection on `0..n`, stored as the image of each point.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, GraphError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &x in &mapping {
            if x >= n || seen[x] {
                return Err(GraphError::NotAPermutation(format!("{mapping:?}")));
            }
            seen[x] = true;
        }
        Ok(Permutation(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// The permutation sending `order[pos]` to `pos`, i.e. the relabeling
    /// that lists vertices in the given order.
    pub fn from_order(order: &[usize]) -> Result<Self, GraphError> {
        let mut inv = vec![usize::MAX; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            if v >= order.len() || inv[v] != usize::MAX {
                return Err(GraphError::NotAPermutation(format!("{order:?}")));
            }
            inv[v] = pos;
        }
        Ok(Permutation(inv))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    /// `self` after `first`: `v -> self(first(v))`.
    pub fn after(&self, first: &Permutation) -> Permutation {
        Permutation(first.0.iter().map(|&x| self.0[x]).collect())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = GraphError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// Relabels `g` so that vertex `v` becomes `p(v)`: the result has edge
/// `(i, j)` iff `g` has `(p⁻¹(i), p⁻¹(j))`.
pub fn apply_permutation(g: &Graph, p: &Permutation) -> Result<Graph, GraphError> {
    if p.len() != g.n() {
        return Err(GraphError::LengthMismatch { perm: p.len(), n: g.n() });
    }
    let mut edges = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (p.apply(u), p.apply(v));
            (a.min(b), a.max(b))
        })
        .collect::<Vec<_>>();
    edges.sort_unstable();
    Ok(Graph::from_normalized(g.n(), edges))
}
