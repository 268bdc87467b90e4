//! Exact isomorphism by complete backtracking search.
//!
//! This module deliberately uses nothing but [`Graph`]: candidate pruning is
//! by degree and by the sorted multiset of neighbor degrees, and adjacency
//! to already-mapped vertices is checked at every extension. It shares no
//! code with the walk-count machinery it is used to audit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{apply_permutation, Graph, Permutation};

/// Default node budget for a single search.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Largest `n` accepted by [`enumerate_labeled_graphs`].
pub const MAX_ENUMERATION_N: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search budget of {budget} nodes exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("search produced a mapping that does not verify")]
    SelfCheckFailed,
    #[error("labeled-graph enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {0}")]
    EnumerationTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleOutcome {
    IsomorphicVia { mapping: Permutation },
    NonIsomorphic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub outcome: OracleOutcome,
    pub nodes_explored: u64,
}

impl OracleResult {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self.outcome, OracleOutcome::IsomorphicVia { .. })
    }

    pub fn mapping(&self) -> Option<&Permutation> {
        match &self.outcome {
            OracleOutcome::IsomorphicVia { mapping } => Some(mapping),
            OracleOutcome::NonIsomorphic => None,
        }
    }
}

type Color = (usize, Vec<usize>);

fn colors(g: &Graph) -> Vec<Color> {
    (0..g.n())
        .map(|v| {
            let mut nd = g.neighbors(v).iter().map(|&w| g.degree(w)).collect::<Vec<_>>();
            nd.sort_unstable();
            (g.degree(v), nd)
        })
        .collect()
}

struct Search<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    adj2: Vec<bool>,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    map: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> Result<bool, OracleError> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let u = self.order[depth];
        let n = self.g2.n();
        for ci in 0..self.candidates[u].len() {
            let v = self.candidates[u][ci];
            if self.used[v] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OracleError::BudgetExhausted { budget: self.budget });
            }
            let consistent = self.order[..depth].iter().all(|&w| {
                let image = self.map[w];
                self.g1.has_edge(u, w) == self.adj2[v * n + image]
            });
            if !consistent {
                continue;
            }
            self.map[u] = v;
            self.used[v] = true;
            if self.extend(depth + 1)? {
                return Ok(true);
            }
            self.used[v] = false;
        }
        Ok(false)
    }
}

/// Decides whether `g1` and `g2` are isomorphic. On success the mapping `p`
/// satisfies `apply_permutation(g1, p) == g2`.
pub fn exact_isomorphic(g1: &Graph, g2: &Graph, budget: u64) -> Result<OracleResult, OracleError> {
    let non_iso = OracleResult { outcome: OracleOutcome::NonIsomorphic, nodes_explored: 0 };
    if g1.n() != g2.n() || g1.edge_count() != g2.edge_count() {
        return Ok(non_iso);
    }
    let n = g1.n();
    let (c1, c2) = (colors(g1), colors(g2));
    let (mut s1, mut s2) = (c1.clone(), c2.clone());
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return Ok(non_iso);
    }

    // highest degree first, ties by label
    let mut order = (0..n).collect::<Vec<_>>();
    order.sort_by_key(|&v| std::cmp::Reverse(g1.degree(v)));
    let candidates = (0..n)
        .map(|u| (0..n).filter(|&v| c2[v] == c1[u]).collect())
        .collect();
    let mut adj2 = vec![false; n * n];
    for &(a, b) in g2.edges() {
        adj2[a * n + b] = true;
        adj2[b * n + a] = true;
    }
    let mut search = Search {
        g1,
        g2,
        adj2,
        order,
        candidates,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        nodes: 0,
        budget,
    };
    let found = search.extend(0)?;
    let nodes_explored = search.nodes;
    if !found {
        return Ok(OracleResult { outcome: OracleOutcome::NonIsomorphic, nodes_explored });
    }
    let mapping = Permutation::new(search.map).map_err(|_| OracleError::SelfCheckFailed)?;
    if apply_permutation(g1, &mapping).as_ref() != Ok(g2) {
        return Err(OracleError::SelfCheckFailed);
    }
    Ok(OracleResult { outcome: OracleOutcome::IsomorphicVia { mapping }, nodes_explored })
}

/// Every labeled simple graph on `n` vertices, in the order of
/// [`labeled_graph`]'s mask.
pub fn enumerate_labeled_graphs(n: usize) -> Result<impl Iterator<Item = Graph>, OracleError> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(OracleError::EnumerationTooLarge(n));
    }
    Ok((0..labeled_graph_count(n)).map(move |mask| labeled_graph(n, mask)))
}

/// The labeled graph whose edge set is encoded by `mask`: bit `t` is the
/// `t`-th upper-triangle pair in graph6 order `(0,1), (0,2), (1,2), …`.
pub fn labeled_graph(n: usize, mask: u64) -> Graph {
    let edges = (1..n)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .enumerate()
        .filter(|(t, _)| mask >> t & 1 == 1)
        .map(|(_, e)| e);
    Graph::from_edges(n, edges).expect("enumerated pairs are valid")
}

/// Number of graphs [`enumerate_labeled_graphs`] yields for `n`.
pub fn labeled_graph_count(n: usize) -> u64 {
    1u64 << (n * n.saturating_sub(1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(g1: &Graph, g2: &Graph) -> bool {
        exact_isomorphic(g1, g2, DEFAULT_BUDGET).unwrap().is_isomorphic()
    }

    #[test]
    fn permuted_graph_is_found() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)]).unwrap();
        let p = Permutation::new(vec![3, 5, 0, 1, 2, 4]).unwrap();
        let h = apply_permutation(&g, &p).unwrap();
        let r = exact_isomorphic(&g, &h, DEFAULT_BUDGET).unwrap();
        let q = r.mapping().unwrap();
        assert_eq!(apply_permutation(&g, q).unwrap(), h);
    }

    #[test]
    fn cycle_vs_two_triangles() {
        let k3 = Graph::complete(3).unwrap();
        let two = k3.disjoint_union(&k3);
        let c6 = Graph::cycle(6).unwrap();
        let r = exact_isomorphic(&c6, &two, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.outcome, OracleOutcome::NonIsomorphic);
        // same degree colors, so the search itself had to run
        assert!(r.nodes_explored > 0);
    }

    #[test]
    fn triangle_reflexive() {
        let k3 = Graph::complete(3).unwrap();
        assert!(iso(&k3, &k3));
        assert!(!iso(&k3, &Graph::path(3).unwrap()));
    }

    #[test]
    fn budget_is_enforced() {
        let c6 = Graph::cycle(6).unwrap();
        let k3 = Graph::complete(3).unwrap();
        assert_eq!(
            exact_isomorphic(&c6, &k3.disjoint_union(&k3), 1),
            Err(OracleError::BudgetExhausted { budget: 1 })
        );
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_labeled_graphs(1).unwrap().count(), 1);
        assert_eq!(enumerate_labeled_graphs(3).unwrap().count(), 8);
        assert_eq!(enumerate_labeled_graphs(4).unwrap().count(), 64);
        assert_eq!(labeled_graph_count(7), 1 << 21);
        assert!(enumerate_labeled_graphs(8).is_err());
        assert!(enumerate_labeled_graphs(0).is_err());
        let all = enumerate_labeled_graphs(3).unwrap().collect::<Vec<_>>();
        let mut dedup = all.clone();
        dedup.sort_by_key(|g| g.edges().to_vec());
        dedup.dedup();
        assert_eq!(dedup.len(), 8);
    }

    #[test]
    fn unlabeled_class_counts() {
        // classes are built greedily; symmetry and transitivity are checked
        // against every member, not just the representative
        for (n, expected) in [(1, 1), (2, 2), (3, 4), (4, 11)] {
            let graphs = enumerate_labeled_graphs(n).unwrap().collect::<Vec<_>>();
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for (i, g) in graphs.iter().enumerate() {
                match classes.iter_mut().find(|c| iso(&graphs[c[0]], g)) {
                    Some(c) => c.push(i),
                    None => classes.push(vec![i]),
                }
            }
            assert_eq!(classes.len(), expected, "n = {n}");
            for c in &classes {
                for &a in c {
                    assert!(iso(&graphs[a], &graphs[c[0]]));
                    assert!(iso(&graphs[c[0]], &graphs[a]));
                }
            }
        }
    }
}
