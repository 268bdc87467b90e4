//! Closed-walk profiles and the ordered-partition refinement built on them.
//!
//! Positions and vertices: an [`OrderedPartition`] is laid over *positions*
//! `0..n` of the current labeling, and every block is a run of consecutive
//! positions. A relabeling is a [`Permutation`] taking an old position (or
//! vertex) to its new position.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Permutation;
use crate::matrix::{OpCounter, PowerDiagonals};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("order {k} is outside the computed range 1..={k_max}")]
    OrderOutOfRange { k: usize, k_max: usize },
    #[error("profiles start at order 2, got {0}")]
    OrderTooSmall(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// `N_i^k`: the number of closed walks of length `k` at each vertex.
pub fn self_connectivity<T: Scalar>(diags: &PowerDiagonals<T>, k: usize) -> Result<Vec<T>, RefineError> {
    diags
        .get(k)
        .map(<[T]>::to_vec)
        .ok_or(RefineError::OrderOutOfRange { k, k_max: diags.k_max() })
}

/// Per-vertex closed-walk counts `(N_i^2, …, N_i^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityProfile<T> {
    k: usize,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar + Ord> ConnectivityProfile<T> {
    pub fn from_diagonals(diags: &PowerDiagonals<T>, k: usize) -> Result<Self, RefineError> {
        if k < 2 {
            return Err(RefineError::OrderTooSmall(k));
        }
        if k > diags.k_max() {
            return Err(RefineError::OrderOutOfRange { k, k_max: diags.k_max() });
        }
        let n = diags.n();
        let rows = (0..n)
            .map(|i| (2..=k).map(|m| diags.get(m).unwrap()[i].clone()).collect())
            .collect();
        Ok(ConnectivityProfile { k, rows })
    }

    /// Builds a profile from explicit rows; every row must hold `k - 1` values.
    pub fn from_rows(k: usize, rows: Vec<Vec<T>>) -> Result<Self, RefineError> {
        if k < 2 {
            return Err(RefineError::OrderTooSmall(k));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != k - 1) {
            return Err(RefineError::LengthMismatch { expected: k - 1, got: bad.len() });
        }
        Ok(ConnectivityProfile { k, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, v: usize) -> &[T] {
        &self.rows[v]
    }

    /// `N_v^k` for the profile's top order.
    pub fn top(&self, v: usize) -> &T {
        self.rows[v].last().expect("profile rows are non-empty")
    }

    /// The same profiles with vertex `v` moved to `p(v)`.
    pub fn relabeled(&self, p: &Permutation) -> Self {
        let mut rows = vec![Vec::new(); self.rows.len()];
        for (v, row) in self.rows.iter().enumerate() {
            rows[p.apply(v)] = row.clone();
        }
        ConnectivityProfile { k: self.k, rows }
    }
}

/// Consecutive blocks of positions; block sizes are the multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedPartition {
    sizes: Vec<usize>,
}

impl OrderedPartition {
    /// One block holding all `n` positions.
    pub fn unit(n: usize) -> Self {
        OrderedPartition { sizes: if n == 0 { Vec::new() } else { vec![n] } }
    }

    pub fn discrete(n: usize) -> Self {
        OrderedPartition { sizes: vec![1; n] }
    }

    /// Panics on a zero-sized block.
    pub fn from_sizes(sizes: Vec<usize>) -> Self {
        assert!(sizes.iter().all(|&s| s > 0), "empty block in {sizes:?}");
        OrderedPartition { sizes }
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.sizes
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_discrete(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1)
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.sizes.iter().scan(0, |start, &s| {
            let r = *start..*start + s;
            *start += s;
            Some(r)
        })
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &OrderedPartition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        let ends = self.blocks().map(|r| r.end).collect::<Vec<_>>();
        coarser.blocks().all(|r| ends.binary_search(&r.end).is_ok())
    }
}

/// The diagonal of `D(G_k)`: `N^k` listed in rearranged order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KDiagonal<T> {
    pub values: Vec<T>,
}

/// Sorts vertices into non-decreasing lexicographic order of their profiles,
/// breaking ties by the current label. Returns the relabeling and the
/// blocks of equal profiles.
pub fn k_rearrangement<T: Scalar + Ord>(profile: &ConnectivityProfile<T>) -> (Permutation, OrderedPartition) {
    let tiebreak = (0..profile.n()).collect::<Vec<_>>();
    k_rearrangement_by_priority(profile, &tiebreak)
}

/// As [`k_rearrangement`], but vertices with equal profiles are ordered by
/// `priority` instead of by label. Any choice of priority is a valid
/// rearrangement.
pub fn k_rearrangement_by_priority<T: Scalar + Ord>(
    profile: &ConnectivityProfile<T>,
    priority: &[usize],
) -> (Permutation, OrderedPartition) {
    let n = profile.n();
    assert_eq!(priority.len(), n, "priority length must match vertex count");
    let mut order = (0..n).collect::<Vec<_>>();
    order.sort_by(|&a, &b| profile.row(a).cmp(profile.row(b)).then(priority[a].cmp(&priority[b])));
    let mut sizes = Vec::new();
    for (pos, &v) in order.iter().enumerate() {
        if pos > 0 && profile.row(order[pos - 1]) == profile.row(v) {
            *sizes.last_mut().unwrap() += 1;
        } else {
            sizes.push(1);
        }
    }
    let perm = Permutation::from_order(&order).expect("sorted order is a permutation");
    (perm, OrderedPartition { sizes })
}

/// Lists `N^k` in the order given by the rearrangement `p`.
pub fn k_diagonal<T: Scalar + Ord>(profile: &ConnectivityProfile<T>, p: &Permutation) -> KDiagonal<T> {
    assert_eq!(p.len(), profile.n(), "permutation length must match vertex count");
    let mut values = vec![T::zero(); profile.n()];
    for v in 0..profile.n() {
        values[p.apply(v)] = profile.top(v).clone();
    }
    KDiagonal { values }
}

/// Result of splitting each block by a new round of values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    /// Old position to new position; only moves positions within a block.
    pub permutation: Permutation,
    pub partition: OrderedPartition,
}

pub fn refine<T: Scalar + Ord>(prev: &OrderedPartition, new_values: &[T]) -> Result<Refinement, RefineError> {
    refine_counted(prev, new_values, &mut OpCounter::new())
}

/// Sorts `new_values` (indexed by current position) inside each block of
/// `prev`, stably, and splits every block into runs of equal values. Block
/// order is preserved. Each value comparison is charged to `ops`.
pub fn refine_counted<T: Scalar + Ord>(
    prev: &OrderedPartition,
    new_values: &[T],
    ops: &mut OpCounter,
) -> Result<Refinement, RefineError> {
    let n = prev.n();
    if new_values.len() != n {
        return Err(RefineError::LengthMismatch { expected: n, got: new_values.len() });
    }
    let mut order = Vec::with_capacity(n);
    let mut sizes = Vec::with_capacity(n);
    for block in prev.blocks() {
        let start = order.len();
        order.extend(block);
        let slot = &mut order[start..];
        if slot.len() > 1 {
            slot.sort_by(|&a, &b| {
                ops.comparisons += 1;
                new_values[a].cmp(&new_values[b])
            });
        }
        let mut run = 1;
        for w in 1..slot.len() {
            ops.comparisons += 1;
            if new_values[slot[w - 1]] == new_values[slot[w]] {
                run += 1;
            } else {
                sizes.push(run);
                run = 1;
            }
        }
        sizes.push(run);
    }
    Ok(Refinement {
        permutation: Permutation::from_order(&order).expect("block-wise order is a permutation"),
        partition: OrderedPartition { sizes },
    })
}
