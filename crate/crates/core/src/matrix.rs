//! Dense square matrices, exact powers and power diagonals.
//!
//! Multiplication is schoolbook `O(n³)` and every scalar multiply and add is
//! tallied in an [`OpCounter`]; powers are built one factor at a time
//! (`A^(k+1) = A^k · A`) because every intermediate diagonal is needed.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Permutation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a {n}x{n} matrix, got {got}")]
    BadShape { n: usize, expected: usize, got: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("matrix has a negative entry at ({i}, {j})")]
    Negative { i: usize, j: usize },
    #[error("power must be at least 1, got {0}")]
    InvalidPower(usize),
    #[error("entry ({i}, {j}) of A^{k} exceeds the walk-count bound n^(k-1)")]
    EntryBoundExceeded { k: usize, i: usize, j: usize },
}

/// Running tallies of the scalar work done by one test run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub mults: u64,
    pub adds: u64,
    pub comparisons: u64,
    /// Largest bit length of any matrix entry produced so far.
    pub max_bitlen: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe_bitlen(&mut self, bits: u64) {
        self.max_bitlen = self.max_bitlen.max(bits);
    }

    /// Adds another counter's tallies into this one.
    pub fn merge(&mut self, other: &OpCounter) {
        self.mults += other.mults;
        self.adds += other.adds;
        self.comparisons += other.comparisons;
        self.max_bitlen = self.max_bitlen.max(other.max_bitlen);
    }
}

/// Dense `n × n` matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self, MatrixError> {
        if data.len() != n * n {
            return Err(MatrixError::BadShape { n, expected: n * n, got: data.len() });
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MatrixError::BadShape { n, expected: n, got: row.len() });
            }
            data.extend(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.get(i, j) != self.get(j, i))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn max_bitlen(&self) -> u64 {
        self.data.iter().map(Scalar::bit_len).max().unwrap_or(0)
    }

    /// Conjugation by the permutation matrix of `p`: entry `(i, j)` moves to
    /// `(p(i), p(j))`, i.e. `P·M·Pᵀ`.
    pub fn permuted(&self, p: &Permutation) -> Result<Self, MatrixError> {
        if p.len() != self.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: p.len() });
        }
        let n = self.n;
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            let pi = p.apply(i);
            for j in 0..n {
                data[pi * n + p.apply(j)] = self.data[i * n + j].clone();
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn into_rows(self) -> Vec<Vec<T>> {
        let n = self.n;
        let mut it = self.data.into_iter();
        (0..n).map(|_| it.by_ref().take(n).collect()).collect()
    }
}

/// A square matrix checked to be symmetric at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T>(Matrix<T>);

impl<T: Scalar> SymMatrix<T> {
    pub fn new(m: Matrix<T>) -> Result<Self, MatrixError> {
        match m.first_asymmetry() {
            Some((i, j)) => Err(MatrixError::NotSymmetric { i, j }),
            None => Ok(SymMatrix(m)),
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn first_negative(&self) -> Option<(usize, usize)> {
        let n = self.n();
        (0..n * n).find(|&k| !self.0.data[k].is_non_negative()).map(|k| (k / n, k % n))
    }

    /// True for a 0/1 matrix with zero diagonal, i.e. a simple graph.
    pub fn is_adjacency(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            self.get(i, i).is_zero() && (0..n).all(|j| self.get(i, j).is_zero() || self.get(i, j).is_one())
        })
    }

    pub fn permuted(&self, p: &Permutation) -> Result<Self, MatrixError> {
        Ok(SymMatrix(self.0.permuted(p)?))
    }
}

/// The 0/1 adjacency matrix of `g`.
pub fn adjacency_matrix<T: Scalar>(g: &Graph) -> SymMatrix<T> {
    let mut m = Matrix::zeros(g.n());
    for &(u, v) in g.edges() {
        m.set(u, v, T::one());
        m.set(v, u, T::one());
    }
    SymMatrix(m)
}

/// Exact product `a · b` without operation accounting.
pub fn mat_mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, MatrixError> {
    mat_mul_counted(a, b, &mut OpCounter::new())
}

/// Schoolbook product `a · b`. Charges `n³` multiplications and
/// `n²(n-1)` additions to `ops` and records the largest entry bit length.
///
/// The charge is the schoolbook count even though terms with a zero factor
/// are skipped in the actual arithmetic.
pub fn mat_mul_counted<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    ops: &mut OpCounter,
) -> Result<Matrix<T>, MatrixError> {
    if a.n != b.n {
        return Err(MatrixError::DimensionMismatch { left: a.n, right: b.n });
    }
    let n = a.n;
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        let arow = a.row(i);
        let orow = &mut out[i * n..(i + 1) * n];
        for (l, ail) in arow.iter().enumerate() {
            if ail.is_zero() {
                continue;
            }
            for (o, blj) in orow.iter_mut().zip(b.row(l)) {
                o.add_product(ail, blj);
            }
        }
    }
    let n3 = (n as u64).pow(3);
    ops.mults += n3;
    ops.adds += n3 - (n as u64).pow(2);
    let m = Matrix { n, data: out };
    ops.observe_bitlen(m.max_bitlen());
    Ok(m)
}

pub fn trace<T: Scalar>(m: &Matrix<T>) -> T {
    let mut t = T::zero();
    for i in 0..m.n {
        t.add_assign_ref(m.get(i, i));
    }
    t
}

/// Diagonals of `A¹ … A^k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDiagonals<T> {
    diag: Vec<Vec<T>>,
    traces: Vec<T>,
}

impl<T: Scalar> PowerDiagonals<T> {
    pub fn k_max(&self) -> usize {
        self.diag.len()
    }

    pub fn n(&self) -> usize {
        self.diag[0].len()
    }

    /// `diag(A^k)`, for `1 <= k <= k_max`.
    pub fn get(&self, k: usize) -> Option<&[T]> {
        k.checked_sub(1).and_then(|i| self.diag.get(i)).map(Vec::as_slice)
    }

    /// `tr(A^k)` for `k = 1..=k_max`.
    pub fn traces(&self) -> &[T] {
        &self.traces
    }
}

pub fn power_sequence<T: Scalar>(a: &SymMatrix<T>, k_max: usize) -> Result<PowerDiagonals<T>, MatrixError> {
    power_sequence_counted(a, k_max, &mut OpCounter::new())
}

/// Computes `diag(A^k)` for `k = 1..=k_max` by repeated right
/// multiplication. For adjacency matrices every entry of `A^k` is checked
/// against the walk-count bound `n^(k-1)`.
pub fn power_sequence_counted<T: Scalar>(
    a: &SymMatrix<T>,
    k_max: usize,
    ops: &mut OpCounter,
) -> Result<PowerDiagonals<T>, MatrixError> {
    if k_max < 1 {
        return Err(MatrixError::InvalidPower(k_max));
    }
    let adjacency = a.is_adjacency();
    let n = a.n();
    let base = a.as_matrix();
    let mut power = base.clone();
    ops.observe_bitlen(power.max_bitlen());
    let mut diag = Vec::with_capacity(k_max);
    let mut traces = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > 1 {
            power = mat_mul_counted(&power, base, ops)?;
        }
        if adjacency {
            check_walk_bound(&power, n, k)?;
        }
        diag.push(power.diagonal());
        traces.push(trace(&power));
    }
    Ok(PowerDiagonals { diag, traces })
}

pub(crate) fn check_walk_bound<T: Scalar>(power: &Matrix<T>, n: usize, k: usize) -> Result<(), MatrixError> {
    let bound = num_traits::pow(BigUint::from(n), k - 1);
    let bound_bits = bound.bits();
    for i in 0..n {
        for j in 0..n {
            let e = power.get(i, j);
            // fast reject on bit length before the exact comparison
            if e.bit_len() >= bound_bits && e.to_biguint().is_none_or(|x| x > bound) {
                return Err(MatrixError::EntryBoundExceeded { k, i, j });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactSymMatrix;

    fn big(rows: &[&[u32]]) -> Matrix<BigUint> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigUint::from(x)).collect()).collect()).unwrap()
    }

    fn k3() -> ExactSymMatrix {
        adjacency_matrix(&Graph::complete(3).unwrap())
    }

    #[test]
    fn adjacency_examples() {
        let a = k3();
        assert_eq!(a.as_matrix(), &big(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]));
        let e: ExactSymMatrix = adjacency_matrix(&Graph::empty(4).unwrap());
        assert!(e.as_matrix().is_zero());
        let p: ExactSymMatrix = adjacency_matrix(&Graph::path(3).unwrap());
        assert_eq!(p.as_matrix(), &big(&[&[0, 1, 0], &[1, 0, 1], &[0, 1, 0]]));
        assert!(p.is_adjacency());
    }

    #[test]
    fn multiplication_examples() {
        let a = k3();
        let id = Matrix::identity(3);
        assert_eq!(&mat_mul(&id, a.as_matrix()).unwrap(), a.as_matrix());
        let k2: ExactSymMatrix = adjacency_matrix(&Graph::complete(2).unwrap());
        assert_eq!(mat_mul(k2.as_matrix(), k2.as_matrix()).unwrap(), Matrix::identity(2));
        let sq = mat_mul(a.as_matrix(), a.as_matrix()).unwrap();
        assert_eq!(sq, big(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 2]]));
        assert_eq!(trace(&sq), BigUint::from(6u32));
        assert_eq!(
            mat_mul(&Matrix::<BigUint>::identity(2), &Matrix::identity(3)),
            Err(MatrixError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn general_products_use_real_multiplication() {
        let a = big(&[&[2, 3], &[3, 5]]);
        let b = big(&[&[7, 1], &[1, 4]]);
        assert_eq!(mat_mul(&a, &b).unwrap(), big(&[&[17, 14], &[26, 23]]));
        let f = Matrix::from_rows(vec![vec![0.5f64, 2.0], vec![2.0, 1.0]]).unwrap();
        let f2 = mat_mul(&f, &f).unwrap();
        assert_eq!(f2.get(0, 0), &4.25);
    }

    #[test]
    fn op_counts_for_one_product() {
        let mut ops = OpCounter::new();
        let a = k3();
        mat_mul_counted(a.as_matrix(), a.as_matrix(), &mut ops).unwrap();
        assert_eq!(ops.mults, 27);
        assert_eq!(ops.adds, 18);
        assert_eq!(ops.max_bitlen, 2);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&Matrix::<BigUint>::identity(4)), BigUint::from(4u32));
        assert_eq!(trace(&Matrix::<BigUint>::zeros(3)), BigUint::zero());
    }

    #[test]
    fn power_sequence_examples() {
        let k2: ExactSymMatrix = adjacency_matrix(&Graph::complete(2).unwrap());
        let d = power_sequence(&k2, 3).unwrap();
        let v = |xs: &[u32]| xs.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(d.get(1).unwrap(), v(&[0, 0]).as_slice());
        assert_eq!(d.get(2).unwrap(), v(&[1, 1]).as_slice());
        assert_eq!(d.get(3).unwrap(), v(&[0, 0]).as_slice());
        assert!(d.get(4).is_none());
        assert!(d.get(0).is_none());

        let d = power_sequence(&k3(), 3).unwrap();
        assert_eq!(d.get(2).unwrap(), v(&[2, 2, 2]).as_slice());
        assert_eq!(d.get(3).unwrap(), v(&[2, 2, 2]).as_slice());
        assert_eq!(d.traces()[1], BigUint::from(6u32));

        let z: ExactSymMatrix = adjacency_matrix(&Graph::empty(3).unwrap());
        let d = power_sequence(&z, 4).unwrap();
        for k in 1..=4 {
            assert!(d.get(k).unwrap().iter().all(Zero::is_zero));
        }
        assert_eq!(power_sequence(&z, 0), Err(MatrixError::InvalidPower(0)));
    }

    #[test]
    fn symmetry_is_validated() {
        assert_eq!(
            SymMatrix::from_rows(vec![vec![0u64, 1], vec![2, 0]]),
            Err(MatrixError::NotSymmetric { i: 0, j: 1 })
        );
        let s = SymMatrix::from_rows(vec![vec![0i64, -1], vec![-1, 0]]).unwrap();
        assert_eq!(s.first_negative(), Some((0, 1)));
    }

    #[test]
    fn permuted_conjugates() {
        let a: ExactSymMatrix = adjacency_matrix(&Graph::path(3).unwrap());
        let p = Permutation::new(vec![1, 0, 2]).unwrap();
        let g = crate::graph::apply_permutation(&Graph::path(3).unwrap(), &p).unwrap();
        assert_eq!(a.permuted(&p).unwrap(), adjacency_matrix(&g));
    }

    #[test]
    fn generic_scalars_agree() {
        let g = Graph::cycle(5).unwrap();
        let exact = power_sequence(&adjacency_matrix::<BigUint>(&g), 5).unwrap();
        let fixed = power_sequence(&adjacency_matrix::<u64>(&g), 5).unwrap();
        let float = power_sequence(&adjacency_matrix::<f64>(&g), 5).unwrap();
        for k in 1..=5 {
            for i in 0..5 {
                let e = &exact.get(k).unwrap()[i];
                assert_eq!(e, &BigUint::from(fixed.get(k).unwrap()[i]));
                assert_eq!(Some(e.clone()), float.get(k).unwrap()[i].to_biguint());
            }
        }
    }

    #[test]
    fn walk_bound_violation_is_reported() {
        // a matrix claiming to be A^2 of a 2-vertex graph with an entry of 3
        let m = big(&[&[3, 0], &[0, 1]]);
        assert_eq!(check_walk_bound(&m, 2, 2), Err(MatrixError::EntryBoundExceeded { k: 2, i: 0, j: 0 }));
        assert!(check_walk_bound(&big(&[&[2, 0], &[0, 1]]), 2, 2).is_ok());
    }
}
