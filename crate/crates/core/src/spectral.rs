//! Characteristic polynomials from power traces, and a probe of whether the
//! diagonals of `A^1 … A^n` pin down a symmetric matrix.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{random_permutation, random_regular, Seed};
use crate::matrix::{adjacency_matrix, power_sequence, Matrix, MatrixError, SymMatrix};
use crate::report::{Claim, FalsificationEvent, Instance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("at least one power trace is required")]
    NoTraces,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Coefficient field for Newton's identities.
pub trait Field: Clone + Debug + Num + Neg<Output = Self> + FromPrimitive {}

impl<T: Clone + Debug + Num + Neg<Output = T> + FromPrimitive> Field for T {}

/// Monic polynomial `det(λI − A)` with coefficients in ascending degree, so
/// `coeffs[n] == 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> CharPoly<T> {
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }
}

impl CharPoly<BigRational> {
    /// The coefficients as integers, or `None` if any is fractional.
    pub fn to_integer(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }
}

/// Newton's identities. With `g_j = tr(A^j)` for `j = 1..=n`, the elementary
/// symmetric functions satisfy `e_0 = 1` and
/// `m·e_m = Σ_{j=1..m} (−1)^{j−1} e_{m−j} g_j`, and `λ^{n−m}` has
/// coefficient `(−1)^m e_m`.
pub fn charpoly_from_traces<T: Field>(traces: &[T]) -> Result<CharPoly<T>, SpectralError> {
    let n = traces.len();
    if n == 0 {
        return Err(SpectralError::NoTraces);
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(T::one());
    for m in 1..=n {
        let mut s = T::zero();
        for j in 1..=m {
            let term = e[m - j].clone() * traces[j - 1].clone();
            s = if j % 2 == 1 { s + term } else { s - term };
        }
        e.push(s / T::from_usize(m).expect("m fits the field"));
    }
    let coeffs = (0..=n)
        .map(|d| {
            let m = n - d;
            if m.is_multiple_of(2) { e[m].clone() } else { -e[m].clone() }
        })
        .collect();
    Ok(CharPoly { coeffs })
}

/// Characteristic polynomial of an integer matrix, computed exactly.
pub fn charpoly_exact(a: &SymMatrix<BigUint>) -> CharPoly<BigRational> {
    let traces = power_sequence(a, a.n()).expect("n >= 1").traces().to_vec();
    let q = traces.into_iter().map(|t| BigRational::from_integer(BigInt::from(t))).collect::<Vec<_>>();
    charpoly_from_traces(&q).expect("n >= 1")
}

/// Characteristic polynomial in floating point. Only as accurate as the
/// power traces, which lose precision quickly as `n` grows.
pub fn charpoly_float(a: &SymMatrix<f64>) -> CharPoly<f64> {
    let traces = power_sequence(a, a.n()).expect("n >= 1").traces().to_vec();
    charpoly_from_traces(&traces).expect("n >= 1")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProbeResult {
    /// `diag(A^j) = diag(B^j)` for every `j = 1..n`.
    Identical,
    /// First power `k` and index `i` where the diagonals differ.
    FirstDifference { k: usize, i: usize },
}

/// Compares `diag(A^j)` with `diag(B^j)` for `j = 1..n`. Entries are compared
/// with [`Scalar::same`], which is exact for integer scalars and uses
/// [`crate::FLOAT_REL_TOL`] for floats.
pub fn diagonal_probe<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<ProbeResult, SpectralError> {
    if a.n() != b.n() {
        return Err(MatrixError::DimensionMismatch { left: a.n(), right: b.n() }.into());
    }
    for m in [a, b] {
        if let Some((i, j)) = m.first_negative() {
            return Err(MatrixError::Negative { i, j }.into());
        }
    }
    let n = a.n();
    let (da, db) = (power_sequence(a, n)?, power_sequence(b, n)?);
    for k in 1..=n {
        let (x, y) = (da.get(k).expect("k <= n"), db.get(k).expect("k <= n"));
        if let Some(i) = (0..n).find(|&i| !x[i].same(&y[i])) {
            return Ok(ProbeResult::FirstDifference { k, i });
        }
    }
    Ok(ProbeResult::Identical)
}

/// Families of random non-negative symmetric integer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFamily {
    /// 0/1 entries, diagonal included.
    ZeroOne,
    /// 0/1 entries with zero diagonal: graph adjacency matrices.
    Adjacency,
    /// Entries in `0..=3`.
    SmallInt,
    /// Adjacency matrix of a random regular graph.
    Regular,
    /// `Σ (P + Pᵀ)` over one or two random permutation matrices, so every
    /// row sums to the same value.
    EqualRowSums,
}

impl MatrixFamily {
    pub const ALL: [MatrixFamily; 5] = [
        MatrixFamily::ZeroOne,
        MatrixFamily::Adjacency,
        MatrixFamily::SmallInt,
        MatrixFamily::Regular,
        MatrixFamily::EqualRowSums,
    ];
}

/// How the second matrix of a probe pair is obtained from the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStrategy {
    /// Drawn independently from the same family.
    Independent,
    /// `Q A Qᵀ` for a random permutation `Q`.
    Relabeled,
    /// One symmetric entry pair of `A` changed by one.
    Perturbed,
}

impl PairStrategy {
    pub const ALL: [PairStrategy; 3] = [PairStrategy::Independent, PairStrategy::Relabeled, PairStrategy::Perturbed];
}

const DISTINCT_ATTEMPTS: usize = 32;

fn symmetric_from(n: usize, mut entry: impl FnMut(usize, usize) -> u32) -> SymMatrix<BigUint> {
    let mut m = Matrix::<BigUint>::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = BigUint::from(entry(i, j));
            m.set(j, i, v.clone());
            m.set(i, j, v);
        }
    }
    SymMatrix::new(m).expect("filled symmetrically")
}

pub fn random_matrix(n: usize, family: MatrixFamily, rng: &mut ChaCha8Rng) -> SymMatrix<BigUint> {
    match family {
        MatrixFamily::ZeroOne => symmetric_from(n, |_, _| rng.gen_range(0..=1)),
        MatrixFamily::Adjacency => symmetric_from(n, |i, j| if i == j { 0 } else { rng.gen_range(0..=1) }),
        MatrixFamily::SmallInt => symmetric_from(n, |_, _| rng.gen_range(0..=3)),
        MatrixFamily::Regular => {
            let degrees = (0..n).filter(|d| (n * d).is_multiple_of(2)).collect::<Vec<_>>();
            let d = *degrees.choose(rng).expect("d = 0 is always feasible");
            let g = random_regular(n, d, Seed(rng.next_u64())).expect("feasible degree");
            adjacency_matrix(&g)
        }
        MatrixFamily::EqualRowSums => {
            let mut counts = vec![0u32; n * n];
            for _ in 0..rng.gen_range(1..=2) {
                let p = random_permutation(n, Seed(rng.next_u64()));
                for i in 0..n {
                    let j = p.apply(i);
                    counts[i * n + j] += 1;
                    counts[j * n + i] += 1;
                }
            }
            symmetric_from(n, |i, j| counts[i * n + j])
        }
    }
}

fn perturbed(a: &SymMatrix<BigUint>, family: MatrixFamily, rng: &mut ChaCha8Rng) -> SymMatrix<BigUint> {
    let n = a.n();
    let (i, j) = if family == MatrixFamily::Adjacency && n >= 2 {
        let i = rng.gen_range(0..n - 1);
        (i, rng.gen_range(i + 1..n))
    } else {
        let i = rng.gen_range(0..n);
        (i, rng.gen_range(i..n))
    };
    let mut m = a.as_matrix().clone();
    let old = m.get(i, j).clone();
    let new = if old.is_zero() { BigUint::one() } else { old - 1u32 };
    m.set(i, j, new.clone());
    m.set(j, i, new);
    SymMatrix::new(m).expect("symmetric change")
}

/// One reproducible probe pair and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrial {
    pub index: u64,
    pub seed: Seed,
    pub n: usize,
    pub family: MatrixFamily,
    pub strategy: PairStrategy,
    pub left: SymMatrix<BigUint>,
    pub right: SymMatrix<BigUint>,
    pub result: ProbeResult,
}

/// Builds and probes trial `index` of a campaign seeded with `base`. The
/// trial depends only on `(base, index, n_min, n_max)`. The two matrices
/// always differ: if the chosen strategy keeps producing `A` itself, the
/// pair falls back to a perturbation.
pub fn probe_trial(base: Seed, index: u64, n_min: usize, n_max: usize) -> ProbeTrial {
    let seed = base.derive(index);
    let mut rng = seed.rng();
    let n = rng.gen_range(n_min.max(1)..=n_max.max(n_min).max(1));
    let family = *MatrixFamily::ALL.choose(&mut rng).expect("non-empty");
    let strategy = *PairStrategy::ALL.choose(&mut rng).expect("non-empty");
    let left = random_matrix(n, family, &mut rng);
    let mut right = None;
    for _ in 0..DISTINCT_ATTEMPTS {
        let candidate = match strategy {
            PairStrategy::Independent => random_matrix(n, family, &mut rng),
            PairStrategy::Relabeled => {
                let q = random_permutation(n, Seed(rng.next_u64()));
                left.permuted(&q).expect("length n")
            }
            PairStrategy::Perturbed => perturbed(&left, family, &mut rng),
        };
        if candidate != left {
            right = Some(candidate);
            break;
        }
    }
    let right = right.unwrap_or_else(|| perturbed(&left, family, &mut rng));
    let result = diagonal_probe(&left, &right).expect("same size, non-negative");
    ProbeTrial { index, seed, n, family, strategy, left, right, result }
}

impl ProbeTrial {
    /// The counterexample record for an `Identical` outcome on distinct
    /// matrices.
    pub fn falsification(&self) -> Option<FalsificationEvent> {
        if self.result != ProbeResult::Identical {
            return None;
        }
        let rows = |m: &SymMatrix<BigUint>| m.as_matrix().clone().into_rows();
        Some(FalsificationEvent {
            claim: Claim::DiagonalPowersDetermineMatrix,
            description: format!(
                "distinct {n}x{n} matrices ({family:?}, {strategy:?}, trial {index}, seed {seed}) agree on diag(A^j) for j = 1..{n}",
                n = self.n,
                family = self.family,
                strategy = self.strategy,
                index = self.index,
                seed = self.seed.0,
            ),
            left: Instance::matrix(&rows(&self.left)),
            right: Instance::matrix(&rows(&self.right)),
            trace: None,
            verdict: None,
        })
    }
}

/// A falsification event with the coordinates needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeEvent {
    pub base_seed: u64,
    pub trial: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub n: usize,
    pub family: MatrixFamily,
    pub strategy: PairStrategy,
    pub event: FalsificationEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub trials: u64,
    pub identical: u64,
    /// Number of trials whose first differing power was `k`.
    pub first_difference_by_k: BTreeMap<usize, u64>,
    pub events: Vec<ProbeEvent>,
}

/// Runs trials `0..trials` and collects every `Identical` outcome as a
/// falsification event.
pub fn probe_campaign(base: Seed, trials: u64, n_min: usize, n_max: usize) -> ProbeSummary {
    let mut summary = ProbeSummary { trials, identical: 0, first_difference_by_k: BTreeMap::new(), events: Vec::new() };
    for index in 0..trials {
        let t = probe_trial(base, index, n_min, n_max);
        match t.result {
            ProbeResult::FirstDifference { k, .. } => *summary.first_difference_by_k.entry(k).or_default() += 1,
            ProbeResult::Identical => {
                summary.identical += 1;
                summary.events.push(ProbeEvent {
                    base_seed: base.0,
                    trial: index,
                    n_min,
                    n_max,
                    n: t.n,
                    family: t.family,
                    strategy: t.strategy,
                    event: t.falsification().expect("identical outcome"),
                });
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Permutation};

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn ints(p: &CharPoly<BigRational>) -> Vec<i64> {
        p.to_integer().unwrap().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn newton_examples() {
        // K2: λ² − 1
        assert_eq!(ints(&charpoly_from_traces(&[q(0), q(2)]).unwrap()), vec![-1, 0, 1]);
        // K3: λ³ − 3λ − 2
        assert_eq!(ints(&charpoly_from_traces(&[q(0), q(6), q(6)]).unwrap()), vec![-2, -3, 0, 1]);
        assert_eq!(ints(&charpoly_from_traces(&vec![q(0); 4]).unwrap()), vec![0, 0, 0, 0, 1]);
        assert_eq!(charpoly_from_traces::<BigRational>(&[]), Err(SpectralError::NoTraces));
    }

    #[test]
    fn exact_charpoly_of_graphs() {
        let k3 = adjacency_matrix(&Graph::complete(3).unwrap());
        let p = charpoly_exact(&k3);
        assert_eq!(ints(&p), vec![-2, -3, 0, 1]);
        // eigenvalues of K3 are 2, -1, -1
        assert!(p.eval(&q(2)).is_zero());
        assert!(p.eval(&q(-1)).is_zero());
        // P3: λ³ − 2λ
        assert_eq!(ints(&charpoly_exact(&adjacency_matrix(&Graph::path(3).unwrap()))), vec![0, -2, 0, 1]);
    }

    #[test]
    fn float_charpoly_matches_exact() {
        let g = Graph::cycle(5).unwrap();
        let exact = ints(&charpoly_exact(&adjacency_matrix(&g)));
        let float = charpoly_float(&adjacency_matrix(&g));
        for (e, f) in exact.iter().zip(float.coeffs()) {
            assert!((*e as f64 - f).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_finds_first_difference() {
        let a = SymMatrix::from_rows(vec![vec![1u32, 0], vec![0, 0]].into_iter().map(|r| r.into_iter().map(BigUint::from).collect()).collect()).unwrap();
        let b = SymMatrix::from_rows(vec![vec![0u32, 0], vec![0, 1]].into_iter().map(|r| r.into_iter().map(BigUint::from).collect()).collect()).unwrap();
        assert_eq!(diagonal_probe(&a, &b).unwrap(), ProbeResult::FirstDifference { k: 1, i: 0 });
        assert_eq!(diagonal_probe(&a, &a).unwrap(), ProbeResult::Identical);
    }

    #[test]
    fn probe_rejects_bad_input() {
        let a = SymMatrix::from_rows(vec![vec![0i64, -1], vec![-1, 0]]).unwrap();
        let b = SymMatrix::from_rows(vec![vec![0i64, 1], vec![1, 0]]).unwrap();
        assert!(matches!(diagonal_probe(&a, &b), Err(SpectralError::Matrix(MatrixError::Negative { .. }))));
        let c = SymMatrix::from_rows(vec![vec![0i64]]).unwrap();
        assert!(matches!(diagonal_probe(&b, &c), Err(SpectralError::Matrix(MatrixError::DimensionMismatch { .. }))));
    }

    #[test]
    fn relabeled_cycle_is_identical() {
        // every vertex of C4 has the same closed-walk counts, so any
        // relabeling that changes the matrix still passes the probe
        let a = adjacency_matrix::<BigUint>(&Graph::cycle(4).unwrap());
        let b = a.permuted(&Permutation::new(vec![0, 2, 1, 3]).unwrap()).unwrap();
        assert_ne!(a, b);
        assert_eq!(diagonal_probe(&a, &b).unwrap(), ProbeResult::Identical);
    }

    #[test]
    fn float_probe_uses_tolerance() {
        let a = SymMatrix::from_rows(vec![vec![1.0f64, 0.5], vec![0.5, 2.0]]).unwrap();
        let b = SymMatrix::from_rows(vec![vec![1.0 + 1e-13, 0.5], vec![0.5, 2.0]]).unwrap();
        assert_eq!(diagonal_probe(&a, &b).unwrap(), ProbeResult::Identical);
        let c = SymMatrix::from_rows(vec![vec![1.001f64, 0.5], vec![0.5, 2.0]]).unwrap();
        assert_eq!(diagonal_probe(&a, &c).unwrap(), ProbeResult::FirstDifference { k: 1, i: 0 });
    }

    #[test]
    fn trials_are_reproducible_and_distinct() {
        for i in 0..200 {
            let t = probe_trial(Seed(17), i, 1, 6);
            assert_ne!(t.left, t.right);
            assert_eq!(t, probe_trial(Seed(17), i, 1, 6));
            assert!(t.left.first_negative().is_none());
        }
    }

    #[test]
    fn families_have_their_shape() {
        let mut rng = Seed(3).rng();
        for _ in 0..50 {
            let a = random_matrix(6, MatrixFamily::Adjacency, &mut rng);
            assert!(a.is_adjacency());
            let r = random_matrix(6, MatrixFamily::EqualRowSums, &mut rng);
            let sums = (0..6).map(|i| r.as_matrix().row(i).iter().sum::<BigUint>()).collect::<Vec<_>>();
            assert!(sums.iter().all(|s| *s == sums[0]));
            let g = random_matrix(6, MatrixFamily::Regular, &mut rng);
            let degs = (0..6).map(|i| g.as_matrix().row(i).iter().sum::<BigUint>()).collect::<Vec<_>>();
            assert!(degs.iter().all(|s| *s == degs[0]));
        }
    }
}
