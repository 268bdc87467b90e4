//! Graph isomorphism by refinement on closed-walk counts, audited against
//! an exact backtracking search.
//!
//! For `k = 2, 3, …` the number of closed walks of length `k` through each
//! vertex is read off the diagonal of `A^k`. Vertices are sorted by these
//! counts inside the blocks left by earlier orders, and the two graphs are
//! compared on their sorted diagonals. [`iso_test`] implements the test,
//! [`exact_isomorphic`] is the independent oracle, and the [`hunt`] and
//! [`spectral`] modules look for inputs where the two disagree.
//!
//! The matrix layer is generic over [`Scalar`]; the aliases below name the
//! concrete instantiations used throughout.

pub mod bench;
pub mod format;
pub mod gen;
pub mod graph;
pub mod hunt;
pub mod iso;
pub mod matrix;
pub mod oracle;
pub mod refine;
pub mod report;
pub mod scalar;
pub mod spectral;

use num_bigint::BigUint;
use num_rational::BigRational;

pub use format::{emit_graph6, parse_graph, parse_graph6, FormatError, GraphFormat};
pub use graph::{apply_permutation, Graph, GraphError, Permutation};
pub use iso::{iso_test, verify_mapping, Decision, StopRule, TestConfig, Verdict};
pub use matrix::{adjacency_matrix, power_sequence, Matrix, MatrixError, OpCounter, SymMatrix};
pub use oracle::{exact_isomorphic, OracleOutcome, OracleResult};
pub use scalar::{Scalar, FLOAT_REL_TOL};
pub use spectral::{charpoly_from_traces, diagonal_probe, CharPoly, ProbeResult};

/// Exact non-negative integer matrices, as used by the isomorphism test.
pub type ExactSymMatrix = SymMatrix<BigUint>;
/// Floating-point matrices for quick spectral checks.
pub type RealSymMatrix = SymMatrix<f64>;
/// Characteristic polynomial with exact rational coefficients.
pub type ExactCharPoly = CharPoly<BigRational>;
