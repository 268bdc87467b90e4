//! The diagonal-refinement isomorphism test.
//!
//! For `k = 2, 3, …, n` both graphs are carried along as relabeled
//! adjacency matrices `A_(k-1)` together with their running power. Each
//! round multiplies the power by the relabeled adjacency once, reads
//! `N^k` off the diagonal, sorts it inside every block of the current
//! ordered partition and relabels rows and columns accordingly. The sorted
//! diagonals `D_k` of the two graphs are then compared:
//!
//! * unequal: not isomorphic;
//! * equal and every block a singleton: isomorphic;
//! * equal at `k = n`: isomorphic.
//!
//! There is no other exit unless [`TestConfig::early_exit_on_stable`] is set.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{apply_permutation, Graph, Permutation};
use crate::matrix::{adjacency_matrix, mat_mul_counted, Matrix, OpCounter};
use crate::oracle::{exact_isomorphic, OracleError, DEFAULT_BUDGET};
use crate::refine::{refine_counted, OrderedPartition};

/// Graphs at least this large have their two pipelines run on separate threads.
const PARALLEL_MIN_N: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("no candidate mapping exists for a NotIsomorphic verdict")]
    NotIsomorphicVerdict,
    #[error("mapping of length {perm} between graphs on {n1} and {n2} vertices")]
    LengthMismatch { perm: usize, n1: usize, n2: usize },
    #[error("verdict was computed for graphs on {verdict_n} vertices, got {n}")]
    VerdictMismatch { verdict_n: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Isomorphic,
    NotIsomorphic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopRule {
    DiagonalMismatch,
    AllSingletons,
    ReachedN,
    /// Only produced with [`TestConfig::early_exit_on_stable`].
    Stabilized,
}

/// Cheap necessary condition that decided the pair before any matrix work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precheck {
    VertexCount,
    EdgeCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    /// Multiplicities only.
    #[default]
    Summary,
    /// Multiplicities plus both sorted diagonals at every order.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestConfig {
    /// Stop as soon as the block structure is unchanged from the previous
    /// order. Unsound in general; for benchmarking only.
    pub early_exit_on_stable: bool,
    /// Cross-check Isomorphic verdicts with the exact oracle for `n` up to
    /// this size.
    pub audit_max_n: Option<usize>,
    pub oracle_budget: u64,
    pub trace: TraceLevel,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            early_exit_on_stable: false,
            audit_max_n: None,
            oracle_budget: DEFAULT_BUDGET,
            trace: TraceLevel::Summary,
        }
    }
}

/// One order of the test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub k: usize,
    /// Block sizes of the first graph after refining on `N^k`.
    pub multiplicities: Vec<usize>,
    /// Block sizes of the second graph; equal to the first unless the
    /// diagonals differ.
    pub multiplicities_right: Vec<usize>,
    /// `D_k` of each graph, kept at [`TraceLevel::Full`].
    pub diagonals: Option<(Vec<BigUint>, Vec<BigUint>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Audit {
    Confirmed { mapping: Permutation, nodes_explored: u64 },
    Contradicted { nodes_explored: u64 },
    Unresolved { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub decision: Decision,
    pub decided_at_k: usize,
    pub stop_rule: StopRule,
    pub precheck: Option<Precheck>,
    pub n: usize,
    pub stages: Vec<Stage>,
    pub op_count: OpCounter,
    /// Final rearrangement of each graph: position to original vertex.
    pub left_order: Vec<usize>,
    pub right_order: Vec<usize>,
    pub audit: Option<Audit>,
}

impl Verdict {
    pub fn is_isomorphic(&self) -> bool {
        self.decision == Decision::Isomorphic
    }

    /// Block sizes after each order, starting at `k = 2`.
    pub fn multiplicity_history(&self) -> Vec<Vec<usize>> {
        self.stages.iter().map(|s| s.multiplicities.clone()).collect()
    }
}

/// Per-graph state: the relabeled adjacency matrix, its current power and
/// the ordered partition over positions.
struct Pipeline {
    adj: Matrix<BigUint>,
    power: Matrix<BigUint>,
    order: Vec<usize>,
    partition: OrderedPartition,
    ops: OpCounter,
}

impl Pipeline {
    fn new(g: &Graph) -> Self {
        let adj = adjacency_matrix::<BigUint>(g).into_matrix();
        let mut ops = OpCounter::new();
        ops.observe_bitlen(adj.max_bitlen());
        Pipeline {
            power: adj.clone(),
            adj,
            order: (0..g.n()).collect(),
            partition: OrderedPartition::unit(g.n()),
            ops,
        }
    }

    /// Raises the power by one, refines on the new diagonal and relabels.
    /// Returns `D_k` in the new order.
    fn advance(&mut self) -> Vec<BigUint> {
        self.power = mat_mul_counted(&self.power, &self.adj, &mut self.ops).expect("square matrices of equal size");
        let values = self.power.diagonal();
        let r = refine_counted(&self.partition, &values, &mut self.ops).expect("one value per position");
        let p = &r.permutation;
        if !p.is_identity() {
            self.adj = self.adj.permuted(p).expect("same size");
            self.power = self.power.permuted(p).expect("same size");
            let mut order = vec![0; self.order.len()];
            for (pos, &v) in self.order.iter().enumerate() {
                order[p.apply(pos)] = v;
            }
            self.order = order;
        }
        self.partition = r.partition;
        let mut sorted = vec![BigUint::default(); values.len()];
        for (pos, v) in values.into_iter().enumerate() {
            sorted[p.apply(pos)] = v;
        }
        sorted
    }
}

fn advance_both(a: &mut Pipeline, b: &mut Pipeline, parallel: bool) -> (Vec<BigUint>, Vec<BigUint>) {
    if parallel {
        rayon::join(|| a.advance(), || b.advance())
    } else {
        (a.advance(), b.advance())
    }
}

/// Runs the diagonal-refinement test on `g1` and `g2`.
pub fn iso_test(g1: &Graph, g2: &Graph, config: &TestConfig) -> Verdict {
    let prechecked = |precheck| Verdict {
        decision: Decision::NotIsomorphic,
        decided_at_k: 2,
        stop_rule: StopRule::DiagonalMismatch,
        precheck: Some(precheck),
        n: g1.n(),
        stages: Vec::new(),
        op_count: OpCounter::new(),
        left_order: (0..g1.n()).collect(),
        right_order: (0..g2.n()).collect(),
        audit: None,
    };
    if g1.n() != g2.n() {
        return prechecked(Precheck::VertexCount);
    }
    if g1.edge_count() != g2.edge_count() {
        return prechecked(Precheck::EdgeCount);
    }

    let n = g1.n();
    let parallel = n >= PARALLEL_MIN_N;
    let (mut left, mut right) = (Pipeline::new(g1), Pipeline::new(g2));
    let mut stages = Vec::new();
    let mut comparisons = 0u64;
    let last_k = n.max(2);
    let mut outcome = None;
    for k in 2..=last_k {
        let before = left.partition.clone();
        let (d1, d2) = advance_both(&mut left, &mut right, parallel);
        let mismatch = {
            let mut equal = true;
            for (x, y) in d1.iter().zip(&d2) {
                comparisons += 1;
                if x != y {
                    equal = false;
                    break;
                }
            }
            !equal
        };
        stages.push(Stage {
            k,
            multiplicities: left.partition.multiplicities().to_vec(),
            multiplicities_right: right.partition.multiplicities().to_vec(),
            diagonals: (config.trace == TraceLevel::Full).then_some((d1, d2)),
        });
        let rule = if mismatch {
            Some(StopRule::DiagonalMismatch)
        } else if left.partition.is_discrete() {
            Some(StopRule::AllSingletons)
        } else if k == last_k {
            Some(StopRule::ReachedN)
        } else if config.early_exit_on_stable && k > 2 && left.partition == before {
            Some(StopRule::Stabilized)
        } else {
            None
        };
        if let Some(rule) = rule {
            outcome = Some((k, rule));
            break;
        }
    }
    let (decided_at_k, stop_rule) = outcome.expect("the loop always reaches a stopping rule");
    let mut op_count = left.ops;
    op_count.merge(&right.ops);
    op_count.comparisons += comparisons;
    let decision = match stop_rule {
        StopRule::DiagonalMismatch => Decision::NotIsomorphic,
        _ => Decision::Isomorphic,
    };
    let mut verdict = Verdict {
        decision,
        decided_at_k,
        stop_rule,
        precheck: None,
        n,
        stages,
        op_count,
        left_order: left.order,
        right_order: right.order,
        audit: None,
    };
    if decision == Decision::Isomorphic && config.audit_max_n.is_some_and(|m| n <= m) {
        verdict.audit = Some(audit_with_oracle(g1, g2, config.oracle_budget));
    }
    verdict
}

fn audit_with_oracle(g1: &Graph, g2: &Graph, budget: u64) -> Audit {
    match exact_isomorphic(g1, g2, budget) {
        Ok(r) => match r.outcome {
            crate::oracle::OracleOutcome::IsomorphicVia { mapping } => {
                Audit::Confirmed { mapping, nodes_explored: r.nodes_explored }
            }
            crate::oracle::OracleOutcome::NonIsomorphic => Audit::Contradicted { nodes_explored: r.nodes_explored },
        },
        Err(e @ OracleError::BudgetExhausted { .. }) => Audit::Unresolved { reason: e.to_string() },
        Err(e) => Audit::Unresolved { reason: e.to_string() },
    }
}

/// For an AllSingletons verdict, the bijection pairing the `i`-th
/// rearranged vertex of `g1` with the `i`-th of `g2`. `None` for any other
/// Isomorphic verdict.
pub fn extract_candidate_mapping(v: &Verdict, g1: &Graph, g2: &Graph) -> Result<Option<Permutation>, IsoError> {
    if v.decision == Decision::NotIsomorphic {
        return Err(IsoError::NotIsomorphicVerdict);
    }
    for g in [g1, g2] {
        if g.n() != v.n {
            return Err(IsoError::VerdictMismatch { verdict_n: v.n, n: g.n() });
        }
    }
    if v.stop_rule != StopRule::AllSingletons {
        return Ok(None);
    }
    let mut map = vec![0; v.n];
    for (&a, &b) in v.left_order.iter().zip(&v.right_order) {
        map[a] = b;
    }
    Ok(Some(Permutation::new(map).expect("both orders are permutations")))
}

/// True iff relabeling `g1` by `p` yields exactly `g2`.
pub fn verify_mapping(g1: &Graph, g2: &Graph, p: &Permutation) -> Result<bool, IsoError> {
    if p.len() != g1.n() || g1.n() != g2.n() {
        return Err(IsoError::LengthMismatch { perm: p.len(), n1: g1.n(), n2: g2.n() });
    }
    Ok(apply_permutation(g1, p).expect("length checked") == *g2)
}

/// Outcome of checking the candidate mapping of an Isomorphic verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub mapping: Option<Permutation>,
    pub verified: Option<bool>,
}

impl Certificate {
    /// A candidate mapping exists but does not map `g1` onto `g2`.
    pub fn is_refuted(&self) -> bool {
        self.verified == Some(false)
    }
}

/// Extracts and verifies the candidate mapping, if the verdict has one.
pub fn certify(v: &Verdict, g1: &Graph, g2: &Graph) -> Certificate {
    match extract_candidate_mapping(v, g1, g2) {
        Ok(Some(p)) => {
            let ok = verify_mapping(g1, g2, &p).unwrap_or(false);
            Certificate { mapping: Some(p), verified: Some(ok) }
        }
        _ => Certificate { mapping: None, verified: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g1: &Graph, g2: &Graph) -> Verdict {
        iso_test(g1, g2, &TestConfig { trace: TraceLevel::Full, ..TestConfig::default() })
    }

    #[test]
    fn triangle_vs_path() {
        let v = run(&Graph::complete(3).unwrap(), &Graph::path(3).unwrap());
        // same n, different edge counts: decided before matrix work
        assert_eq!(v.decision, Decision::NotIsomorphic);
        assert_eq!(v.decided_at_k, 2);
        assert_eq!(v.precheck, Some(Precheck::EdgeCount));
    }

    #[test]
    fn degree_mismatch_at_order_two() {
        // star vs path on 4 vertices: both have 3 edges
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let v = run(&star, &Graph::path(4).unwrap());
        assert_eq!((v.decision, v.decided_at_k, v.stop_rule), (Decision::NotIsomorphic, 2, StopRule::DiagonalMismatch));
        assert_eq!(v.precheck, None);
        let (d1, d2) = v.stages[0].diagonals.clone().unwrap();
        assert_eq!(d1, [1u32, 1, 1, 3].map(BigUint::from).to_vec());
        assert_eq!(d2, [1u32, 1, 2, 2].map(BigUint::from).to_vec());
    }

    #[test]
    fn cycle_vs_two_triangles_at_order_three() {
        let k3 = Graph::complete(3).unwrap();
        let v = run(&Graph::cycle(6).unwrap(), &k3.disjoint_union(&k3));
        assert_eq!((v.decision, v.decided_at_k, v.stop_rule), (Decision::NotIsomorphic, 3, StopRule::DiagonalMismatch));
        assert_eq!(v.multiplicity_history(), vec![vec![6], vec![6]]);
        let (d1, d2) = v.stages[1].diagonals.clone().unwrap();
        assert_eq!(d1, vec![BigUint::from(0u32); 6]);
        assert_eq!(d2, vec![BigUint::from(2u32); 6]);
    }

    #[test]
    fn vertex_transitive_runs_to_n() {
        let c5 = Graph::cycle(5).unwrap();
        let p = Permutation::new(vec![2, 4, 1, 0, 3]).unwrap();
        let v = run(&c5, &apply_permutation(&c5, &p).unwrap());
        assert_eq!((v.decision, v.decided_at_k, v.stop_rule), (Decision::Isomorphic, 5, StopRule::ReachedN));
        assert_eq!(v.stages.len(), 4);
        assert_eq!(extract_candidate_mapping(&v, &c5, &c5).unwrap(), None);
    }

    #[test]
    fn early_exit_flag_stops_on_stable_partition() {
        let c5 = Graph::cycle(5).unwrap();
        let cfg = TestConfig { early_exit_on_stable: true, ..TestConfig::default() };
        let v = iso_test(&c5, &c5, &cfg);
        assert_eq!((v.decided_at_k, v.stop_rule), (3, StopRule::Stabilized));
    }

    #[test]
    fn singleton_stop_on_asymmetric_graph() {
        let g = crate::oracle::enumerate_labeled_graphs(6)
            .unwrap()
            .find(|g| iso_test(g, g, &TestConfig::default()).stop_rule == StopRule::AllSingletons)
            .expect("some 6-vertex graph has pairwise distinct walk profiles");
        let p = Permutation::new(vec![4, 0, 5, 2, 1, 3]).unwrap();
        let h = apply_permutation(&g, &p).unwrap();
        let v = run(&g, &h);
        assert_eq!(v.stop_rule, StopRule::AllSingletons);
        let c = certify(&v, &g, &h);
        assert_eq!(c.verified, Some(true));
        assert_eq!(c.mapping, Some(p));
    }

    #[test]
    fn mapping_errors() {
        let k3 = Graph::complete(3).unwrap();
        let p3 = Graph::path(3).unwrap();
        let v = run(&k3, &p3);
        assert_eq!(extract_candidate_mapping(&v, &k3, &p3), Err(IsoError::NotIsomorphicVerdict));
        assert!(verify_mapping(&k3, &k3, &Permutation::identity(3)).unwrap());
        for m in [[0, 1, 2], [2, 0, 1], [1, 0, 2]] {
            assert!(!verify_mapping(&k3, &p3, &Permutation::new(m.to_vec()).unwrap()).unwrap());
        }
        assert!(verify_mapping(&k3, &k3, &Permutation::identity(2)).is_err());
    }

    #[test]
    fn tiny_graphs() {
        let one = Graph::empty(1).unwrap();
        let v = run(&one, &one);
        assert_eq!((v.decision, v.decided_at_k, v.stop_rule), (Decision::Isomorphic, 2, StopRule::AllSingletons));
        let k2 = Graph::complete(2).unwrap();
        let v = run(&k2, &k2);
        assert_eq!((v.decision, v.decided_at_k, v.stop_rule), (Decision::Isomorphic, 2, StopRule::ReachedN));
        let v = run(&one, &k2);
        assert_eq!(v.precheck, Some(Precheck::VertexCount));
    }

    #[test]
    fn audit_confirms() {
        let c5 = Graph::cycle(5).unwrap();
        let cfg = TestConfig { audit_max_n: Some(16), ..TestConfig::default() };
        let v = iso_test(&c5, &c5, &cfg);
        assert!(matches!(v.audit, Some(Audit::Confirmed { .. })));
        let cfg = TestConfig { audit_max_n: Some(4), ..TestConfig::default() };
        assert_eq!(iso_test(&c5, &c5, &cfg).audit, None);
    }

    #[test]
    fn k2_op_counts() {
        let k2 = Graph::complete(2).unwrap();
        let v = iso_test(&k2, &k2, &TestConfig::default());
        // one 2x2 product per graph: 8 mults, 4 adds each
        assert_eq!(v.op_count.mults, 16);
        assert_eq!(v.op_count.adds, 8);
        assert_eq!(v.op_count.max_bitlen, 1);
    }
}
