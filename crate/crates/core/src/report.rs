//! Serializable reports: verdict documents and falsification events.
//!
//! Big integers are written as decimal strings so that no JSON consumer
//! silently rounds them.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::format::{emit_graph6, parse_graph6, FormatError};
use crate::graph::{Graph, Permutation};
use crate::iso::{certify, Audit, Decision, Precheck, Stage, StopRule, Verdict};
use crate::matrix::OpCounter;

/// A statement checked against concrete instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Equal diagonals of `A^j` and `B^j` for `j = 1..n` force `A = B`.
    DiagonalPowersDetermineMatrix,
    /// Equal diagonals with every block a singleton means isomorphic.
    SingletonStopRule,
    /// Equal sorted diagonals up to order `n` means isomorphic.
    EqualDiagonalsImplyIsomorphism,
    /// Relabeling a graph never changes its sorted diagonals.
    RelabelingInvariance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instance {
    Graph { graph6: String },
    Matrix { matrix: Vec<Vec<String>> },
}

impl Instance {
    pub fn graph(g: &Graph) -> Self {
        Instance::Graph { graph6: emit_graph6(g) }
    }

    pub fn matrix<T: ToString>(rows: &[Vec<T>]) -> Self {
        Instance::Matrix { matrix: rows.iter().map(|r| r.iter().map(T::to_string).collect()).collect() }
    }

    pub fn to_graph(&self) -> Option<Result<Graph, FormatError>> {
        match self {
            Instance::Graph { graph6 } => Some(parse_graph6(graph6)),
            Instance::Matrix { .. } => None,
        }
    }
}

/// A concrete, self-contained counterexample to a [`Claim`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsificationEvent {
    pub claim: Claim,
    pub description: String,
    pub left: Instance,
    pub right: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<StageReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub k: usize,
    pub multiplicities: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities_right: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_diagonal: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_diagonal: Option<Vec<String>>,
}

fn decimal(xs: &[BigUint]) -> Vec<String> {
    xs.iter().map(BigUint::to_string).collect()
}

impl From<&Stage> for StageReport {
    fn from(s: &Stage) -> Self {
        StageReport {
            k: s.k,
            multiplicities: s.multiplicities.clone(),
            multiplicities_right: (s.multiplicities_right != s.multiplicities).then(|| s.multiplicities_right.clone()),
            left_diagonal: s.diagonals.as_ref().map(|d| decimal(&d.0)),
            right_diagonal: s.diagonals.as_ref().map(|d| decimal(&d.1)),
        }
    }
}

/// The decision part of a verdict, without trace or counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub decision: Decision,
    pub decided_at_k: usize,
    pub stop_rule: StopRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precheck: Option<Precheck>,
}

impl From<&Verdict> for VerdictSummary {
    fn from(v: &Verdict) -> Self {
        VerdictSummary {
            decision: v.decision,
            decided_at_k: v.decided_at_k,
            stop_rule: v.stop_rule,
            precheck: v.precheck,
        }
    }
}

/// The JSON document describing one test run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub decision: Decision,
    pub decided_at_k: usize,
    pub stop_rule: StopRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precheck: Option<Precheck>,
    pub n: usize,
    pub multiplicity_history: Vec<Vec<usize>>,
    pub op_count: OpCounter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_mapping: Option<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping_verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsification_event: Option<FalsificationEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Audit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<StageReport>>,
}

pub fn stage_reports(v: &Verdict) -> Vec<StageReport> {
    v.stages.iter().map(StageReport::from).collect()
}

/// Builds the report for `v`, extracting and verifying the candidate
/// mapping and attaching falsification events for refuted mappings and
/// audit contradictions.
pub fn verdict_report(v: &Verdict, g1: &Graph, g2: &Graph, include_trace: bool) -> VerdictReport {
    let cert = if v.is_isomorphic() { Some(certify(v, g1, g2)) } else { None };
    let mut event = None;
    if cert.as_ref().is_some_and(|c| c.is_refuted()) {
        event = Some(falsification(
            Claim::SingletonStopRule,
            "all blocks are singletons and the diagonals agree, but the position-wise mapping is not an isomorphism",
            v,
            g1,
            g2,
        ));
    } else if matches!(v.audit, Some(Audit::Contradicted { .. })) {
        event = Some(falsification(
            Claim::EqualDiagonalsImplyIsomorphism,
            "sorted diagonals agree at every order tested but the exact search finds no isomorphism",
            v,
            g1,
            g2,
        ));
    }
    let (mapping, verified) = match cert {
        Some(c) => (c.mapping, c.verified),
        None => (None, None),
    };
    VerdictReport {
        decision: v.decision,
        decided_at_k: v.decided_at_k,
        stop_rule: v.stop_rule,
        precheck: v.precheck,
        n: v.n,
        multiplicity_history: v.multiplicity_history(),
        op_count: v.op_count,
        candidate_mapping: mapping,
        mapping_verified: verified,
        falsification_event: event,
        audit: v.audit.clone(),
        trace: include_trace.then(|| stage_reports(v)),
    }
}

/// A graph-pair falsification event embedding both graphs and the trace.
pub fn falsification(claim: Claim, description: &str, v: &Verdict, g1: &Graph, g2: &Graph) -> FalsificationEvent {
    FalsificationEvent {
        claim,
        description: description.to_string(),
        left: Instance::graph(g1),
        right: Instance::graph(g2),
        trace: Some(stage_reports(v)),
        verdict: Some(VerdictSummary::from(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::{iso_test, TestConfig, TraceLevel};

    #[test]
    fn report_json_shape() {
        let k3 = Graph::complete(3).unwrap();
        let c3 = Graph::cycle(3).unwrap();
        let cfg = TestConfig { trace: TraceLevel::Full, ..TestConfig::default() };
        let v = iso_test(&k3, &c3, &cfg);
        let r = verdict_report(&v, &k3, &c3, true);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["decision"], "Isomorphic");
        assert_eq!(json["stop_rule"], "ReachedN");
        assert_eq!(json["decided_at_k"], 3);
        assert_eq!(json["multiplicity_history"], serde_json::json!([[3], [3]]));
        assert_eq!(json["trace"][0]["left_diagonal"], serde_json::json!(["2", "2", "2"]));
        assert!(json.get("candidate_mapping").is_none());
        let back: VerdictReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn instances_roundtrip() {
        let g = Graph::path(4).unwrap();
        let i = Instance::graph(&g);
        assert_eq!(i.to_graph().unwrap().unwrap(), g);
        let m = Instance::matrix(&[vec![1u32, 2], vec![2, 0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"matrix":[["1","2"],["2","0"]]}"#);
        assert_eq!(serde_json::from_str::<Instance>(&s).unwrap(), m);
    }
}
