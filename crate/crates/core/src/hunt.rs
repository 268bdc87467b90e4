//! Batch audits of the refinement test against the exact oracle.
//!
//! Pairs come either from a graph6 corpus (every same-size pair) or from a
//! generator spec. Each pair is run through [`iso_test`] and, when small
//! enough, through [`exact_isomorphic`]; the two answers are reconciled into
//! a [`HuntRecord`]. Pairs are processed in parallel chunks and records are
//! emitted in pair order, so output is identical for any job count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::format::{emit_graph6, parse_graph6, FormatError};
use crate::gen::{gnm, gnp, random_permutation, random_regular, CorpusEntry, GenError, ManifestEntry, Seed};
use crate::graph::{apply_permutation, Graph};
use crate::iso::{certify, iso_test, Decision, StopRule, TestConfig, TraceLevel, Verdict};
use crate::oracle::{exact_isomorphic, labeled_graph, labeled_graph_count, OracleError, DEFAULT_BUDGET};
use crate::report::{falsification, Claim, FalsificationEvent};

pub const DEFAULT_AUDIT_MAX_N: usize = 16;

/// Largest `n` accepted by the `exhaustive` generator.
pub const EXHAUSTIVE_MAX_N: usize = 5;

const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum HuntError {
    #[error("bad generator spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuntConfig {
    /// Pairs with more vertices are not checked by the oracle.
    pub audit_max_n: usize,
    pub oracle_budget: u64,
    pub early_exit_on_stable: bool,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for HuntConfig {
    fn default() -> Self {
        HuntConfig { audit_max_n: DEFAULT_AUDIT_MAX_N, oracle_budget: DEFAULT_BUDGET, early_exit_on_stable: false, jobs: None }
    }
}

/// One candidate pair with a label describing where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct HuntPair {
    pub index: u64,
    pub source: String,
    pub left: Graph,
    pub right: Graph,
    /// Generator provenance for both graphs; empty for corpus pairs.
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HuntStatus {
    /// Both answers match, or an Isomorphic verdict came with a verified
    /// mapping.
    Agreement,
    /// The answers conflict, or a candidate mapping failed verification.
    Disagreement,
    /// The oracle did not finish, or the pair is too large to audit and the
    /// test said Isomorphic without a verified mapping.
    Unresolved,
    /// Too large to audit and the test said NotIsomorphic. Not counted as
    /// agreement.
    NotAudited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub isomorphic: bool,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuntRecord {
    pub index: u64,
    pub source: String,
    pub n: usize,
    pub left: String,
    pub right: String,
    pub decision: Decision,
    pub decided_at_k: usize,
    pub stop_rule: StopRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping_verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    pub status: HuntStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsification_event: Option<FalsificationEvent>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuntSummary {
    pub pairs: u64,
    pub agreements: u64,
    pub disagreements: u64,
    pub unresolved: u64,
    pub not_audited: u64,
    pub disagreements_by_claim: BTreeMap<String, u64>,
}

impl HuntSummary {
    fn add(&mut self, r: &HuntRecord) {
        self.pairs += 1;
        match r.status {
            HuntStatus::Agreement => self.agreements += 1,
            HuntStatus::Disagreement => self.disagreements += 1,
            HuntStatus::Unresolved => self.unresolved += 1,
            HuntStatus::NotAudited => self.not_audited += 1,
        }
        if let Some(e) = &r.falsification_event {
            let key = serde_json::to_value(e.claim).expect("plain enum");
            *self.disagreements_by_claim.entry(key.as_str().expect("string").to_string()).or_default() += 1;
        }
    }

    /// 3 if any disagreement was found, else 4 if anything is unresolved,
    /// else 0.
    pub fn exit_code(&self) -> i32 {
        if self.disagreements > 0 {
            3
        } else if self.unresolved > 0 {
            4
        } else {
            0
        }
    }
}

/// A line of the JSON-lines hunt stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HuntLine {
    Record(HuntRecord),
    Summary(HuntSummary),
}

fn test_config(cfg: &HuntConfig, trace: TraceLevel) -> TestConfig {
    TestConfig { early_exit_on_stable: cfg.early_exit_on_stable, audit_max_n: None, oracle_budget: cfg.oracle_budget, trace }
}

/// Runs both deciders on one pair and reconciles them.
pub fn hunt_pair(pair: &HuntPair, cfg: &HuntConfig) -> HuntRecord {
    let (g1, g2) = (&pair.left, &pair.right);
    let v = iso_test(g1, g2, &test_config(cfg, TraceLevel::Summary));
    let cert = v.is_isomorphic().then(|| certify(&v, g1, g2));
    let verified = cert.as_ref().and_then(|c| c.verified);
    let mut record = HuntRecord {
        index: pair.index,
        source: pair.source.clone(),
        n: g1.n(),
        left: emit_graph6(g1),
        right: emit_graph6(g2),
        decision: v.decision,
        decided_at_k: v.decided_at_k,
        stop_rule: v.stop_rule,
        mapping_verified: verified,
        oracle: None,
        status: HuntStatus::Agreement,
        reason: None,
        falsification_event: None,
    };

    if verified == Some(false) {
        record.status = HuntStatus::Disagreement;
        record.falsification_event = Some(event(
            cfg,
            g1,
            g2,
            Claim::SingletonStopRule,
            "every block is a singleton and the diagonals agree, but the position-wise mapping is not an isomorphism",
        ));
        return record;
    }

    if g1.n() > cfg.audit_max_n || g2.n() > cfg.audit_max_n {
        (record.status, record.reason) = match (v.decision, verified) {
            (Decision::Isomorphic, Some(true)) => (HuntStatus::Agreement, Some("candidate mapping verified".into())),
            (Decision::Isomorphic, _) => (HuntStatus::Unresolved, Some(format!("n above audit threshold {}", cfg.audit_max_n))),
            (Decision::NotIsomorphic, _) => (HuntStatus::NotAudited, Some(format!("n above audit threshold {}", cfg.audit_max_n))),
        };
        return record;
    }

    match exact_isomorphic(g1, g2, cfg.oracle_budget) {
        Err(e @ OracleError::BudgetExhausted { .. }) | Err(e @ OracleError::SelfCheckFailed) => {
            record.status = HuntStatus::Unresolved;
            record.reason = Some(e.to_string());
        }
        Err(e @ OracleError::EnumerationTooLarge(_)) => unreachable!("{e}"),
        Ok(o) => {
            let oracle_iso = o.is_isomorphic();
            record.oracle = Some(OracleSummary { isomorphic: oracle_iso, nodes_explored: o.nodes_explored });
            match (v.is_isomorphic(), oracle_iso) {
                (true, true) | (false, false) => {}
                (true, false) => {
                    record.status = HuntStatus::Disagreement;
                    record.falsification_event = Some(event(
                        cfg,
                        g1,
                        g2,
                        Claim::EqualDiagonalsImplyIsomorphism,
                        "sorted diagonals agree at every order tested but the exact search finds no isomorphism",
                    ));
                }
                (false, true) => {
                    record.status = HuntStatus::Disagreement;
                    record.falsification_event = Some(event(
                        cfg,
                        g1,
                        g2,
                        Claim::RelabelingInvariance,
                        "the exact search finds an isomorphism but the sorted diagonals differ",
                    ));
                }
            }
        }
    }
    record
}

fn event(cfg: &HuntConfig, g1: &Graph, g2: &Graph, claim: Claim, description: &str) -> FalsificationEvent {
    // rerun with the full trace so the event stands on its own
    let v: Verdict = iso_test(g1, g2, &test_config(cfg, TraceLevel::Full));
    falsification(claim, description, &v, g1, g2)
}

/// Rebuilds the pair behind a record from its graph6 strings and runs it
/// again.
pub fn reproduce(record: &HuntRecord, cfg: &HuntConfig) -> Result<HuntRecord, FormatError> {
    let pair = HuntPair {
        index: record.index,
        source: record.source.clone(),
        left: parse_graph6(&record.left)?,
        right: parse_graph6(&record.right)?,
        manifest: Vec::new(),
    };
    Ok(hunt_pair(&pair, cfg))
}

/// Processes `pairs` and passes each record to `sink` in pair order.
pub fn run_hunt<I, F>(pairs: I, cfg: &HuntConfig, mut sink: F) -> Result<HuntSummary, HuntError>
where
    I: IntoIterator<Item = HuntPair>,
    F: FnMut(&HuntPair, &HuntRecord) -> io::Result<()>,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| HuntError::Pool(e.to_string()))?;
    let mut summary = HuntSummary::default();
    let mut pairs = pairs.into_iter().peekable();
    while pairs.peek().is_some() {
        let chunk = pairs.by_ref().take(CHUNK).collect::<Vec<_>>();
        let records = pool.install(|| chunk.par_iter().map(|p| hunt_pair(p, cfg)).collect::<Vec<_>>());
        for (p, r) in chunk.iter().zip(&records) {
            summary.add(r);
            sink(p, r).map_err(|e| HuntError::Pool(format!("output: {e}")))?;
        }
    }
    Ok(summary)
}

/// Writes a disagreement record to `dir/disagreement-<index>.json`.
pub fn persist_record(dir: &Path, record: &HuntRecord) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("disagreement-{:08}.json", record.index));
    fs::write(&path, serde_json::to_vec_pretty(record).expect("serializable"))?;
    Ok(path)
}

/// Every pair `i < j` of corpus graphs with the same vertex count.
pub fn corpus_pairs(entries: Vec<CorpusEntry>) -> impl Iterator<Item = HuntPair> {
    let mut out = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if entries[i].graph.n() == entries[j].graph.n() {
                out.push((i, j));
            }
        }
    }
    out.into_iter().enumerate().map(move |(index, (i, j))| HuntPair {
        index: index as u64,
        source: format!("corpus:lines={},{}", entries[i].line, entries[j].line),
        left: entries[i].graph.clone(),
        right: entries[j].graph.clone(),
        manifest: Vec::new(),
    })
}

/// A generated pair source.
///
/// * `permuted:n=N,count=C,seed=S[,p=P]`: `G(n,p)` graphs (default
///   `p = 0.5`) paired with a random relabeling of themselves.
/// * `regular:n=N,d=D,count=C,seed=S`: random `d`-regular graphs; even
///   indices pair a graph with a relabeling of itself, odd indices with an
///   independent `d`-regular graph.
/// * `gnp:n=N,p=P,count=C,seed=S`: two independent `G(n,p)` graphs.
/// * `exhaustive:n=N`: every pair `i < j` of labeled graphs on `N <= 5`
///   vertices.
/// * `sample:n=N,count=C,seed=S`: even indices draw two uniform labeled
///   graphs, odd indices two uniform graphs with the same edge count.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSpec {
    Permuted { n: usize, count: u64, seed: u64, p: f64 },
    Regular { n: usize, d: usize, count: u64, seed: u64 },
    Gnp { n: usize, p: f64, count: u64, seed: u64 },
    Exhaustive { n: usize },
    Sample { n: usize, count: u64, seed: u64 },
}

impl FromStr for PairSpec {
    type Err = HuntError;

    fn from_str(s: &str) -> Result<Self, HuntError> {
        let bad = |reason: String| HuntError::BadSpec { spec: s.to_string(), reason };
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {kv:?}")))?;
            if params.insert(k.trim(), v.trim()).is_some() {
                return Err(bad(format!("duplicate key {k:?}")));
            }
        }
        let allowed: &[&str] = match kind {
            "permuted" => &["n", "count", "seed", "p"],
            "regular" => &["n", "d", "count", "seed"],
            "gnp" => &["n", "p", "count", "seed"],
            "exhaustive" => &["n"],
            "sample" => &["n", "count", "seed"],
            _ => return Err(bad(format!("unknown generator {kind:?}"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(k)) {
            return Err(bad(format!("unknown key {k:?} for {kind}")));
        }
        fn get<T: FromStr>(params: &BTreeMap<&str, &str>, key: &str, default: Option<T>) -> Result<T, String> {
            match params.get(key) {
                Some(v) => v.parse().map_err(|_| format!("bad value {v:?} for {key}")),
                None => default.ok_or_else(|| format!("missing {key}")),
            }
        }
        let spec = (|| -> Result<PairSpec, String> {
            let n: usize = get(&params, "n", None)?;
            if n == 0 {
                return Err("n must be at least 1".into());
            }
            Ok(match kind {
                "permuted" => PairSpec::Permuted {
                    n,
                    count: get(&params, "count", None)?,
                    seed: get(&params, "seed", None)?,
                    p: get(&params, "p", Some(0.5))?,
                },
                "regular" => PairSpec::Regular {
                    n,
                    d: get(&params, "d", None)?,
                    count: get(&params, "count", None)?,
                    seed: get(&params, "seed", None)?,
                },
                "gnp" => PairSpec::Gnp {
                    n,
                    p: get(&params, "p", None)?,
                    count: get(&params, "count", None)?,
                    seed: get(&params, "seed", None)?,
                },
                "exhaustive" if n > EXHAUSTIVE_MAX_N => return Err(format!("n must be at most {EXHAUSTIVE_MAX_N}")),
                "exhaustive" => PairSpec::Exhaustive { n },
                _ => PairSpec::Sample { n, count: get(&params, "count", None)?, seed: get(&params, "seed", None)? },
            })
        })()
        .map_err(bad)?;
        match spec {
            PairSpec::Permuted { p, .. } | PairSpec::Gnp { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(GenError::InvalidProbability(p).into())
            }
            PairSpec::Regular { n, d, .. } if d >= n || (n * d) % 2 == 1 => Err(GenError::InfeasibleRegular { n, d }.into()),
            s => Ok(s),
        }
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSpec::Permuted { n, count, seed, p } => write!(f, "permuted:n={n},count={count},seed={seed},p={p}"),
            PairSpec::Regular { n, d, count, seed } => write!(f, "regular:n={n},d={d},count={count},seed={seed}"),
            PairSpec::Gnp { n, p, count, seed } => write!(f, "gnp:n={n},p={p},count={count},seed={seed}"),
            PairSpec::Exhaustive { n } => write!(f, "exhaustive:n={n}"),
            PairSpec::Sample { n, count, seed } => write!(f, "sample:n={n},count={count},seed={seed}"),
        }
    }
}

impl PairSpec {
    /// Number of pairs this generator produces.
    pub fn pair_count(&self) -> u64 {
        match *self {
            PairSpec::Permuted { count, .. }
            | PairSpec::Regular { count, .. }
            | PairSpec::Gnp { count, .. }
            | PairSpec::Sample { count, .. } => count,
            PairSpec::Exhaustive { n } => {
                let g = labeled_graph_count(n);
                g * (g - 1) / 2
            }
        }
    }

    /// Pair `index`. Left and right instances are manifest entries `2·index`
    /// and `2·index + 1`.
    pub fn pair(&self, index: u64) -> HuntPair {
        let source = format!("{self}#{index}");
        let (left, right, manifest) = match *self {
            PairSpec::Permuted { n, seed, p, .. } => {
                let s = Seed(seed).derive(index);
                let g = gnp(n, p, s).expect("validated p");
                let sigma = random_permutation(n, s.derive(1));
                let h = apply_permutation(&g, &sigma).expect("length n");
                let m = vec![
                    ManifestEntry::new(2 * index, "gnp", json!({ "n": n, "p": p }), s, &g),
                    ManifestEntry::new(
                        2 * index + 1,
                        "permuted",
                        json!({ "of": 2 * index, "permutation": sigma.as_slice() }),
                        s.derive(1),
                        &h,
                    ),
                ];
                (g, h, m)
            }
            PairSpec::Regular { n, d, seed, .. } => {
                let s = Seed(seed).derive(index);
                let g = random_regular(n, d, s).expect("validated degree");
                let params = json!({ "n": n, "d": d });
                let (h, second) = if index.is_multiple_of(2) {
                    let sigma = random_permutation(n, s.derive(1));
                    let h = apply_permutation(&g, &sigma).expect("length n");
                    let e = ManifestEntry::new(
                        2 * index + 1,
                        "permuted",
                        json!({ "of": 2 * index, "permutation": sigma.as_slice() }),
                        s.derive(1),
                        &h,
                    );
                    (h, e)
                } else {
                    let h = random_regular(n, d, s.derive(1)).expect("validated degree");
                    let e = ManifestEntry::new(2 * index + 1, "regular", params.clone(), s.derive(1), &h);
                    (h, e)
                };
                let m = vec![ManifestEntry::new(2 * index, "regular", params, s, &g), second];
                (g, h, m)
            }
            PairSpec::Gnp { n, p, seed, .. } => {
                let s = Seed(seed).derive(index);
                let (a, b) = (s.derive(0), s.derive(1));
                let (g, h) = (gnp(n, p, a).expect("validated p"), gnp(n, p, b).expect("validated p"));
                let params = json!({ "n": n, "p": p });
                let m = vec![
                    ManifestEntry::new(2 * index, "gnp", params.clone(), a, &g),
                    ManifestEntry::new(2 * index + 1, "gnp", params, b, &h),
                ];
                (g, h, m)
            }
            PairSpec::Sample { n, seed, .. } => {
                let s = Seed(seed).derive(index);
                let (a, b) = (s.derive(0), s.derive(1));
                if index.is_multiple_of(2) {
                    let (g, h) = (gnp(n, 0.5, a).expect("valid p"), gnp(n, 0.5, b).expect("valid p"));
                    let params = json!({ "n": n, "p": 0.5 });
                    let m = vec![
                        ManifestEntry::new(2 * index, "gnp", params.clone(), a, &g),
                        ManifestEntry::new(2 * index + 1, "gnp", params, b, &h),
                    ];
                    (g, h, m)
                } else {
                    let total = n * (n - 1) / 2;
                    let edges = (s.derive(2).0 % (total as u64 + 1)) as usize;
                    let (g, h) = (gnm(n, edges, a).expect("m <= pairs"), gnm(n, edges, b).expect("m <= pairs"));
                    let params = json!({ "n": n, "m": edges });
                    let m = vec![
                        ManifestEntry::new(2 * index, "gnm", params.clone(), a, &g),
                        ManifestEntry::new(2 * index + 1, "gnm", params, b, &h),
                    ];
                    (g, h, m)
                }
            }
            PairSpec::Exhaustive { n } => {
                let (i, j) = unrank_pair(index, labeled_graph_count(n));
                let (g, h) = (labeled_graph(n, i), labeled_graph(n, j));
                let m = vec![
                    ManifestEntry::new(2 * index, "exhaustive", json!({ "n": n, "mask": i }), Seed(0), &g),
                    ManifestEntry::new(2 * index + 1, "exhaustive", json!({ "n": n, "mask": j }), Seed(0), &h),
                ];
                (g, h, m)
            }
        };
        HuntPair { index, source, left, right, manifest }
    }

    pub fn pairs(&self) -> impl Iterator<Item = HuntPair> + '_ {
        (0..self.pair_count()).map(move |i| self.pair(i))
    }
}

/// Index of pair `(i, j)`, `i < j`, in row-major order over `0..g`.
fn unrank_pair(mut index: u64, g: u64) -> (u64, u64) {
    let mut i = 0;
    while index >= g - 1 - i {
        index -= g - 1 - i;
        i += 1;
    }
    (i, i + 1 + index)
}
