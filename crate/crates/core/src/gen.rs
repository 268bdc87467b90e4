//! Seeded instance generators and graph6 corpus ingestion.
//!
//! All randomness comes from `ChaCha8Rng` (crate `rand_chacha` 0.3) seeded
//! with `seed_from_u64`, driven through the `rand` 0.8 distributions. Both
//! crates document value-stable output across platforms within these
//! versions, so a seed pins an instance bit for bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{emit_graph6, parse_graph6, FormatError};
use crate::graph::{apply_permutation, Graph, Permutation};

/// Name and version of the generator behind [`Seed`], for manifests.
pub const PRNG: &str = "ChaCha8Rng/rand_chacha-0.3/seed_from_u64";

const REGULAR_MAX_ATTEMPTS: u32 = 1_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("no {d}-regular graph on {n} vertices exists")]
    InfeasibleRegular { n: usize, d: usize },
    #[error("no simple pairing found for a {d}-regular graph on {n} vertices after {attempts} attempts")]
    AttemptsExhausted { n: usize, d: usize, attempts: u32 },
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("cannot place {m} edges on {n} vertices")]
    TooManyEdges { n: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// An independent child seed: the first word of stream `index` of this
    /// seed's generator.
    pub fn derive(self, index: u64) -> Seed {
        let mut rng = self.rng();
        rng.set_stream(index);
        Seed(rng.next_u64())
    }
}

/// Upper-triangle pairs in graph6 order: `(0,1), (0,2), (1,2), (0,3), …`.
fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(|j| (0..j).map(move |i| (i, j)))
}

/// Erdős–Rényi `G(n, p)`: pairs are visited in graph6 order and each is
/// kept when a uniform `f64` in `[0, 1)` falls below `p`.
pub fn gnp(n: usize, p: f64, seed: Seed) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::InvalidProbability(p));
    }
    if n == 0 {
        return Err(GenError::NoVertices);
    }
    let mut rng = seed.rng();
    let edges = pairs(n).filter(|_| rng.gen::<f64>() < p).collect::<Vec<_>>();
    Ok(Graph::from_edges(n, edges).expect("pairs are valid"))
}

/// A uniformly random graph with exactly `m` edges.
pub fn gnm(n: usize, m: usize, seed: Seed) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(GenError::NoVertices);
    }
    let mut all = pairs(n).collect::<Vec<_>>();
    if m > all.len() {
        return Err(GenError::TooManyEdges { n, m });
    }
    let mut rng = seed.rng();
    let (chosen, _) = all.partial_shuffle(&mut rng, m);
    Ok(Graph::from_edges(n, chosen.iter().copied()).expect("pairs are valid"))
}

/// A simple `d`-regular graph from the configuration (pairing) model.
///
/// Points are paired one at a time, each pair drawn at random among the
/// remaining points whose vertices are distinct and not yet adjacent; when
/// no such pair is left the attempt is discarded and pairing restarts.
/// Rejecting only the offending pair, not the whole pairing, keeps the
/// restart rate low for degrees where a collision-free full pairing is rare.
/// For `d > (n-1)/2` the complement of an `(n-1-d)`-regular graph is used.
pub fn random_regular(n: usize, d: usize, seed: Seed) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(GenError::NoVertices);
    }
    if d >= n || (n * d) % 2 == 1 {
        return Err(GenError::InfeasibleRegular { n, d });
    }
    let mut rng = seed.rng();
    if 2 * d > n - 1 {
        let sparse = pairing(n, n - 1 - d, &mut rng)?;
        let edges = pairs(n).filter(|&(i, j)| !sparse.has_edge(i, j));
        return Ok(Graph::from_edges(n, edges).expect("pairs are valid"));
    }
    pairing(n, d, &mut rng)
}

fn pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph, GenError> {
    const QUICK_TRIES: usize = 64;
    'attempt: for _ in 0..REGULAR_MAX_ATTEMPTS {
        let mut points = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect::<Vec<_>>();
        let mut adj = vec![false; n * n];
        let mut edges = Vec::with_capacity(points.len() / 2);
        while !points.is_empty() {
            let len = points.len();
            let ok = |i: usize, j: usize| {
                let (u, v) = (points[i], points[j]);
                i != j && u != v && !adj[u * n + v]
            };
            let mut pick = (0..QUICK_TRIES)
                .map(|_| (rng.gen_range(0..len), rng.gen_range(0..len)))
                .find(|&(i, j)| ok(i, j));
            if pick.is_none() {
                let all = (0..len).flat_map(|i| (i + 1..len).map(move |j| (i, j))).filter(|&(i, j)| ok(i, j)).collect::<Vec<_>>();
                match all.choose(rng) {
                    Some(&p) => pick = Some(p),
                    None => continue 'attempt,
                }
            }
            let (i, j) = pick.expect("chosen above");
            let (u, v) = (points[i], points[j]);
            adj[u * n + v] = true;
            adj[v * n + u] = true;
            edges.push((u.min(v), u.max(v)));
            points.swap_remove(i.max(j));
            points.swap_remove(i.min(j));
        }
        return Ok(Graph::from_edges(n, edges).expect("pairing produced a simple graph"));
    }
    Err(GenError::AttemptsExhausted { n, d, attempts: REGULAR_MAX_ATTEMPTS })
}

/// A uniformly random permutation of `0..n` (Fisher–Yates).
pub fn random_permutation(n: usize, seed: Seed) -> Permutation {
    let mut v = (0..n).collect::<Vec<_>>();
    v.shuffle(&mut seed.rng());
    Permutation::new(v).expect("shuffle of 0..n")
}

/// `(g, σg, σ)` for a seeded uniform σ.
pub fn permuted_pair(g: &Graph, seed: Seed) -> (Graph, Graph, Permutation) {
    let sigma = random_permutation(g.n(), seed);
    let h = apply_permutation(g, &sigma).expect("permutation has length n");
    (g.clone(), h, sigma)
}

/// One record of a generated-corpus manifest (JSON lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u64,
    pub generator: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub prng: String,
    pub graph6: String,
}

impl ManifestEntry {
    pub fn new(index: u64, generator: &str, params: serde_json::Value, seed: Seed, g: &Graph) -> Self {
        ManifestEntry {
            index,
            generator: generator.to_string(),
            params,
            seed: seed.0,
            prng: PRNG.to_string(),
            graph6: emit_graph6(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnError {
    #[default]
    FailFast,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    /// 1-based line number in the source file.
    pub line: usize,
    pub graph: Graph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusWarning {
    pub line: usize,
    pub error: FormatError,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus read failed: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: FormatError },
}

/// Streams graphs from graph6 lines. Blank lines and bare `>>graph6<<`
/// header lines are ignored. In [`OnError::Skip`] mode bad lines are
/// collected as warnings; in fail-fast mode the first bad line ends the
/// stream with an error.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line: usize,
    on_error: OnError,
    warnings: Vec<CorpusWarning>,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, on_error: OnError) -> Self {
        CorpusReader { lines: reader.lines(), line: 0, on_error, warnings: Vec::new(), done: false }
    }

    pub fn warnings(&self) -> &[CorpusWarning] {
        &self.warnings
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CorpusEntry, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            };
            self.line += 1;
            let trimmed = text.trim();
            if trimmed.is_empty() || trimmed == ">>graph6<<" {
                continue;
            }
            match parse_graph6(trimmed) {
                Ok(graph) => return Some(Ok(CorpusEntry { line: self.line, graph })),
                Err(error) => match self.on_error {
                    OnError::Skip => self.warnings.push(CorpusWarning { line: self.line, error }),
                    OnError::FailFast => {
                        self.done = true;
                        return Some(Err(CorpusError::Parse { line: self.line, source: error }));
                    }
                },
            }
        }
        None
    }
}

pub fn load_corpus(path: impl AsRef<Path>, on_error: OnError) -> io::Result<CorpusReader<BufReader<File>>> {
    Ok(CorpusReader::new(BufReader::new(File::open(path)?), on_error))
}
