//! graph6 and plain edge-list encodings.
//!
//! graph6 packs the upper triangle of the adjacency matrix column by column
//! (`x(0,1), x(0,2), x(1,2), x(0,3), ...`) into 6-bit groups, each stored as
//! the printable byte `63 + group`. The vertex count is a single byte for
//! `n <= 62`, or `126` followed by three 6-bit bytes for `n <= 258047`.

use thiserror::Error;

use crate::graph::{Graph, GraphError};

/// Largest vertex count the 4-byte graph6 header can express.
pub const GRAPH6_MAX_N: usize = 258_047;

const GRAPH6_HEADER: &str = ">>graph6<<";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("empty input")]
    Empty,
    #[error("invalid graph6 byte {byte:#04x} at offset {offset}")]
    InvalidByte { offset: usize, byte: u8 },
    #[error("graph6 size header is truncated")]
    TruncatedHeader,
    #[error("graph6 size {0} exceeds the supported maximum of {GRAPH6_MAX_N}")]
    TooLarge(usize),
    #[error("graph6 bit field truncated: expected {expected} bytes, found {found}")]
    TruncatedBits { expected: usize, found: usize },
    #[error("{extra} trailing byte(s) after graph6 bit field")]
    TrailingGarbage { extra: usize },
    #[error("non-zero padding bits in final graph6 byte")]
    NonZeroPadding,
    #[error("line {line}: expected a vertex count, found {found:?}")]
    BadVertexCount { line: usize, found: String },
    #[error("line {line}: non-numeric token {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: expected two vertex indices, found {found}")]
    WrongArity { line: usize, found: usize },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    OutOfRange { line: usize, vertex: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Text encodings understood by the readers and writers in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Graph6,
    EdgeList,
}

impl GraphFormat {
    /// Guesses the format of a text blob. graph6 bytes are all `>= 63`, so a
    /// leading ASCII digit always means an edge list.
    pub fn detect(text: &str) -> GraphFormat {
        let first = text.trim_start().bytes().next();
        match first {
            Some(b) if b.is_ascii_digit() => GraphFormat::EdgeList,
            _ => GraphFormat::Graph6,
        }
    }
}

impl std::str::FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graph6" | "g6" => Ok(GraphFormat::Graph6),
            "edge-list" | "edgelist" | "edges" | "el" => Ok(GraphFormat::EdgeList),
            other => Err(format!("unknown graph format {other:?} (expected graph6 or edge-list)")),
        }
    }
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, FormatError> {
    match format {
        GraphFormat::Graph6 => parse_graph6(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

pub fn emit_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Graph6 => emit_graph6(g),
        GraphFormat::EdgeList => emit_edge_list(g),
    }
}

/// Parses one graph6 line. Surrounding whitespace and an optional
/// `>>graph6<<` header are ignored.
pub fn parse_graph6(text: &str) -> Result<Graph, FormatError> {
    let text = text.trim();
    let text = text.strip_prefix(GRAPH6_HEADER).unwrap_or(text);
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(FormatError::Empty);
    }
    for (offset, &byte) in bytes.iter().enumerate() {
        if !(63..=126).contains(&byte) {
            return Err(FormatError::InvalidByte { offset, byte });
        }
    }
    let (n, body) = if bytes[0] != 126 {
        ((bytes[0] - 63) as usize, &bytes[1..])
    } else if bytes.len() >= 2 && bytes[1] == 126 {
        // 8-byte header; decode only to report the size
        if bytes.len() < 8 {
            return Err(FormatError::TruncatedHeader);
        }
        let n = bytes[2..8].iter().fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
        return Err(FormatError::TooLarge(n));
    } else {
        if bytes.len() < 4 {
            return Err(FormatError::TruncatedHeader);
        }
        let n = bytes[1..4].iter().fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
        if n > GRAPH6_MAX_N {
            return Err(FormatError::TooLarge(n));
        }
        (n, &bytes[4..])
    };
    if n == 0 {
        return Err(GraphError::NoVertices.into());
    }
    let nbits = n * (n - 1) / 2;
    let expected = nbits.div_ceil(6);
    if body.len() < expected {
        return Err(FormatError::TruncatedBits { expected, found: body.len() });
    }
    if body.len() > expected {
        return Err(FormatError::TrailingGarbage { extra: body.len() - expected });
    }
    let bit = |k: usize| (body[k / 6] - 63) >> (5 - k % 6) & 1 == 1;
    if (nbits..expected * 6).any(bit) {
        return Err(FormatError::NonZeroPadding);
    }
    let mut edges = Vec::new();
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            if bit(k) {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    Ok(Graph::from_edges(n, edges)?)
}

/// Encodes `g` as a graph6 string (no trailing newline).
///
/// Panics if `g.n()` exceeds [`GRAPH6_MAX_N`].
pub fn emit_graph6(g: &Graph) -> String {
    let n = g.n();
    assert!(n <= GRAPH6_MAX_N, "graph6 cannot encode n = {n}");
    let mut out = Vec::with_capacity(4 + (n * n.saturating_sub(1) / 2).div_ceil(6));
    if n <= 62 {
        out.push(n as u8 + 63);
    } else {
        out.push(126);
        out.extend([12, 6, 0].map(|s| ((n >> s) & 63) as u8 + 63));
    }
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

/// Parses `n` on the first non-blank line followed by one `i j` pair per line.
pub fn parse_edge_list(text: &str) -> Result<Graph, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(FormatError::Empty)?;
    let n: usize = header.parse().map_err(|_| FormatError::BadVertexCount {
        line: hline,
        found: header.to_string(),
    })?;
    if n == 0 {
        return Err(GraphError::NoVertices.into());
    }
    let mut edges = Vec::new();
    for (line, l) in lines {
        let toks = l.split_whitespace().collect::<Vec<_>>();
        if toks.len() != 2 {
            return Err(FormatError::WrongArity { line, found: toks.len() });
        }
        let mut ends = [0usize; 2];
        for (slot, tok) in ends.iter_mut().zip(&toks) {
            *slot = tok.parse().map_err(|_| FormatError::NonNumeric {
                line,
                token: tok.to_string(),
            })?;
            if *slot >= n {
                return Err(FormatError::OutOfRange { line, vertex: *slot, n });
            }
        }
        if ends[0] == ends[1] {
            return Err(FormatError::SelfLoop { line, vertex: ends[0] });
        }
        edges.push((ends[0], ends[1]));
    }
    Ok(Graph::from_edges(n, edges)?)
}

/// Canonical edge-list text: `n`, then each edge `u v` with `u < v` in
/// sorted order, newline terminated.
pub fn emit_edge_list(g: &Graph) -> String {
    let mut s = format!("{}\n", g.n());
    for &(u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}
