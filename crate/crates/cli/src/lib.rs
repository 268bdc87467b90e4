//! The `diagiso` command line.
//!
//! Exit codes are part of the interface: 0 isomorphic / success, 1 not
//! isomorphic, 2 usage or input error, 3 hunt found disagreements, 4 the
//! answer is unresolved (oracle budget exhausted, or unaudited pairs left in
//! a hunt).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use diagiso::bench::{doubling, run_bench, BenchConfig};
use diagiso::format::{emit_graph, parse_graph, GraphFormat};
use diagiso::gen::{CorpusReader, OnError, PRNG};
use diagiso::hunt::{corpus_pairs, persist_record, run_hunt, HuntConfig, HuntLine, HuntPair, HuntStatus, PairSpec};
use diagiso::iso::{iso_test, Decision, TestConfig, TraceLevel};
use diagiso::oracle::{exact_isomorphic, OracleError, DEFAULT_BUDGET};
use diagiso::report::verdict_report;
use diagiso::{verify_mapping, Graph, Permutation};

pub const EXIT_ISOMORPHIC: i32 = 0;
pub const EXIT_NOT_ISOMORPHIC: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;
pub const EXIT_UNRESOLVED: i32 = 4;

/// Environment variable overriding the default worker count.
pub const JOBS_ENV: &str = "DIAGISO_JOBS";

#[derive(Debug, Parser)]
#[command(name = "diagiso", version, about = "Closed-walk refinement isomorphism test with an exact oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the refinement test on two graphs and print the verdict as JSON.
    Test(TestArgs),
    /// Decide isomorphism by exhaustive search and print the result as JSON.
    Oracle(OracleArgs),
    /// Audit the test against the oracle over a corpus or generated pairs.
    Hunt(HuntArgs),
    /// Measure operation counts on random regular graphs.
    Bench(BenchArgs),
    /// Convert a graph between graph6 and edge-list text.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
struct PairInput {
    g1: PathBuf,
    g2: PathBuf,
    /// Input format; detected from the content when omitted.
    #[arg(long)]
    format: Option<GraphFormat>,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: PairInput,
    /// Include both sorted diagonals at every order in the output.
    #[arg(long)]
    trace: bool,
    /// Stop once the block structure stops changing. Unsound; for
    /// benchmarking only.
    #[arg(long)]
    early_exit: bool,
    /// Cross-check Isomorphic verdicts with the oracle up to this many vertices.
    #[arg(long)]
    audit_max_n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    input: PairInput,
    /// Maximum number of search nodes before giving up (exit 4).
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct HuntArgs {
    /// graph6 file, one graph per line; every same-size pair is tested.
    #[arg(long, required_unless_present = "gen", conflicts_with = "gen")]
    corpus: Option<PathBuf>,
    /// Generator spec, e.g. `permuted:n=8,count=100,seed=1`.
    #[arg(long)]
    gen: Option<PairSpec>,
    /// Largest n checked by the oracle.
    #[arg(long, default_value_t = diagiso::hunt::DEFAULT_AUDIT_MAX_N)]
    audit_max_n: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads; defaults to every core.
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
    #[arg(long)]
    early_exit: bool,
    /// Write the JSON-lines stream here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for one self-contained JSON file per disagreement.
    #[arg(long)]
    persist: Option<PathBuf>,
    /// Write a run manifest (JSON lines) recording seeds, corpus hash and
    /// every generated instance.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Skip unparsable corpus lines with a warning instead of failing.
    #[arg(long)]
    skip_bad_lines: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    /// Instances per n.
    #[arg(long, default_value_t = 3)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Linear step between sizes; sizes double when omitted.
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    early_exit: bool,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    from: GraphFormat,
    #[arg(long)]
    to: GraphFormat,
    /// Read from this file instead of standard input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failure that maps to exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Test(a) => cmd_test(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
        Command::Hunt(a) => cmd_hunt(a, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Convert(a) => cmd_convert(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn read_graph(path: &Path, format: Option<GraphFormat>) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let format = format.unwrap_or_else(|| GraphFormat::detect(&text));
    parse_graph(&text, format).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_pair(input: &PairInput) -> Result<(Graph, Graph), Failure> {
    Ok((read_graph(&input.g1, input.format)?, read_graph(&input.g2, input.format)?))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_test(a: TestArgs, stdout: &mut dyn Write) -> Outcome {
    let (g1, g2) = read_pair(&a.input)?;
    let cfg = TestConfig {
        early_exit_on_stable: a.early_exit,
        audit_max_n: a.audit_max_n,
        oracle_budget: a.budget,
        trace: if a.trace { TraceLevel::Full } else { TraceLevel::Summary },
    };
    let v = iso_test(&g1, &g2, &cfg);
    print_json(stdout, &verdict_report(&v, &g1, &g2, a.trace))?;
    Ok(match v.decision {
        Decision::Isomorphic => EXIT_ISOMORPHIC,
        Decision::NotIsomorphic => EXIT_NOT_ISOMORPHIC,
    })
}

/// JSON document printed by `oracle`.
#[derive(Debug, Serialize)]
pub struct OracleReport {
    /// `isomorphic`, `non_isomorphic` or `unresolved`.
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Permutation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_explored: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn cmd_oracle(a: OracleArgs, stdout: &mut dyn Write) -> Outcome {
    let (g1, g2) = read_pair(&a.input)?;
    let (report, code) = match exact_isomorphic(&g1, &g2, a.budget) {
        Ok(r) => match r.mapping() {
            Some(p) => {
                let ok = verify_mapping(&g1, &g2, p)?;
                let report = OracleReport {
                    outcome: "isomorphic",
                    mapping: Some(p.clone()),
                    mapping_verified: Some(ok),
                    nodes_explored: Some(r.nodes_explored),
                    reason: None,
                };
                (report, EXIT_ISOMORPHIC)
            }
            None => {
                let report = OracleReport {
                    outcome: "non_isomorphic",
                    mapping: None,
                    mapping_verified: None,
                    nodes_explored: Some(r.nodes_explored),
                    reason: None,
                };
                (report, EXIT_NOT_ISOMORPHIC)
            }
        },
        Err(e @ OracleError::BudgetExhausted { budget }) => {
            let report = OracleReport {
                outcome: "unresolved",
                mapping: None,
                mapping_verified: None,
                nodes_explored: Some(budget),
                reason: Some(e.to_string()),
            };
            (report, EXIT_UNRESOLVED)
        }
        Err(e) => return Err(e.into()),
    };
    print_json(stdout, &report)?;
    Ok(code)
}

/// First line of a hunt manifest.
#[derive(Debug, Serialize)]
struct RunHeader<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    command: &'static str,
    prng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<&'a Path>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus_sha256: Option<String>,
    audit_max_n: usize,
    oracle_budget: u64,
    early_exit_on_stable: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn cmd_hunt(a: HuntArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = HuntConfig {
        audit_max_n: a.audit_max_n,
        oracle_budget: a.budget,
        early_exit_on_stable: a.early_exit,
        jobs: a.jobs,
    };
    let mut header = RunHeader {
        kind: "run",
        command: "hunt",
        prng: PRNG,
        generator: None,
        corpus: None,
        corpus_sha256: None,
        audit_max_n: cfg.audit_max_n,
        oracle_budget: cfg.oracle_budget,
        early_exit_on_stable: cfg.early_exit_on_stable,
    };

    let pairs: Box<dyn Iterator<Item = HuntPair>> = match (&a.corpus, &a.gen) {
        (Some(path), _) => {
            let bytes = fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            header.corpus = Some(path);
            header.corpus_sha256 = Some(sha256_hex(&bytes));
            let on_error = if a.skip_bad_lines { OnError::Skip } else { OnError::FailFast };
            let mut reader = CorpusReader::new(bytes.as_slice(), on_error);
            let entries = reader.by_ref().collect::<Result<Vec<_>, _>>().map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            for w in reader.warnings() {
                writeln!(stderr, "warning: {}: line {}: {}", path.display(), w.line, w.error)?;
            }
            Box::new(corpus_pairs(entries))
        }
        (None, Some(spec)) => {
            header.generator = Some(spec.to_string());
            Box::new(spec.pairs())
        }
        (None, None) => return Err(Failure("one of --corpus or --gen is required".into())),
    };

    let mut manifest = a.manifest.as_deref().map(create).transpose()?;
    if let Some(m) = manifest.as_mut() {
        serde_json::to_writer(&mut *m, &header)?;
        writeln!(m)?;
    }
    let mut file_out = a.out.as_deref().map(create).transpose()?;
    let out: &mut dyn Write = match file_out.as_mut() {
        Some(f) => f,
        None => stdout,
    };

    let summary = run_hunt(pairs, &cfg, |pair, record| {
        serde_json::to_writer(&mut *out, &HuntLine::Record(record.clone()))?;
        writeln!(out)?;
        if let Some(m) = manifest.as_mut() {
            for entry in &pair.manifest {
                serde_json::to_writer(&mut *m, entry)?;
                writeln!(m)?;
            }
        }
        if record.status == HuntStatus::Disagreement {
            if let Some(dir) = &a.persist {
                persist_record(dir, record)?;
            }
        }
        Ok(())
    })?;
    serde_json::to_writer(&mut *out, &HuntLine::Summary(summary.clone()))?;
    writeln!(out)?;
    out.flush()?;
    if let Some(m) = manifest.as_mut() {
        m.flush()?;
    }
    Ok(summary.exit_code())
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> Outcome {
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(Failure(format!("need 1 <= n-min <= n-max, got {}..{}", a.n_min, a.n_max)));
    }
    let n_values = match a.step {
        Some(0) => return Err(Failure("step must be positive".into())),
        Some(step) => (a.n_min..=a.n_max).step_by(step).collect(),
        None => doubling(a.n_min, a.n_max),
    };
    let cfg = BenchConfig { n_values, samples: a.samples, degree: a.degree, seed: a.seed, early_exit_on_stable: a.early_exit };
    print_json(stdout, &run_bench(&cfg)?)?;
    Ok(0)
}

fn cmd_convert(a: ConvertArgs, stdout: &mut dyn Write) -> Outcome {
    let text = match &a.input {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let g = parse_graph(&text, a.from)?;
    let mut rendered = emit_graph(&g, a.to);
    if !rendered.ends_with('\n') {
        rendered.push('\n');
    }
    match &a.output {
        Some(p) => fs::write(p, rendered).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => stdout.write_all(rendered.as_bytes())?,
    }
    Ok(0)
}
