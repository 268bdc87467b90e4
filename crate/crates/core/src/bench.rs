//! Operation-count benchmark on random regular graphs.
//!
//! Regular graphs give every vertex the same degree, so the first round
//! cannot split anything and the test has to work through higher orders.
//! For each `n` the harness runs the test on seeded permuted pairs and
//! reports medians of the operation counters, plus a least-squares fit of
//! `log(mults)` against `log(n)`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::gen::{permuted_pair, random_regular, GenError, Seed, PRNG};
use crate::iso::{iso_test, TestConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub n_values: Vec<usize>,
    pub samples: usize,
    pub degree: usize,
    pub seed: u64,
    pub early_exit_on_stable: bool,
}

/// `n_min, 2·n_min, 4·n_min, …` up to `n_max`.
pub fn doubling(n_min: usize, n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(n_min.max(1)), |&n| Some(n * 2)).take_while(|&n| n <= n_max).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub samples: usize,
    pub mults: u64,
    pub adds: u64,
    pub comparisons: u64,
    pub max_bitlen: u64,
    pub decided_at_k: usize,
    pub wall_ms: f64,
    /// `n · log₂ n`, the bit-length ceiling implied by the walk-count bound.
    pub bitlen_bound: f64,
    pub mults_over_n4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub degree: usize,
    pub seed: u64,
    pub prng: String,
    pub early_exit_on_stable: bool,
    pub rows: Vec<BenchRow>,
    /// Slope of `log(mults)` against `log(n)`; absent with fewer than two
    /// distinct `n`.
    pub mults_slope: Option<f64>,
    pub bitlen_within_bound: bool,
}

/// Upper median.
fn median<T: Copy + PartialOrd>(xs: &mut [T]) -> T {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    xs[xs.len() / 2]
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect::<Vec<_>>();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

fn bench_row(n: usize, cfg: &BenchConfig) -> Result<BenchRow, GenError> {
    let test_cfg = TestConfig { early_exit_on_stable: cfg.early_exit_on_stable, ..TestConfig::default() };
    let base = Seed(cfg.seed).derive(n as u64);
    let samples = cfg.samples.max(1);
    let (mut mults, mut adds, mut cmps, mut bits, mut ks, mut ms) = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for s in 0..samples as u64 {
        let seed = base.derive(s);
        let g = random_regular(n, cfg.degree, seed)?;
        let (g, h, _) = permuted_pair(&g, seed.derive(1));
        let start = Instant::now();
        let v = iso_test(&g, &h, &test_cfg);
        ms.push(start.elapsed().as_secs_f64() * 1e3);
        mults.push(v.op_count.mults);
        adds.push(v.op_count.adds);
        cmps.push(v.op_count.comparisons);
        bits.push(v.op_count.max_bitlen);
        ks.push(v.decided_at_k);
    }
    let nf = n as f64;
    let mults = median(&mut mults);
    Ok(BenchRow {
        n,
        samples,
        mults,
        adds: median(&mut adds),
        comparisons: median(&mut cmps),
        max_bitlen: median(&mut bits),
        decided_at_k: median(&mut ks),
        wall_ms: median(&mut ms),
        bitlen_bound: nf * nf.log2(),
        mults_over_n4: mults as f64 / nf.powi(4),
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, GenError> {
    let rows = cfg.n_values.iter().map(|&n| bench_row(n, cfg)).collect::<Result<Vec<_>, _>>()?;
    let points = rows.iter().filter(|r| r.mults > 0).map(|r| (r.n as f64, r.mults as f64)).collect::<Vec<_>>();
    // n = 1 has n·log₂n = 0 and no matrix work at all
    let bitlen_within_bound = rows.iter().all(|r| r.n < 2 || r.max_bitlen as f64 <= r.bitlen_bound);
    Ok(BenchReport {
        degree: cfg.degree,
        seed: cfg.seed,
        prng: PRNG.to_string(),
        early_exit_on_stable: cfg.early_exit_on_stable,
        rows,
        mults_slope: loglog_slope(&points),
        bitlen_within_bound,
    })
}
