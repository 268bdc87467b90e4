//! Slow, obviously-correct reference computations for tests.
//!
//! Nothing here uses matrix products or traces: walks are enumerated one by
//! one, determinants are expanded by cofactors, and vertex classes are formed
//! by grouping equal tuples.

use std::collections::BTreeMap;

/// Adjacency as plain nested vectors.
pub type Adj = Vec<Vec<u32>>;

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adj {
    let mut a = vec![vec![0; n]; n];
    for &(u, v) in edges {
        a[u][v] = 1;
        a[v][u] = 1;
    }
    a
}

/// Number of closed walks of length `k` from `start` back to `start`,
/// counted by depth-first enumeration of every walk. Entries of `a` are
/// treated as edge multiplicities.
pub fn closed_walks(a: &Adj, start: usize, k: usize) -> u128 {
    fn go(a: &Adj, at: usize, target: usize, left: usize) -> u128 {
        if left == 0 {
            return u128::from(at == target);
        }
        let mut total = 0;
        for (next, &m) in a[at].iter().enumerate() {
            if m != 0 {
                total += u128::from(m) * go(a, next, target, left - 1);
            }
        }
        total
    }
    go(a, start, start, k)
}

/// Polynomial with integer coefficients in ascending degree.
pub type Poly = Vec<i128>;

fn poly_mul(p: &[i128], q: &[i128]) -> Poly {
    let mut r = vec![0; p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn poly_add_scaled(acc: &mut Poly, p: &[i128], sign: i128) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0);
    }
    for (i, &x) in p.iter().enumerate() {
        acc[i] += sign * x;
    }
}

/// `det(λI − A)` by Laplace expansion along rows, memoized on the set of
/// columns still available. Exponential in `n`; meant for `n <= 10`.
pub fn charpoly_by_cofactors(a: &[Vec<i64>]) -> Poly {
    let n = a.len();
    assert!(n <= 16, "cofactor expansion is only for tiny matrices");
    // entry (i, j) of λI − A as a polynomial
    let entry = |i: usize, j: usize| -> Poly {
        if i == j {
            vec![-(a[i][j] as i128), 1]
        } else {
            vec![-(a[i][j] as i128)]
        }
    };
    let full = (1usize << n) - 1;
    let mut memo: Vec<Option<Poly>> = vec![None; 1 << n];
    memo[0] = Some(vec![1]);
    // minor(cols) = determinant of rows n-|cols|..n restricted to cols
    fn minor(cols: usize, n: usize, memo: &mut Vec<Option<Poly>>, entry: &dyn Fn(usize, usize) -> Poly) -> Poly {
        if let Some(p) = &memo[cols] {
            return p.clone();
        }
        let row = n - cols.count_ones() as usize;
        let mut acc = vec![0];
        let mut sign = 1;
        for j in 0..n {
            if cols >> j & 1 == 1 {
                let sub = minor(cols & !(1 << j), n, memo, entry);
                poly_add_scaled(&mut acc, &poly_mul(&entry(row, j), &sub), sign);
                sign = -sign;
            }
        }
        while acc.len() > 1 && *acc.last().unwrap() == 0 {
            acc.pop();
        }
        memo[cols] = Some(acc.clone());
        acc
    }
    let mut p = minor(full, n, &mut memo, &entry);
    p.resize(n + 1, 0);
    p
}

/// Groups vertices by equal profile vectors and returns the class sizes in
/// ascending lexicographic order of the profiles.
pub fn group_sizes<T: Ord + Clone>(profiles: &[Vec<T>]) -> Vec<usize> {
    let mut classes: BTreeMap<Vec<T>, usize> = BTreeMap::new();
    for p in profiles {
        *classes.entry(p.clone()).or_default() += 1;
    }
    classes.into_values().collect()
}
