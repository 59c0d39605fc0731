//! Reference implementations used as oracles. Deliberately naive: dense
//! matrices, brute force, exact arithmetic.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rewb_core::graph::generate_random_digraph;
use rewb_core::{Digraph, Error};

/// Dense adjacency in "receiver row, sender column" form: `a[i][j]` iff `j → i`.
pub fn dense_adjacency(g: &Digraph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for &(from, to) in g.edges() {
        a[to][from] = true;
    }
    a
}

/// All-pairs hop distances by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(g: &Digraph) -> Vec<Vec<Option<usize>>> {
    let n = g.n();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(a, b) in g.edges() {
        d[a][b] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| x + y < c) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

pub fn brute_strongly_connected(g: &Digraph) -> bool {
    floyd_warshall(g)
        .iter()
        .all(|row| row.iter().all(Option::is_some))
}

pub fn brute_diameter(g: &Digraph) -> Option<usize> {
    let d = floyd_warshall(g);
    let mut best = 0;
    for row in &d {
        for v in row {
            best = best.max((*v)?);
        }
    }
    Some(best)
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Null space of `D_out − A` by exact Gauss–Jordan elimination. Returns the
/// basis vectors, each scaled so its largest entry is 1.
pub fn exact_balance_null_space(g: &Digraph) -> Vec<Vec<BigRational>> {
    let n = g.n();
    let a = dense_adjacency(g);
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j { g.out_degree(i) as i64 } else { 0 };
                    rat(diag - i64::from(a[i][j]))
                })
                .collect()
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..n).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for k in 0..n {
            if k != r && !m[k][c].is_zero() {
                let f = m[k][c].clone();
                let pivot_row = m[r].clone();
                for (v, p) in m[k].iter_mut().zip(pivot_row) {
                    *v = v.clone() - f.clone() * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }

    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            let max = v.iter().map(|x| x.abs()).max().expect("n >= 2");
            v.into_iter().map(|x| x / max.clone()).collect()
        })
        .collect()
}

pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().expect("finite rational")
}

/// A random strongly connected digraph with `lo ≤ n ≤ hi`, redrawing `p`
/// and the seed until generation succeeds.
pub fn random_strongly_connected(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Digraph {
    loop {
        let n = rng.gen_range(lo..=hi);
        let p = rng.gen_range(0.15..0.9);
        match generate_random_digraph(n, p, rng.gen()) {
            Ok(g) => return g,
            Err(Error::RejectionBudget { .. }) => continue,
            Err(e) => panic!("unexpected generation error: {e}"),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `x⁺ = x − β L x + α K (y − x)` with `L = (D_out − A) diag(w)` built densely.
pub fn dense_step(
    g: &Digraph,
    x: &[f64],
    w: &[f64],
    y: &[f64],
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Vec<f64> {
    let n = g.n();
    let a = dense_adjacency(g);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let deg = if i == j { g.out_degree(i) as f64 } else { 0.0 };
            let adj = if a[i][j] { 1.0 } else { 0.0 };
            l[i][j] = (deg - adj) * w[j];
        }
    }
    (0..n)
        .map(|i| {
            let lx: f64 = (0..n).map(|j| l[i][j] * x[j]).sum();
            let diff = y[i] - x[i];
            let k = if diff.abs() <= gamma {
                1.0
            } else {
                gamma / diff.abs()
            };
            x[i] - beta * lx + alpha * k * diff
        })
        .collect()
}
