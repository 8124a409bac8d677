//! Brute-force references. Nothing here shares code with the production
//! paths beyond the graph type: counts use big integers, distances use a
//! plain breadth-first search, and invariant factors come from a Smith form
//! of `xI - A` with its own polynomial arithmetic.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;

pub const DP_MAX_N: usize = 64;
pub const DP_MAX_K: usize = 64;
pub const SMITH_MAX_N: usize = 32;

/// Exact counts `W[u][v][k - 1]` for `k = 1..=K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactWalkTable {
    pub n: usize,
    pub k: usize,
    pub counts: Vec<Vec<Vec<BigUint>>>,
}

impl ExactWalkTable {
    pub fn get(&self, u: usize, v: usize, k: usize) -> &BigUint {
        &self.counts[u][v][k - 1]
    }

    /// `W[u][v][k] mod p`.
    pub fn residue(&self, u: usize, v: usize, k: usize, p: u64) -> u64 {
        (self.get(u, v, k) % p).try_into().expect("residue below p")
    }
}

/// Iterated products `W_{k+1} = W_k A` over the integers.
pub fn dp_walk_counts(g: &Graph, k: usize) -> Result<ExactWalkTable> {
    let n = g.n();
    if n > DP_MAX_N || k > DP_MAX_K {
        return Err(Error::SizeGuard(format!(
            "dp_walk_counts supports n <= {DP_MAX_N} and K <= {DP_MAX_K}, got n = {n}, K = {k}"
        )));
    }
    let mut counts = vec![vec![Vec::with_capacity(k); n]; n];
    let mut cur: Vec<Vec<BigUint>> = (0..n)
        .map(|u| (0..n).map(|v| BigUint::from(g.has_edge(u, v) as u32)).collect())
        .collect();
    for step in 0..k {
        for u in 0..n {
            for v in 0..n {
                counts[u][v].push(cur[u][v].clone());
            }
        }
        if step + 1 == k {
            break;
        }
        let mut next = vec![vec![BigUint::zero(); n]; n];
        for u in 0..n {
            for x in 0..n {
                if cur[u][x].is_zero() {
                    continue;
                }
                for &w in g.out_neighbors(x) {
                    next[u][w] += &cur[u][x];
                }
            }
        }
        cur = next;
    }
    Ok(ExactWalkTable { n, k, counts })
}

/// Length of the shortest closed walk through `u`.
pub fn bfs_shortest_cycle(g: &Graph, u: usize) -> Option<usize> {
    let n = g.n();
    // distances to u, searched on reversed arcs
    let mut to_u = vec![usize::MAX; n];
    to_u[u] = 0;
    let mut preds = vec![Vec::new(); n];
    for (a, b) in g.edges() {
        preds[b].push(a);
    }
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for &y in &preds[x] {
            if to_u[y] == usize::MAX {
                to_u[y] = to_u[x] + 1;
                queue.push_back(y);
            }
        }
    }
    g.out_neighbors(u).iter().filter(|&&w| to_u[w] != usize::MAX).map(|&w| 1 + to_u[w]).min()
}

// Polynomials as little-endian u64 residues; empty is zero.
type P = Vec<u64>;

fn trim(mut a: P) -> P {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn p_sub_mul(a: &P, q: &P, b: &P, p: u64) -> P {
    // a - q * b
    let mut out = a.clone();
    out.resize(a.len().max(q.len() + b.len()), 0);
    for (i, &x) in q.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let t = ((x as u128 * y as u128) % p as u128) as u64;
            out[i + j] = (out[i + j] + p - t) % p;
        }
    }
    trim(out)
}

fn p_divmod(a: &P, b: &P, p: u64) -> (P, P) {
    let db = b.len() - 1;
    let inv = modpow(b[db], p - 2, p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len().saturating_sub(db).max(1)];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let c = ((*r.last().unwrap() as u128 * inv as u128) % p as u128) as u64;
        q[shift] = c;
        for (j, &y) in b.iter().enumerate() {
            let t = ((c as u128 * y as u128) % p as u128) as u64;
            r[shift + j] = (r[shift + j] + p - t) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn monic(a: P, p: u64) -> P {
    let inv = modpow(*a.last().unwrap(), p - 2, p);
    a.into_iter().map(|x| ((x as u128 * inv as u128) % p as u128) as u64).collect()
}

/// Invariant factors of `a` as monic coefficient lists, lowest first, in
/// divisibility order. Unit factors are dropped.
pub fn invariant_factors_bruteforce(a: &DenseMatrix) -> Result<Vec<Vec<u64>>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch("invariant factors need a square matrix".into()));
    }
    if n > SMITH_MAX_N {
        return Err(Error::SizeGuard(format!("invariant factors supported up to n = {SMITH_MAX_N}, got {n}")));
    }
    let p = a.field().modulus();
    let mut m: Vec<Vec<P>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = (p - a.get(i, j).value()) % p;
                    trim(if i == j { vec![c, 1] } else { vec![c] })
                })
                .collect()
        })
        .collect();
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        loop {
            // nonzero entry of least degree in the trailing submatrix
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !m[i][j].is_empty() && best.is_none_or(|(bi, bj)| m[i][j].len() < m[bi][bj].len()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                // remaining block is zero: the rest are zero factors, which
                // cannot happen for xI - A
                diag.push(Vec::new());
                break;
            };
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            let pivot = m[t][t].clone();
            let mut clean = true;
            for i in t + 1..n {
                if m[i][t].is_empty() {
                    continue;
                }
                let (q, r) = p_divmod(&m[i][t], &pivot, p);
                for j in t..n {
                    m[i][j] = p_sub_mul(&m[i][j], &q, &m[t][j].clone(), p);
                }
                if !r.is_empty() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if m[t][j].is_empty() {
                    continue;
                }
                let (q, r) = p_divmod(&m[t][j], &pivot, p);
                for i in t..n {
                    m[i][j] = p_sub_mul(&m[i][j], &q, &m[i][t].clone(), p);
                }
                if !r.is_empty() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // pivot must divide the whole trailing block
            let mut bad_row = None;
            'scan: for i in t + 1..n {
                for j in t + 1..n {
                    if !m[i][j].is_empty() && !p_divmod(&m[i][j], &pivot, p).1.is_empty() {
                        bad_row = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad_row {
                Some(i) => {
                    for j in t..n {
                        let sum = {
                            let mut s = m[t][j].clone();
                            s.resize(s.len().max(m[i][j].len()), 0);
                            for (k, &x) in m[i][j].iter().enumerate() {
                                s[k] = (s[k] + x) % p;
                            }
                            trim(s)
                        };
                        m[t][j] = sum;
                    }
                }
                None => {
                    diag.push(monic(pivot, p));
                    break;
                }
            }
        }
    }
    Ok(diag.into_iter().filter(|d| d.len() > 1).collect())
}
