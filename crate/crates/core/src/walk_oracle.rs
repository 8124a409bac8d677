//! The strip index built from a Frobenius form, and the walk-count queries it
//! answers.
//!
//! For block `i` of degree `l_i`, strip `i` holds the columns
//! `U_i v_1, ..., U_i v_{l_i + mu}` where `U_i` is the matching column strip of
//! `U` and `v_t = C_i^t e_1`. By the cyclic property, columns `k..k + l_i - 1`
//! of the strip are `U_i C_i^k`, so row `u` of that window dotted with the
//! aligned segment of column `v` of `U^{-1}` and summed over strips gives
//! `(A^k)_{u,v}` for every `k <= mu`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, NttPlan, PrimeField, ShoupVec, DEFAULT_PRIME};
use crate::frobenius::{companion_power_window, frobenius_decompose, FrobeniusForm};
use crate::graph::Graph;
use crate::graph_algos::bfs_reachability;
use crate::hankel::{hankel_matvec, HankelSpec};
use crate::io::fnv1a64;
use crate::matrix::{mat_mul, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    ModP,
    ExactCrt,
}

/// `w_1..w_K` for one ordered pair, as residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCountVector {
    pub pair: (usize, usize),
    pub counts: Vec<FieldElem>,
    pub exactness: Exactness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "dist")]
pub enum Distance {
    Dist(usize),
    Unreachable,
    BeyondHorizon,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkIndex {
    field: PrimeField,
    n: usize,
    mu: usize,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
    strips: Vec<DenseMatrix>,
    prefix_strips: Vec<DenseMatrix>,
    u_inv: DenseMatrix,
    // rows are the columns of U^{-1}
    u_inv_t: DenseMatrix,
}

/// Builds the strip table: per block, `U_i` times the window of companion
/// powers `v_1..v_{l_i + mu}`, plus its running column sums.
pub fn build_index(form: &FrobeniusForm) -> WalkIndex {
    let field = *form.field();
    let n = form.n();
    let mu = form.mu_min();
    let mut strips = Vec::with_capacity(form.blocks().len());
    for (block, &off) in form.blocks().iter().zip(form.block_offsets()) {
        let l = block.degree();
        let window = companion_power_window(&field, block, mu + 1);
        let u_strip = form.u().submatrix(0..n, off..off + l);
        strips.push(mat_mul(&u_strip, &window).expect("strip shapes agree"));
    }
    let prefix_strips = strips.iter().map(|s| prefix_columns(&field, s)).collect();
    WalkIndex::assemble(field, form.block_degrees(), strips, prefix_strips, form.u_inv().clone())
}

fn prefix_columns(field: &PrimeField, strip: &DenseMatrix) -> DenseMatrix {
    let mut out = strip.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        for c in 1..row.len() {
            row[c] = field.add(row[c], row[c - 1]);
        }
    }
    out
}

impl WalkIndex {
    fn assemble(
        field: PrimeField,
        degrees: Vec<usize>,
        strips: Vec<DenseMatrix>,
        prefix_strips: Vec<DenseMatrix>,
        u_inv: DenseMatrix,
    ) -> Self {
        let n = u_inv.rows();
        let mu = degrees.iter().copied().min().unwrap_or(0);
        let mut offsets = Vec::with_capacity(degrees.len());
        let mut acc = 0;
        for &d in &degrees {
            offsets.push(acc);
            acc += d;
        }
        let u_inv_t = u_inv.transpose();
        WalkIndex { field, n, mu, degrees, offsets, strips, prefix_strips, u_inv, u_inv_t }
    }

    /// Reassembles a stored index, checking that all shapes are consistent.
    pub fn from_parts(
        field: PrimeField,
        degrees: Vec<usize>,
        strips: Vec<DenseMatrix>,
        prefix_strips: Vec<DenseMatrix>,
        u_inv: DenseMatrix,
    ) -> Result<Self> {
        let n = u_inv.rows();
        let mismatch = |what: &str| Err(Error::DimensionMismatch(what.to_string()));
        if !u_inv.is_square() || degrees.iter().sum::<usize>() != n || degrees.contains(&0) {
            return mismatch("block degrees do not partition U^{-1}");
        }
        if strips.len() != degrees.len() || prefix_strips.len() != degrees.len() {
            return mismatch("one strip per block is required");
        }
        let mu = degrees.iter().copied().min().unwrap_or(0);
        for ((s, p), &l) in strips.iter().zip(&prefix_strips).zip(&degrees) {
            if s.rows() != n || s.cols() != l + mu || p.rows() != n || p.cols() != l + mu {
                return mismatch("strip shape");
            }
        }
        if strips.iter().chain(&prefix_strips).any(|m| m.field() != &field) || u_inv.field() != &field {
            return mismatch("mixed fields");
        }
        Ok(Self::assemble(field, degrees, strips, prefix_strips, u_inv))
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest walk length answered from the strips.
    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn block_degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn block_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn minpoly_deg(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn strips(&self) -> &[DenseMatrix] {
        &self.strips
    }

    pub fn prefix_strips(&self) -> &[DenseMatrix] {
        &self.prefix_strips
    }

    pub fn u_inv(&self) -> &DenseMatrix {
        &self.u_inv
    }

    pub fn stored_columns(&self) -> usize {
        self.strips.iter().map(DenseMatrix::cols).sum()
    }

    /// Adjacency recovered from length-one counts.
    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(&self.field, self.n, self.n);
        if self.mu == 0 {
            return a;
        }
        for u in 0..self.n {
            for v in 0..self.n {
                a.set(u, v, self.walk_count_unchecked(u, v, 1));
            }
        }
        a
    }

    /// The graph recovered from the index; entries other than 0/1 are
    /// rejected.
    pub fn graph(&self) -> Result<Graph> {
        let a = self.adjacency();
        let mut g = Graph::new(self.n);
        for u in 0..self.n {
            for v in 0..self.n {
                match a.get(u, v).value() {
                    0 => {}
                    1 => g.add_edge(u, v)?,
                    x => {
                        return Err(Error::IndexFormat(format!(
                            "adjacency entry ({u}, {v}) = {x} is not 0/1"
                        )))
                    }
                }
            }
        }
        Ok(g)
    }

    /// Hash of the recovered graph; equals [`Graph::content_hash`] of the
    /// graph the index was built from.
    pub fn graph_hash(&self) -> Result<u64> {
        Ok(self.graph()?.content_hash())
    }

    /// Fingerprint of the stored tables, for bit-identity checks.
    pub fn fingerprint(&self) -> u64 {
        let mut bytes = Vec::new();
        for m in self.strips.iter().chain(&self.prefix_strips).chain([&self.u_inv]) {
            for x in m.data() {
                bytes.extend_from_slice(&x.value().to_le_bytes());
            }
        }
        fnv1a64(&bytes)
    }

    pub fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        Ok(())
    }

    fn check_length(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.mu {
            return Err(Error::HorizonExceeded { k, mu: self.mu });
        }
        Ok(())
    }

    #[inline]
    fn column_segment(&self, v: usize, block: usize) -> &[FieldElem] {
        let off = self.offsets[block];
        &self.u_inv_t.row(v)[off..off + self.degrees[block]]
    }

    fn walk_count_unchecked(&self, u: usize, v: usize, k: usize) -> FieldElem {
        let mut acc: u128 = 0;
        for (i, strip) in self.strips.iter().enumerate() {
            let l = self.degrees[i];
            let window = &strip.row(u)[k - 1..k - 1 + l];
            for (a, b) in window.iter().zip(self.column_segment(v, i)) {
                acc += a.value() as u128 * b.value() as u128;
            }
        }
        FieldElem(self.field.reduce_wide(acc))
    }

    /// `(A^k)_{u,v} mod p` in O(n).
    pub fn query_walk_count(&self, u: usize, v: usize, k: usize) -> Result<FieldElem> {
        self.check_pair(u, v)?;
        self.check_length(k)?;
        Ok(self.walk_count_unchecked(u, v, k))
    }

    /// `w_1..w_mu` through one Hankel product per strip.
    pub fn query_all_lengths(&self, u: usize, v: usize) -> Result<WalkCountVector> {
        self.check_pair(u, v)?;
        let f = self.field;
        let mut counts = vec![FieldElem::ZERO; self.mu];
        if self.mu > 0 {
            for (i, strip) in self.strips.iter().enumerate() {
                let l = self.degrees[i];
                let seq = strip.row(u)[..self.mu + l - 1].to_vec();
                let h = HankelSpec::new(seq, self.mu, l)?;
                let partial = hankel_matvec(&f, &h, self.column_segment(v, i))?;
                for (c, x) in counts.iter_mut().zip(partial) {
                    *c = f.add(*c, x);
                }
            }
        }
        Ok(WalkCountVector { pair: (u, v), counts, exactness: Exactness::ModP })
    }

    /// `sum_{t <= k} (A^t)_{u,v} mod p`: prefix window at offset `k` minus the
    /// window at offset 0, per strip.
    pub fn query_prefix_count(&self, u: usize, v: usize, k: usize) -> Result<FieldElem> {
        self.check_pair(u, v)?;
        self.check_length(k)?;
        let f = self.field;
        let (mut plus, mut minus): (u128, u128) = (0, 0);
        for (i, prefix) in self.prefix_strips.iter().enumerate() {
            let l = self.degrees[i];
            let row = prefix.row(u);
            let seg = self.column_segment(v, i);
            for (a, b) in row[k - 1..k - 1 + l].iter().zip(seg) {
                plus += a.value() as u128 * b.value() as u128;
            }
            // offset-0 window is (0, P_1, ..., P_{l-1})
            for (a, b) in row[..l - 1].iter().zip(&seg[1..]) {
                minus += a.value() as u128 * b.value() as u128;
            }
        }
        Ok(f.sub(FieldElem(f.reduce_wide(plus)), FieldElem(f.reduce_wide(minus))))
    }

    /// Smallest `k <= mu` with a nonzero prefix count, by binary search.
    pub fn first_walk_binary_search(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check_pair(u, v)?;
        if self.mu == 0 || self.query_prefix_count(u, v, self.mu)?.is_zero() {
            return Ok(None);
        }
        let (mut lo, mut hi) = (1, self.mu);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.query_prefix_count(u, v, mid)?.is_zero() {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }

    /// Smallest `k <= mu` with a nonzero count, by scanning all lengths.
    pub fn first_walk_linear_scan(&self, u: usize, v: usize) -> Result<Option<usize>> {
        let w = self.query_all_lengths(u, v)?;
        Ok(w.counts.iter().position(|c| !c.is_zero()).map(|i| i + 1))
    }
}

/// Shortest-walk length from `u` to `v`, `Dist(0)` when `u == v`.
///
/// Answers come from the strips; `Unreachable` is certified by a search on
/// `graph`, anything else beyond `mu` is `BeyondHorizon`.
pub fn distance(idx: &WalkIndex, graph: &Graph, u: usize, v: usize) -> Result<Distance> {
    idx.check_pair(u, v)?;
    if u == v {
        return Ok(Distance::Dist(0));
    }
    if let Some(k) = idx.first_walk_linear_scan(u, v)? {
        return Ok(Distance::Dist(k));
    }
    let reach = bfs_reachability(graph, u)?;
    if reach.dist[v].is_none() {
        Ok(Distance::Unreachable)
    } else {
        Ok(Distance::BeyondHorizon)
    }
}

/// Row `u` of `A^1, ..., A^max_len`, by repeated row-times-adjacency
/// products.
pub fn fallback_power_row(field: &PrimeField, graph: &Graph, u: usize, max_len: usize) -> Result<Vec<Vec<FieldElem>>> {
    graph.check_vertex(u)?;
    let n = graph.n();
    let mut rows = Vec::with_capacity(max_len);
    let mut cur = vec![FieldElem::ZERO; n];
    cur[u] = FieldElem::ONE;
    for _ in 0..max_len {
        let mut next = vec![FieldElem::ZERO; n];
        for (x, &c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &w in graph.out_neighbors(x) {
                next[w] = field.add(next[w], c);
            }
        }
        rows.push(next.clone());
        cur = next;
    }
    Ok(rows)
}

/// Prime selection for [`preprocess`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeChoice {
    Fixed(u64),
    /// Sample from the NTT-friendly table, resampling on failure.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub prime: PrimeChoice,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig { prime: PrimeChoice::Fixed(DEFAULT_PRIME), seed: 0 }
    }
}

const PRIME_ROUNDS: usize = 4;

/// Decomposes the adjacency matrix of `graph` and builds the index.
pub fn preprocess(graph: &Graph, config: &PreprocessConfig) -> Result<(FrobeniusForm, WalkIndex)> {
    match config.prime {
        PrimeChoice::Fixed(p) => {
            let field = PrimeField::new(p)?;
            let form = frobenius_decompose(&graph.adjacency(&field), config.seed)?;
            let idx = build_index(&form);
            Ok((form, idx))
        }
        PrimeChoice::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut last = None;
            for round in 0..PRIME_ROUNDS {
                let field = PrimeField::random_ntt_friendly(&mut rng);
                match frobenius_decompose(&graph.adjacency(&field), config.seed.wrapping_add(round as u64)) {
                    Ok(form) => {
                        let idx = build_index(&form);
                        return Ok((form, idx));
                    }
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one round ran"))
        }
    }
}

/// Exact walk counts reconstructed from several primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactWalkCounts {
    pub pair: (usize, usize),
    pub counts: Vec<BigUint>,
    pub primes: Vec<u64>,
    pub exactness: Exactness,
}

/// Runs the pipeline once per prime and lifts `w_1..w_mu'` by Chinese
/// remaindering, `mu'` being the smallest horizon among the primes.
///
/// Residues are lifted to the balanced range; a negative lift, or a prefix
/// sum that decreases, means the primes' product was too small. When `bound`
/// is given, the product must exceed twice the bound.
pub fn crt_exact_counts(
    graph: &Graph,
    u: usize,
    v: usize,
    primes: &[u64],
    bound: Option<&BigUint>,
    seed: u64,
) -> Result<ExactWalkCounts> {
    graph.check_vertex(u)?;
    graph.check_vertex(v)?;
    if primes.is_empty() {
        return Err(Error::BoundTooSmall("no primes given".into()));
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != primes.len() {
        return Err(Error::BoundTooSmall("primes must be distinct".into()));
    }
    let product: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
    if let Some(b) = bound {
        if product <= b * 2u32 {
            return Err(Error::BoundTooSmall(format!("prime product {product} does not exceed 2 * {b}")));
        }
    }
    let mut residues = Vec::with_capacity(primes.len());
    for &p in primes {
        let config = PreprocessConfig { prime: PrimeChoice::Fixed(p), seed };
        let (_, idx) = preprocess(graph, &config)?;
        residues.push((p, idx.query_all_lengths(u, v)?.counts));
    }
    let horizon = residues.iter().map(|(_, c)| c.len()).min().unwrap_or(0);
    let mut counts = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let mut x = BigUint::zero();
        let mut modulus = BigUint::from(1u32);
        for (p, res) in &residues {
            let field = PrimeField::new(*p)?;
            let x_mod = field.elem((&x % p).to_u64().expect("below p"));
            let m_mod = field.elem((&modulus % p).to_u64().expect("below p"));
            let t = field.mul(field.sub(res[k], x_mod), field.inv(m_mod)?);
            x += &modulus * t.value();
            modulus *= *p;
        }
        if &x * 2u32 > modulus {
            return Err(Error::BoundTooSmall(format!("count of length {} does not fit the prime product", k + 1)));
        }
        counts.push(x);
    }
    let mut running = BigUint::zero();
    for c in &counts {
        let next = &running + c;
        if next < running {
            return Err(Error::BoundTooSmall("prefix counts decrease".into()));
        }
        running = next;
    }
    Ok(ExactWalkCounts { pair: (u, v), counts, primes: primes.to_vec(), exactness: Exactness::ExactCrt })
}

/// Primes from the NTT table whose product exceeds `2 * bound`.
pub fn primes_for_bound(bound: &BigUint) -> Result<Vec<u64>> {
    let target = bound * 2u32;
    let mut product = BigUint::from(1u32);
    let mut out = Vec::new();
    for &p in crate::field::NTT_PRIMES.iter().rev() {
        if product > target {
            break;
        }
        product *= p;
        out.push(p);
    }
    if product > target {
        Ok(out)
    } else {
        Err(Error::BoundTooSmall(format!("bound {bound} exceeds the prime table")))
    }
}

const DIRECT_STRIP_MAX: usize = 32;

/// Transforms shared across all pairs for batched all-lengths queries.
///
/// Strips wider than a small cutoff are handled in the frequency domain at one
/// common length, so each pair costs one pointwise sum and one inverse
/// transform; narrow strips are evaluated directly.
pub struct AllLengthsPlan<'a> {
    idx: &'a WalkIndex,
    plan: Option<NttPlan>,
    wide: Vec<usize>,
    narrow: Vec<usize>,
    wide_max: usize,
    // per wide strip, per vertex
    row_spectra: Vec<Vec<Vec<FieldElem>>>,
    col_spectra: Vec<Vec<ShoupVec>>,
}

impl<'a> AllLengthsPlan<'a> {
    pub fn new(idx: &'a WalkIndex) -> Self {
        let mu = idx.mu;
        let (mut wide, mut narrow) = (Vec::new(), Vec::new());
        for (i, &l) in idx.degrees.iter().enumerate() {
            if l > DIRECT_STRIP_MAX {
                wide.push(i)
            } else {
                narrow.push(i)
            }
        }
        let wide_max = wide.iter().map(|&i| idx.degrees[i]).max().unwrap_or(0);
        // Only the middle window of each product is read, so a cyclic length of
        // mu + wide_max - 1 avoids aliasing into it.
        let len = (mu + wide_max).saturating_sub(1).max(1).next_power_of_two();
        let plan = if wide.is_empty() { None } else { NttPlan::new(&idx.field, len).ok() };
        if plan.is_none() {
            narrow.append(&mut wide);
            narrow.sort_unstable();
        }
        let mut row_spectra = Vec::new();
        let mut col_spectra = Vec::new();
        if let Some(plan) = &plan {
            for &i in &wide {
                let l = idx.degrees[i];
                let rows = (0..idx.n)
                    .map(|u| {
                        let mut buf = vec![FieldElem::ZERO; plan.len()];
                        buf[..mu + l - 1].copy_from_slice(&idx.strips[i].row(u)[..mu + l - 1]);
                        plan.forward_bitrev(&mut buf);
                        buf
                    })
                    .collect();
                let cols = (0..idx.n)
                    .map(|v| {
                        let mut buf = vec![FieldElem::ZERO; plan.len()];
                        for (j, &y) in idx.column_segment(v, i).iter().enumerate() {
                            buf[wide_max - 1 - j] = plan.scale(y);
                        }
                        plan.forward_bitrev(&mut buf);
                        ShoupVec::new(&idx.field, &buf)
                    })
                    .collect();
                row_spectra.push(rows);
                col_spectra.push(cols);
            }
        }
        AllLengthsPlan { idx, plan, wide, narrow, wide_max, row_spectra, col_spectra }
    }

    /// Same values as [`WalkIndex::query_all_lengths`].
    pub fn counts(&self, u: usize, v: usize) -> Vec<FieldElem> {
        let mut out = vec![FieldElem::ZERO; self.idx.mu];
        self.counts_into(u, v, &mut Vec::new(), &mut out);
        out
    }

    /// Writes `w_1..w_mu` into `out`, using `scratch` as the transform
    /// buffer.
    pub fn counts_into(&self, u: usize, v: usize, scratch: &mut Vec<FieldElem>, out: &mut [FieldElem]) {
        let idx = self.idx;
        let f = idx.field;
        let mu = idx.mu;
        assert_eq!(out.len(), mu);
        out.fill(FieldElem::ZERO);
        if mu == 0 {
            return;
        }
        if let Some(plan) = &self.plan {
            scratch.resize(plan.len(), FieldElem::ZERO);
            self.col_spectra[0][v].mul_into(&f, &self.row_spectra[0][u], scratch);
            for s in 1..self.wide.len() {
                self.col_spectra[s][v].mul_add_into(&f, &self.row_spectra[s][u], scratch);
            }
            plan.inverse_bitrev_unscaled(scratch);
            out.copy_from_slice(&scratch[self.wide_max - 1..self.wide_max - 1 + mu]);
        }
        for &i in &self.narrow {
            let l = idx.degrees[i];
            let row = idx.strips[i].row(u);
            let seg = idx.column_segment(v, i);
            for (k, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.dot(&row[k..k + l], seg));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat_pow;
    use rand::Rng;

    fn dp_powers(g: &Graph, field: &PrimeField, k: usize) -> Vec<DenseMatrix> {
        let a = g.adjacency(field);
        let mut out = vec![a.clone()];
        for _ in 1..k {
            let next = mat_mul(out.last().unwrap(), &a).unwrap();
            out.push(next);
        }
        out
    }

    fn built(g: &Graph, seed: u64) -> (FrobeniusForm, WalkIndex) {
        preprocess(g, &PreprocessConfig { seed, ..Default::default() }).unwrap()
    }

    #[test]
    fn three_cycle_queries() {
        let g = Graph::cycle(3);
        let (_, idx) = built(&g, 1);
        assert_eq!(idx.mu(), 3);
        assert_eq!(idx.query_walk_count(0, 0, 3).unwrap(), FieldElem::ONE);
        assert_eq!(idx.query_walk_count(0, 2, 2).unwrap(), FieldElem::ONE);
        assert_eq!(idx.query_walk_count(0, 2, 1).unwrap(), FieldElem::ZERO);
        let w = idx.query_all_lengths(0, 0).unwrap();
        assert_eq!(w.counts, vec![FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE]);
        assert_eq!(idx.query_prefix_count(0, 0, 3).unwrap(), FieldElem::ONE);
        assert_eq!(idx.query_prefix_count(0, 0, 2).unwrap(), FieldElem::ZERO);
        assert_eq!(distance(&idx, &g, 0, 2).unwrap(), Distance::Dist(2));
        assert_eq!(distance(&idx, &g, 1, 1).unwrap(), Distance::Dist(0));
        assert!(matches!(idx.query_walk_count(0, 0, 4), Err(Error::HorizonExceeded { k: 4, mu: 3 })));
        assert!(matches!(idx.query_walk_count(0, 0, 0), Err(Error::HorizonExceeded { .. })));
        assert!(matches!(idx.query_walk_count(3, 0, 1), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn self_loop_vertex() {
        let g = Graph::from_edges(1, [(0, 0)]).unwrap();
        let (_, idx) = built(&g, 2);
        for k in 1..=idx.mu() {
            assert_eq!(idx.query_walk_count(0, 0, k).unwrap(), FieldElem::ONE);
        }
        // loop plus an unrelated 3-cycle
        let g = Graph::from_edges(4, [(0, 0), (1, 2), (2, 3), (3, 1)]).unwrap();
        let (_, idx) = built(&g, 2);
        for k in 1..=idx.mu() {
            assert_eq!(idx.query_walk_count(0, 0, k).unwrap(), FieldElem::ONE);
        }
    }

    #[test]
    fn edgeless_graph_counts_are_zero() {
        let g = Graph::new(5);
        let (_, idx) = built(&g, 3);
        for u in 0..5 {
            for v in 0..5 {
                assert!(idx.query_all_lengths(u, v).unwrap().counts.iter().all(|c| c.is_zero()));
            }
        }
        assert_eq!(distance(&idx, &g, 0, 1).unwrap(), Distance::Unreachable);
    }

    #[test]
    fn single_block_strip_is_uf_then_uf_pow() {
        let g = Graph::cycle(5);
        let (form, idx) = built(&g, 4);
        assert_eq!(idx.block_degrees(), &[5]);
        let uf = mat_mul(form.u(), &form.f_matrix()).unwrap();
        let uf_next = mat_mul(form.u(), &mat_pow(&form.f_matrix(), 6).unwrap()).unwrap();
        assert_eq!(idx.strips()[0], uf.hcat(&uf_next).unwrap());
    }

    #[test]
    fn strip_windows_match_direct_powers() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let g = Graph::random(16, 0.15, true, &mut rng);
            let (form, idx) = built(&g, rng.gen());
            for (i, block) in form.blocks().iter().enumerate() {
                let (l, off) = (block.degree(), form.block_offsets()[i]);
                let u_strip = form.u().submatrix(0..16, off..off + l);
                let c = block.to_matrix(&f);
                for k in 1..=idx.mu() {
                    let direct = mat_mul(&u_strip, &mat_pow(&c, k as u64).unwrap()).unwrap();
                    assert_eq!(idx.strips()[i].submatrix(0..16, k - 1..k - 1 + l), direct);
                }
            }
            assert!(idx.stored_columns() <= 2 * 16);
        }
    }

    #[test]
    fn queries_match_dp_on_random_graphs() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for trial in 0..12 {
            let n = if trial % 2 == 0 { 16 } else { 24 };
            let density = [0.1, 0.3, 0.6][trial % 3];
            let g = Graph::random(n, density, true, &mut rng);
            let (_, idx) = built(&g, rng.gen());
            let powers = dp_powers(&g, &f, idx.mu().max(1));
            let plan = AllLengthsPlan::new(&idx);
            for u in 0..n {
                for v in 0..n {
                    let all = idx.query_all_lengths(u, v).unwrap().counts;
                    assert_eq!(plan.counts(u, v), all);
                    let mut prefix = FieldElem::ZERO;
                    for k in 1..=idx.mu() {
                        let want = powers[k - 1].get(u, v);
                        assert_eq!(idx.query_walk_count(u, v, k).unwrap(), want);
                        assert_eq!(all[k - 1], want);
                        prefix = f.add(prefix, want);
                        assert_eq!(idx.query_prefix_count(u, v, k).unwrap(), prefix);
                    }
                    assert_eq!(
                        idx.first_walk_binary_search(u, v).unwrap(),
                        idx.first_walk_linear_scan(u, v).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn fallback_rows() {
        let f = PrimeField::default();
        let g = Graph::cycle(3);
        let rows = fallback_power_row(&f, &g, 0, 3).unwrap();
        assert_eq!(rows[0], g.adjacency(&f).row(0).to_vec());
        assert_eq!(rows[2], vec![FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = Graph::random(12, 0.3, true, &mut rng);
        let powers = dp_powers(&g, &f, 12);
        for u in 0..12 {
            let rows = fallback_power_row(&f, &g, u, 12).unwrap();
            for k in 0..12 {
                assert_eq!(rows[k], powers[k].row(u).to_vec());
            }
        }
    }

    #[test]
    fn plan_handles_narrow_and_wide_strips() {
        // A 40-cycle plus isolated vertices: one wide block and linear blocks.
        let mut edges: Vec<_> = (0..40).map(|i| (i, (i + 1) % 40)).collect();
        edges.push((40, 41));
        let g = Graph::from_edges(43, edges).unwrap();
        let (_, idx) = built(&g, 9);
        assert!(idx.block_degrees().len() > 1);
        let plan = AllLengthsPlan::new(&idx);
        for u in 0..43 {
            for v in 0..43 {
                assert_eq!(plan.counts(u, v), idx.query_all_lengths(u, v).unwrap().counts);
            }
        }
        let g = Graph::cycle(50);
        let (_, idx) = built(&g, 9);
        let plan = AllLengthsPlan::new(&idx);
        for u in 0..50 {
            for v in 0..50 {
                assert_eq!(plan.counts(u, v), idx.query_all_lengths(u, v).unwrap().counts);
            }
        }
    }

    #[test]
    fn random_prime_preprocess() {
        let g = Graph::cycle(4);
        let cfg = PreprocessConfig { prime: PrimeChoice::Random, seed: 5 };
        let (form, idx) = preprocess(&g, &cfg).unwrap();
        assert!(crate::field::NTT_PRIMES.contains(&form.field().modulus()));
        assert_eq!(idx.query_walk_count(0, 0, 4).unwrap(), FieldElem::ONE);
        let again = preprocess(&g, &cfg).unwrap().1;
        assert_eq!(again, idx);
    }

    #[test]
    fn crt_small_and_cycle() {
        let g = Graph::cycle(3);
        let exact = crt_exact_counts(&g, 0, 0, &[998_244_353, 754_974_721], None, 1).unwrap();
        let want: Vec<BigUint> = [0u32, 0, 1].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(exact.counts, want);
        assert_eq!(exact.exactness, Exactness::ExactCrt);
        assert!(crt_exact_counts(&g, 0, 0, &[7, 7], None, 1).is_err());
        let big = BigUint::from(u64::MAX);
        assert!(matches!(
            crt_exact_counts(&g, 0, 0, &[998_244_353], Some(&big), 1),
            Err(Error::BoundTooSmall(_))
        ));
        let primes = primes_for_bound(&big).unwrap();
        assert!(primes.len() >= 3);
    }

    #[test]
    fn crt_detects_overflowing_counts() {
        // Complete digraph with loops on 6 vertices: 6^(k-1) walks per pair,
        // but its rank-one adjacency gives mu = 1, so use a cyclic dense graph.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = loop {
            let g = Graph::random(8, 0.8, true, &mut rng);
            let (_, idx) = built(&g, 0);
            if idx.mu() == 8 {
                break g;
            }
        };
        // With one tiny prime the large counts cannot be recovered.
        let small = crt_exact_counts(&g, 0, 1, &[13], None, 0);
        if let Ok(c) = small {
            assert!(c.counts.iter().all(|x| x < &BigUint::from(7u32)));
        }
        let exact = crt_exact_counts(&g, 0, 1, &[998_244_353, 1_004_535_809, 469_762_049], None, 0).unwrap();
        assert_eq!(exact.counts.len(), 8);
    }
}
