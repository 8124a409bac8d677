//! Frobenius normal form `A = U · F · U^{-1}`, with `F` block diagonal in
//! companion matrices whose polynomials form a divisibility chain.
//!
//! The decomposition is the randomized cyclic-vector method: take a vector
//! whose Krylov chain realizes the minimal polynomial of the current operator,
//! split its cyclic subspace off against an invariant complement obtained from
//! a dual Krylov chain, and continue on the complement. Every candidate is
//! checked with [`verify_form`] and retried with fresh randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};
use crate::matrix::{mat_inverse, mat_mul, DenseMatrix};
use crate::poly::Poly;

/// Attempts made by [`frobenius_decompose`] before giving up.
pub const MAX_ATTEMPTS: usize = 8;

/// Companion matrix of the monic `x^r + c_{r-1} x^{r-1} + ... + c_0`.
///
/// The matrix has ones on the subdiagonal and `-c_0, ..., -c_{r-1}` in its
/// last column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompanionBlock {
    coeffs: Vec<FieldElem>,
}

impl CompanionBlock {
    /// `coeffs` holds `c_0..c_{r-1}`; the leading one is implicit.
    pub fn new(coeffs: Vec<FieldElem>) -> Self {
        assert!(!coeffs.is_empty(), "companion blocks have degree at least one");
        CompanionBlock { coeffs }
    }

    /// The block whose last column is `last_column`, i.e. `c_j = -last_column[j]`.
    pub fn from_last_column(field: &PrimeField, last_column: &[FieldElem]) -> Self {
        Self::new(last_column.iter().map(|&x| field.neg(x)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn polynomial(&self) -> Poly {
        let mut c = self.coeffs.clone();
        c.push(FieldElem::ONE);
        Poly::new(c)
    }

    pub fn to_matrix(&self, field: &PrimeField) -> DenseMatrix {
        let r = self.degree();
        let mut m = DenseMatrix::zeros(field, r, r);
        for i in 1..r {
            m.set(i, i - 1, FieldElem::ONE);
        }
        for (i, &c) in self.coeffs.iter().enumerate() {
            m.set(i, r - 1, field.neg(c));
        }
        m
    }

    /// `C · x` in O(r).
    pub fn apply(&self, field: &PrimeField, x: &[FieldElem]) -> Vec<FieldElem> {
        let r = self.degree();
        debug_assert_eq!(x.len(), r);
        let last = x[r - 1];
        (0..r)
            .map(|i| {
                let shifted = if i == 0 { FieldElem::ZERO } else { x[i - 1] };
                field.sub(shifted, field.mul(self.coeffs[i], last))
            })
            .collect()
    }
}

/// Columns `v_1, ..., v_{max_power + r - 1}` with `v_t = C^t e_1`, as an
/// `r x (max_power + r - 1)` matrix whose column `t - 1` is `v_t`.
///
/// For every `1 <= k <= max_power`, the columns of `C^k` are exactly
/// `v_k, ..., v_{k + r - 1}`.
pub fn companion_power_window(field: &PrimeField, block: &CompanionBlock, max_power: usize) -> DenseMatrix {
    assert!(max_power >= 1, "max_power must be positive");
    let r = block.degree();
    let count = max_power + r - 1;
    let mut out = DenseMatrix::zeros(field, r, count);
    let mut v = vec![FieldElem::ZERO; r];
    v[0] = FieldElem::ONE;
    for t in 0..count {
        v = block.apply(field, &v);
        for (i, &x) in v.iter().enumerate() {
            out.set(i, t, x);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusForm {
    u: DenseMatrix,
    u_inv: DenseMatrix,
    blocks: Vec<CompanionBlock>,
    block_offsets: Vec<usize>,
}

impl FrobeniusForm {
    /// Assembles a form from its parts; nothing is checked here, use
    /// [`verify_form`].
    pub fn from_parts(u: DenseMatrix, u_inv: DenseMatrix, blocks: Vec<CompanionBlock>) -> Self {
        let block_offsets = offsets(&blocks);
        FrobeniusForm { u, u_inv, blocks, block_offsets }
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn field(&self) -> &PrimeField {
        self.u.field()
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn u_inv(&self) -> &DenseMatrix {
        &self.u_inv
    }

    pub fn blocks(&self) -> &[CompanionBlock] {
        &self.blocks
    }

    /// Starting column of each block in `U` (and row in `U^{-1}`).
    pub fn block_offsets(&self) -> &[usize] {
        &self.block_offsets
    }

    pub fn block_degrees(&self) -> Vec<usize> {
        self.blocks.iter().map(CompanionBlock::degree).collect()
    }

    /// Degree of the smallest invariant factor (0 for the empty matrix).
    pub fn mu_min(&self) -> usize {
        self.blocks.first().map_or(0, CompanionBlock::degree)
    }

    /// Degree of the minimal polynomial.
    pub fn minpoly_deg(&self) -> usize {
        self.blocks.last().map_or(0, CompanionBlock::degree)
    }

    /// The block-diagonal matrix `F`.
    pub fn f_matrix(&self) -> DenseMatrix {
        let f = *self.field();
        let mut out = DenseMatrix::zeros(&f, self.n(), self.n());
        for (b, &off) in self.blocks.iter().zip(&self.block_offsets) {
            out.set_block(off, off, &b.to_matrix(&f));
        }
        out
    }

    /// `U · F`, using the companion shape: each block shifts columns left and
    /// fills its last column with a combination.
    pub fn u_times_f(&self) -> DenseMatrix {
        let f = *self.field();
        let n = self.n();
        let mut out = DenseMatrix::zeros(&f, n, n);
        for (b, &off) in self.blocks.iter().zip(&self.block_offsets) {
            let r = b.degree();
            for row in 0..n {
                let src = &self.u.row(row)[off..off + r];
                let mut last = FieldElem::ZERO;
                for (j, &c) in b.coeffs().iter().enumerate() {
                    last = f.sub(last, f.mul(c, src[j]));
                }
                for j in 0..r - 1 {
                    out.set(row, off + j, src[j + 1]);
                }
                out.set(row, off + r - 1, last);
            }
        }
        out
    }
}

fn offsets(blocks: &[CompanionBlock]) -> Vec<usize> {
    let mut acc = 0;
    blocks
        .iter()
        .map(|b| {
            let o = acc;
            acc += b.degree();
            o
        })
        .collect()
}

/// Checks that `U · F · U^{-1} = A`, that `U^{-1}` inverts `U`, that block
/// degrees sum to `n` and that every block polynomial divides the next.
pub fn verify_form(a: &DenseMatrix, form: &FrobeniusForm) -> bool {
    let n = a.rows();
    if !a.is_square()
        || form.u.rows() != n
        || !form.u.is_square()
        || form.u_inv.rows() != n
        || !form.u_inv.is_square()
        || form.field() != a.field()
    {
        return false;
    }
    if form.blocks.iter().map(CompanionBlock::degree).sum::<usize>() != n {
        return false;
    }
    let field = *a.field();
    let chain_ok = form
        .blocks
        .windows(2)
        .all(|w| w[0].polynomial().divides(&w[1].polynomial(), &field));
    if !chain_ok {
        return false;
    }
    let Ok(id) = mat_mul(&form.u, &form.u_inv) else { return false };
    if !id.is_identity() {
        return false;
    }
    matches!(mat_mul(&form.u_times_f(), &form.u_inv), Ok(ref m) if m == a)
}

/// Decomposes `a` into Frobenius normal form, blocks ordered by increasing
/// degree. Deterministic for a given `seed`.
pub fn frobenius_decompose(a: &DenseMatrix, seed: u64) -> Result<FrobeniusForm> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        if let Some(form) = attempt_decompose(a, &mut rng) {
            if verify_form(a, &form) {
                return Ok(form);
            }
        }
    }
    Err(Error::DecompositionFailure { attempts: MAX_ATTEMPTS })
}

fn attempt_decompose(a: &DenseMatrix, rng: &mut ChaCha8Rng) -> Option<FrobeniusForm> {
    let field = *a.field();
    let n = a.rows();
    let mut u = DenseMatrix::identity(&field, n);
    let mut current = a.clone();
    let mut offset = 0;
    // Largest block first while peeling.
    let mut found: Vec<(CompanionBlock, usize)> = Vec::new();
    while current.rows() > 0 {
        let split = split_cyclic(&current, rng)?;
        let block = CompanionBlock::new(split.coeffs);
        if let Some((prev, _)) = found.last() {
            if !block.polynomial().divides(&prev.polynomial(), &field) {
                return None;
            }
        }
        if !split.transform.is_identity() {
            let tail = u.submatrix(0..n, offset..n);
            u.set_block(0, offset, &mat_mul(&tail, &split.transform).ok()?);
        }
        let d = block.degree();
        found.push((block, offset));
        offset += d;
        current = split.rest;
    }
    found.reverse();
    let mut ordered = DenseMatrix::zeros(&field, n, n);
    let mut col = 0;
    let mut blocks = Vec::with_capacity(found.len());
    for (block, off) in found {
        let d = block.degree();
        ordered.set_block(0, col, &u.submatrix(0..n, off..off + d));
        col += d;
        blocks.push(block);
    }
    let u_inv = mat_inverse(&ordered).ok()?;
    Some(FrobeniusForm::from_parts(ordered, u_inv, blocks))
}

struct CyclicSplit {
    coeffs: Vec<FieldElem>,
    // columns: Krylov basis, then a basis of the invariant complement
    transform: DenseMatrix,
    rest: DenseMatrix,
}

struct Krylov {
    basis: DenseMatrix,
    coeffs: Vec<FieldElem>,
}

impl Krylov {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }
}

/// Krylov chain `v, Mv, ..., M^{d-1} v` and the monic annihilator of `v`.
fn krylov(m: &DenseMatrix, v: Vec<FieldElem>) -> Krylov {
    let field = *m.field();
    let size = m.rows();
    // (pivot, reduced vector with 1 at pivot, combination of chain vectors)
    let mut echelon: Vec<(usize, Vec<FieldElem>, Vec<FieldElem>)> = Vec::new();
    let mut chain: Vec<Vec<FieldElem>> = Vec::new();
    let mut raw = v;
    loop {
        let j = chain.len();
        let mut x = raw.clone();
        let mut combo = vec![FieldElem::ZERO; j + 1];
        combo[j] = FieldElem::ONE;
        for (pivot, vec, c) in &echelon {
            let factor = x[*pivot];
            if factor.is_zero() {
                continue;
            }
            for (xi, vi) in x.iter_mut().zip(vec) {
                *xi = field.sub(*xi, field.mul(factor, *vi));
            }
            for (ci, di) in combo.iter_mut().zip(c) {
                *ci = field.sub(*ci, field.mul(factor, *di));
            }
        }
        match x.iter().position(|e| !e.is_zero()) {
            None => {
                combo.truncate(j);
                let basis = DenseMatrix::from_fn(&field, size, j, |r, c| chain[c][r]);
                return Krylov { basis, coeffs: combo };
            }
            Some(pivot) => {
                let inv = field.inv(x[pivot]).expect("pivot is nonzero");
                for e in x.iter_mut() {
                    *e = field.mul(*e, inv);
                }
                for e in combo.iter_mut() {
                    *e = field.mul(*e, inv);
                }
                echelon.push((pivot, x, combo));
                let next = m.mul_vec(&raw);
                chain.push(std::mem::replace(&mut raw, next));
            }
        }
    }
}

const DUAL_TRIES: usize = 6;

fn split_cyclic(m: &DenseMatrix, rng: &mut ChaCha8Rng) -> Option<CyclicSplit> {
    let field = *m.field();
    let size = m.rows();

    let mut e1 = vec![FieldElem::ZERO; size];
    e1[0] = FieldElem::ONE;
    let unit = krylov(m, e1);
    if unit.dim() == size {
        return Some(CyclicSplit {
            coeffs: unit.coeffs,
            transform: unit.basis,
            rest: DenseMatrix::zeros(&field, 0, 0),
        });
    }

    // Over small fields a single random vector misses the minimal polynomial
    // with noticeable probability, so keep the longest of several chains.
    let candidates = if field.modulus() >= 1 << 16 { 1 } else { 6 };
    let mut best: Option<Krylov> = None;
    for _ in 0..candidates {
        let v: Vec<FieldElem> = (0..size).map(|_| field.random_elem(rng)).collect();
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let k = krylov(m, v);
        if best.as_ref().is_none_or(|b| k.dim() > b.dim()) {
            best = Some(k);
        }
    }
    let chain = best?;
    let d = chain.dim();
    if d == size {
        return Some(CyclicSplit {
            coeffs: chain.coeffs,
            transform: chain.basis,
            rest: DenseMatrix::zeros(&field, 0, 0),
        });
    }

    for _ in 0..DUAL_TRIES {
        // Rows w, wM, ..., wM^{d-1}; their common kernel is M-invariant when
        // the chain polynomial is the minimal polynomial of M.
        let mut dual = DenseMatrix::zeros(&field, d, size);
        let mut w: Vec<FieldElem> = (0..size).map(|_| field.random_elem(rng)).collect();
        for r in 0..d {
            for (c, &x) in w.iter().enumerate() {
                dual.set(r, c, x);
            }
            w = m.vec_mul(&w);
        }
        let complement = dual.kernel_basis();
        if complement.cols() != size - d {
            continue;
        }
        let Ok(t) = chain.basis.hcat(&complement) else { continue };
        let Ok(t_inv) = mat_inverse(&t) else { continue };
        let conj = mat_mul(&mat_mul(&t_inv, m).ok()?, &t).ok()?;
        let invariant = conj.submatrix(0..d, d..size).is_zero() && conj.submatrix(d..size, 0..d).is_zero();
        if invariant {
            return Some(CyclicSplit {
                coeffs: chain.coeffs,
                transform: t,
                rest: conj.submatrix(d..size, d..size),
            });
        }
    }
    None
}
