//! Dense row-major matrices over a [`PrimeField`].

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};

#[derive(Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
    field: PrimeField,
}

/// How [`mat_mul_with`] multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MulStrategy {
    /// Cubic kernel with delayed reduction.
    #[default]
    Classical,
    /// Strassen recursion on square operands larger than `threshold`.
    Strassen { threshold: usize },
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} mod {}", self.rows, self.cols, self.field.modulus())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(field: &PrimeField, rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![FieldElem::ZERO; rows * cols], field: *field }
    }

    pub fn identity(field: &PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = FieldElem::ONE;
        }
        m
    }

    pub fn from_fn(
        field: &PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElem,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data, field: *field }
    }

    /// Builds from row-major data, which must already be canonical.
    pub fn from_elems(field: &PrimeField, rows: usize, cols: usize, data: Vec<FieldElem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| x.value() >= field.modulus()) {
            return Err(Error::DimensionMismatch("non-canonical entry".into()));
        }
        Ok(DenseMatrix { rows, cols, data, field: *field })
    }

    /// Builds from integer rows, reducing every entry.
    pub fn from_rows(field: &PrimeField, rows: &[Vec<u64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(field, r, c, |i, j| field.elem(rows[i][j]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    #[inline]
    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        debug_assert!(v.value() < self.field.modulus());
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [FieldElem] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        Self::from_fn(&self.field, rows.len(), cols.len(), |r, c| self.get(r0 + r, c0 + c))
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    /// Column concatenation.
    pub fn hcat(&self, other: &DenseMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = Self::zeros(&self.field, self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| self.get(r, c) == if r == c { FieldElem::ONE } else { FieldElem::ZERO })
            })
    }

    /// `self · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect()
    }

    /// `x^T · self` for a row vector `x`.
    pub fn vec_mul(&self, x: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(x.len(), self.rows);
        let mut acc = vec![0u128; self.cols];
        for (r, xr) in x.iter().enumerate() {
            if xr.is_zero() {
                continue;
            }
            let xr = xr.value() as u128;
            for (a, b) in acc.iter_mut().zip(self.row(r)) {
                *a += xr * b.value() as u128;
            }
        }
        acc.into_iter().map(|s| FieldElem(self.field.reduce_wide(s))).collect()
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.add(*a, *b)).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data, field: f })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.sub(*a, *b)).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data, field: f })
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(p, row);
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for x in self.row_mut(row) {
                *x = f.mul(*x, inv);
            }
            let pivot_row = self.row(row).to_vec();
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if !factor.is_zero() {
                    eliminate(&f, self.row_mut(r), &pivot_row[col..], col, factor);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Basis of the right null space, as the columns of a `cols x nullity`
    /// matrix.
    pub fn kernel_basis(&self) -> DenseMatrix {
        let mut e = self.clone();
        let pivots = e.rref_in_place();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = DenseMatrix::zeros(&f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis.set(fc, k, FieldElem::ONE);
            for (r, &pc) in pivots.iter().enumerate() {
                basis.set(pc, k, f.neg(e.get(r, fc)));
            }
        }
        basis
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }
}

// row[col..] -= factor * pivot
#[inline]
fn eliminate(f: &PrimeField, row: &mut [FieldElem], pivot: &[FieldElem], col: usize, factor: FieldElem) {
    let neg = f.neg(factor);
    for (x, p) in row[col..].iter_mut().zip(pivot) {
        *x = f.add(*x, f.mul(neg, *p));
    }
}

const PAR_THRESHOLD: usize = 64;

/// Exact product `a · b`.
pub fn mat_mul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows || a.field != b.field {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(classical(a, b))
}

pub fn mat_mul_with(a: &DenseMatrix, b: &DenseMatrix, strategy: MulStrategy) -> Result<DenseMatrix> {
    match strategy {
        MulStrategy::Classical => mat_mul(a, b),
        MulStrategy::Strassen { threshold } => {
            if a.cols != b.rows || a.field != b.field {
                return mat_mul(a, b);
            }
            if a.is_square() && b.is_square() {
                Ok(strassen(a, b, threshold.max(1)))
            } else {
                Ok(classical(a, b))
            }
        }
    }
}

fn classical(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let f = a.field;
    let p = f.modulus();
    // Accumulators stay below 2^63; each product is below 2^62.
    let top: u64 = 1 << 63;
    let wrap = (top / p) * p;
    let (n, m) = (a.rows, b.cols);
    let mut out = DenseMatrix::zeros(&f, n, m);
    if m == 0 {
        return out;
    }
    let kernel = |(i, out_row): (usize, &mut [FieldElem])| {
        let mut acc = vec![0u64; m];
        for (k, aik) in a.row(i).iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            let aik = aik.value();
            for (s, bkj) in acc.iter_mut().zip(b.row(k)) {
                let t = *s + aik * bkj.value();
                *s = if t >= top { t - wrap } else { t };
            }
        }
        for (o, s) in out_row.iter_mut().zip(acc) {
            *o = FieldElem(f.reduce(s));
        }
    };
    if n * m * a.cols >= PAR_THRESHOLD * PAR_THRESHOLD * PAR_THRESHOLD {
        out.data.par_chunks_mut(m).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(m).enumerate().for_each(kernel);
    }
    out
}

fn strassen(a: &DenseMatrix, b: &DenseMatrix, threshold: usize) -> DenseMatrix {
    let n = a.rows;
    if n <= threshold || n < 2 {
        return classical(a, b);
    }
    let f = a.field;
    let h = n.div_ceil(2);
    let padded = 2 * h;
    let quad = |m: &DenseMatrix, qi: usize, qj: usize| {
        DenseMatrix::from_fn(&f, h, h, |r, c| {
            let (rr, cc) = (qi * h + r, qj * h + c);
            if rr < n && cc < n {
                m.get(rr, cc)
            } else {
                FieldElem::ZERO
            }
        })
    };
    let (a11, a12, a21, a22) = (quad(a, 0, 0), quad(a, 0, 1), quad(a, 1, 0), quad(a, 1, 1));
    let (b11, b12, b21, b22) = (quad(b, 0, 0), quad(b, 0, 1), quad(b, 1, 0), quad(b, 1, 1));
    let add = |x: &DenseMatrix, y: &DenseMatrix| x.add(y).expect("same shape");
    let sub = |x: &DenseMatrix, y: &DenseMatrix| x.sub(y).expect("same shape");
    let rec = |x: &DenseMatrix, y: &DenseMatrix| strassen(x, y, threshold);

    let m1 = rec(&add(&a11, &a22), &add(&b11, &b22));
    let m2 = rec(&add(&a21, &a22), &b11);
    let m3 = rec(&a11, &sub(&b12, &b22));
    let m4 = rec(&a22, &sub(&b21, &b11));
    let m5 = rec(&add(&a11, &a12), &b22);
    let m6 = rec(&sub(&a21, &a11), &add(&b11, &b12));
    let m7 = rec(&sub(&a12, &a22), &add(&b21, &b22));

    let c11 = add(&sub(&add(&m1, &m4), &m5), &m7);
    let c12 = add(&m3, &m5);
    let c21 = add(&m2, &m4);
    let c22 = add(&add(&sub(&m1, &m2), &m3), &m6);

    let mut full = DenseMatrix::zeros(&f, padded, padded);
    full.set_block(0, 0, &c11);
    full.set_block(0, h, &c12);
    full.set_block(h, 0, &c21);
    full.set_block(h, h, &c22);
    if padded == n {
        full
    } else {
        full.submatrix(0..n, 0..n)
    }
}

/// Inverse by Gauss–Jordan elimination on `[A | I]`.
///
/// Row pivoting suffices: a column with no nonzero entry at or below the
/// diagonal proves the leading columns dependent, so `Singular` is exact.
pub fn mat_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("inverse of {}x{}", a.rows, a.cols)));
    }
    let n = a.rows;
    let f = a.field;
    let mut aug = a.hcat(&DenseMatrix::identity(&f, n))?;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !aug.get(r, col).is_zero()) else {
            return Err(Error::Singular);
        };
        aug.swap_rows(p, col);
        let inv = f.inv(aug.get(col, col))?;
        for x in aug.row_mut(col) {
            *x = f.mul(*x, inv);
        }
        let pivot_row = aug.row(col).to_vec();
        let width = aug.cols;
        let rows: Vec<(usize, &mut [FieldElem])> = aug.data.chunks_mut(width).enumerate().collect();
        let work = |(r, row): (usize, &mut [FieldElem])| {
            if r != col {
                let factor = row[col];
                if !factor.is_zero() {
                    eliminate(&f, row, &pivot_row[col..], col, factor);
                }
            }
        };
        if n >= 2 * PAR_THRESHOLD {
            rows.into_par_iter().for_each(work);
        } else {
            rows.into_iter().for_each(work);
        }
    }
    Ok(aug.submatrix(0..n, n..2 * n))
}

/// `a^k` by repeated squaring; `a^0 = I`.
pub fn mat_pow(a: &DenseMatrix, mut k: u64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("power of {}x{}", a.rows, a.cols)));
    }
    let mut acc = DenseMatrix::identity(&a.field, a.rows);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = classical(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = classical(&base, &base);
        }
    }
    Ok(acc)
}
