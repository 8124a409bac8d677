//! Hankel matrix-vector products through one convolution.

use crate::error::{Error, Result};
use crate::field::{convolve, FieldElem, PrimeField};

/// An implicit `rows x cols` Hankel matrix with entry `(i, j) = seq[i + j]`
/// (zero-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HankelSpec {
    seq: Vec<FieldElem>,
    rows: usize,
    cols: usize,
}

impl HankelSpec {
    pub fn new(seq: Vec<FieldElem>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || seq.len() != rows + cols - 1 {
            return Err(Error::DimensionMismatch(format!(
                "a {rows}x{cols} Hankel matrix needs {} defining values, got {}",
                (rows + cols).saturating_sub(1),
                seq.len()
            )));
        }
        Ok(HankelSpec { seq, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seq(&self) -> &[FieldElem] {
        &self.seq
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> FieldElem {
        self.seq[i + j]
    }
}

/// `y_i = sum_j seq[i + j] * x_j`.
///
/// Reverses `x`, convolves it with the defining sequence and keeps the window
/// `[cols - 1, cols - 1 + rows)`. Moduli without a long enough transform fall
/// back to the schoolbook convolution, so this never fails on valid input.
pub fn hankel_matvec(field: &PrimeField, h: &HankelSpec, x: &[FieldElem]) -> Result<Vec<FieldElem>> {
    if x.len() != h.cols {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against {} columns",
            x.len(),
            h.cols
        )));
    }
    let reversed: Vec<FieldElem> = x.iter().rev().copied().collect();
    let full = convolve(field, &h.seq, &reversed);
    Ok(full[h.cols - 1..h.cols - 1 + h.rows].to_vec())
}

/// The O(rows·cols) product, with the matrix never materialized.
pub fn hankel_matvec_dense(field: &PrimeField, h: &HankelSpec, x: &[FieldElem]) -> Vec<FieldElem> {
    assert_eq!(x.len(), h.cols);
    (0..h.rows).map(|i| field.dot(&h.seq[i..i + h.cols], x)).collect()
}
