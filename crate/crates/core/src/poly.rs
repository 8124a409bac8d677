//! Univariate polynomials over a prime field, lowest coefficient first.

use crate::field::{FieldElem, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// Remainder of `self` modulo a nonzero `divisor`.
    pub fn rem(&self, divisor: &Poly, field: &PrimeField) -> Poly {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = field.inv(divisor.coeffs[dd]).expect("leading coefficient is nonzero");
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            let q = field.mul(r[top], lead_inv);
            if !q.is_zero() {
                let shift = top - dd;
                for (i, d) in divisor.coeffs.iter().enumerate() {
                    r[shift + i] = field.sub(r[shift + i], field.mul(q, *d));
                }
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    pub fn divides(&self, other: &Poly, field: &PrimeField) -> bool {
        !self.is_zero() && other.rem(self, field).is_zero()
    }
}
