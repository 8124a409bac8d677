//! Prime-field arithmetic and number-theoretic transforms.
//!
//! All moduli are primes below 2^31 so that a product of two residues fits in
//! a `u64` and four of them can be accumulated without overflow.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The default modulus, `119 * 2^23 + 1`.
pub const DEFAULT_PRIME: u64 = 998_244_353;

/// NTT-friendly primes `c * 2^k + 1` with `k >= 22`, all in `(2^29, 2^31)`.
pub const NTT_PRIMES: [u64; 30] = [
    595_591_169,
    645_922_817,
    666_894_337,
    683_671_553,
    754_974_721,
    880_803_841,
    897_581_057,
    918_552_577,
    935_329_793,
    943_718_401,
    985_661_441,
    998_244_353,
    1_107_296_257,
    1_161_822_209,
    1_212_153_857,
    1_224_736_769,
    1_300_234_241,
    1_321_205_761,
    1_438_646_273,
    1_484_783_617,
    1_572_864_001,
    1_711_276_033,
    1_790_967_809,
    1_811_939_329,
    1_866_465_281,
    2_013_265_921,
    2_025_848_833,
    2_088_763_393,
    2_113_929_217,
    2_130_706_433,
];

/// A canonical residue in `[0, p)`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(transparent)]
pub struct FieldElem(pub(crate) u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0 as u64
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic context for `Z_p`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    generator: u64,
    max_ntt_len: usize,
    // floor(2^64 / p), for Barrett reduction of u64 values
    barrett: u64,
    // 2^64 mod p
    r64: u64,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimeField")
            .field("p", &self.p)
            .field("generator", &self.generator)
            .field("max_ntt_len", &self.max_ntt_len)
            .finish()
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField::new(DEFAULT_PRIME).expect("default prime is valid")
    }
}

impl PrimeField {
    /// Builds the field for prime `p < 2^31`. The generator is the smallest
    /// primitive root.
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let factors = distinct_prime_factors(p - 1);
        let generator = (1..p)
            .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
            .expect("every prime field has a primitive root");
        let max_ntt_len = 1usize << (p - 1).trailing_zeros();
        let barrett = (((1u128) << 64) / p as u128) as u64;
        let r64 = (((1u128) << 64) % p as u128) as u64;
        Ok(PrimeField { p, generator, max_ntt_len, barrett, r64 })
    }

    /// Picks one of [`NTT_PRIMES`] uniformly at random.
    pub fn random_ntt_friendly<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let p = NTT_PRIMES[rng.gen_range(0..NTT_PRIMES.len())];
        PrimeField::new(p).expect("table primes are valid")
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn generator(&self) -> u64 {
        self.generator
    }

    #[inline]
    pub fn max_ntt_len(&self) -> usize {
        self.max_ntt_len
    }

    /// Reduces an arbitrary integer.
    #[inline]
    pub fn elem(&self, x: u64) -> FieldElem {
        FieldElem(self.reduce(x))
    }

    /// Maps a signed integer to its residue.
    pub fn elem_signed(&self, x: i64) -> FieldElem {
        let r = x.rem_euclid(self.p as i64);
        FieldElem(r as u32)
    }

    #[inline]
    pub(crate) fn reduce(&self, x: u64) -> u32 {
        let q = ((x as u128 * self.barrett as u128) >> 64) as u64;
        let mut r = x - q * self.p;
        if r >= self.p {
            r -= self.p;
        }
        r as u32
    }

    #[inline]
    pub(crate) fn reduce_wide(&self, x: u128) -> u32 {
        let hi = self.reduce((x >> 64) as u64) as u64;
        let lo = self.reduce(x as u64) as u64;
        let folded = self.reduce(hi * self.r64) as u64 + lo;
        if folded >= self.p {
            (folded - self.p) as u32
        } else {
            folded as u32
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let s = a.0 as u64 + b.0 as u64;
        FieldElem(if s >= self.p { s - self.p } else { s } as u32)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 >= b.0 {
            FieldElem(a.0 - b.0)
        } else {
            FieldElem((a.0 as u64 + self.p - b.0 as u64) as u32)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if a.0 == 0 {
            a
        } else {
            FieldElem((self.p - a.0 as u64) as u32)
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.reduce(a.0 as u64 * b.0 as u64))
    }

    pub fn pow(&self, base: FieldElem, mut e: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Dot product with a single reduction at the end.
    pub fn dot(&self, a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
        debug_assert_eq!(a.len(), b.len());
        let mut acc: u128 = 0;
        for (x, y) in a.iter().zip(b) {
            acc += x.0 as u64 as u128 * y.0 as u128;
        }
        FieldElem(self.reduce_wide(acc))
    }

    pub fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(0..self.p) as u32)
    }

    /// A principal `len`-th root of unity, `len` a power of two dividing
    /// `max_ntt_len`.
    fn root_of_unity(&self, len: usize) -> FieldElem {
        debug_assert!(len.is_power_of_two() && len <= self.max_ntt_len);
        self.pow(FieldElem(self.generator as u32), (self.p - 1) / len as u64)
    }
}

/// Forward transform of power-of-two length.
pub fn ntt_forward(field: &PrimeField, a: &mut [FieldElem]) -> Result<()> {
    NttPlan::new(field, a.len())?.forward(a);
    Ok(())
}

/// Inverse transform, including the `1/len` scaling.
pub fn ntt_inverse(field: &PrimeField, a: &mut [FieldElem]) -> Result<()> {
    NttPlan::new(field, a.len())?.inverse(a);
    Ok(())
}

/// Precomputed twiddles for one transform length.
///
/// Twiddles are stored per stage: entries `h..2h` hold the powers of a
/// primitive `2h`-th root, next to their Shoup quotients
/// `floor(w * 2^32 / p)` so a twiddle product costs two 32-bit multiplies.
#[derive(Clone, Debug)]
pub struct NttPlan {
    field: PrimeField,
    len: usize,
    fwd_w: Vec<u32>,
    fwd_q: Vec<u32>,
    inv_w: Vec<u32>,
    inv_q: Vec<u32>,
    inv_len: (u32, u32),
}

#[inline(always)]
fn shoup_quotient(w: u32, p: u32) -> u32 {
    (((w as u64) << 32) / p as u64) as u32
}

#[inline(always)]
fn reduce_once(x: u32, p: u32) -> u32 {
    // x < 2p; the wrapped difference is huge when x < p
    x.min(x.wrapping_sub(p))
}

// x * w mod p for any x < 2^32, fully reduced.
#[inline(always)]
fn shoup_mul(x: u32, w: u32, wq: u32, p: u32) -> u32 {
    let q = ((x as u64 * wq as u64) >> 32) as u32;
    reduce_once(x.wrapping_mul(w).wrapping_sub(q.wrapping_mul(p)), p)
}

fn as_raw(a: &mut [FieldElem]) -> &mut [u32] {
    // FieldElem is a transparent wrapper around u32
    unsafe { std::slice::from_raw_parts_mut(a.as_mut_ptr() as *mut u32, a.len()) }
}

fn as_raw_ref(a: &[FieldElem]) -> &[u32] {
    unsafe { std::slice::from_raw_parts(a.as_ptr() as *const u32, a.len()) }
}

/// Runs `$body` compiled with AVX2 enabled when the CPU has it, so the
/// compiler can vectorize the 32-bit products.
macro_rules! dispatch {
    ($name:ident ( $($arg:ident : $ty:ty),* ) $body:block) => {
        fn $name($($arg: $ty),*) {
            #[inline(always)]
            fn kernel($($arg: $ty),*) $body
            #[cfg(target_arch = "x86_64")]
            {
                #[target_feature(enable = "avx2")]
                unsafe fn wide($($arg: $ty),*) {
                    kernel($($arg),*)
                }
                if std::arch::is_x86_feature_detected!("avx2") {
                    return unsafe { wide($($arg),*) };
                }
            }
            kernel($($arg),*)
        }
    };
}

dispatch!(dif(a: &mut [u32], tw: &[u32], twq: &[u32], p: u32) {
    let n = a.len();
    if n < 4 {
        if n == 2 {
            let (u, v) = (a[0], a[1]);
            a[0] = reduce_once(u + v, p);
            a[1] = reduce_once(u + p - v, p);
        }
        return;
    }
    let mut h = n / 2;
    while h >= 4 {
        let (w, wq) = (&tw[h..2 * h], &twq[h..2 * h]);
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for j in 0..h {
                let (u, v) = (lo[j], hi[j]);
                lo[j] = reduce_once(u + v, p);
                hi[j] = shoup_mul(u + p - v, w[j], wq[j], p);
            }
        }
        h /= 2;
    }
    // the last two stages together; their twiddles are 1, w_4 and 1
    let (w4, w4q) = (tw[3], twq[3]);
    for c in a.chunks_exact_mut(4) {
        let s0 = reduce_once(c[0] + c[2], p);
        let s1 = reduce_once(c[1] + c[3], p);
        let d0 = reduce_once(c[0] + p - c[2], p);
        let d1 = shoup_mul(c[1] + p - c[3], w4, w4q, p);
        c[0] = reduce_once(s0 + s1, p);
        c[1] = reduce_once(s0 + p - s1, p);
        c[2] = reduce_once(d0 + d1, p);
        c[3] = reduce_once(d0 + p - d1, p);
    }
});

dispatch!(dit(a: &mut [u32], tw: &[u32], twq: &[u32], p: u32) {
    let n = a.len();
    if n < 4 {
        if n == 2 {
            let (u, v) = (a[0], a[1]);
            a[0] = reduce_once(u + v, p);
            a[1] = reduce_once(u + p - v, p);
        }
        return;
    }
    let (w4, w4q) = (tw[3], twq[3]);
    for c in a.chunks_exact_mut(4) {
        let a0 = reduce_once(c[0] + c[1], p);
        let a1 = reduce_once(c[0] + p - c[1], p);
        let a2 = reduce_once(c[2] + c[3], p);
        let t = shoup_mul(c[2] + p - c[3], w4, w4q, p);
        c[0] = reduce_once(a0 + a2, p);
        c[2] = reduce_once(a0 + p - a2, p);
        c[1] = reduce_once(a1 + t, p);
        c[3] = reduce_once(a1 + p - t, p);
    }
    let mut h = 4;
    while h < n {
        let (w, wq) = (&tw[h..2 * h], &twq[h..2 * h]);
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for j in 0..h {
                let u = lo[j];
                let v = shoup_mul(hi[j], w[j], wq[j], p);
                lo[j] = reduce_once(u + v, p);
                hi[j] = reduce_once(u + p - v, p);
            }
        }
        h *= 2;
    }
});

dispatch!(scale_all(a: &mut [u32], w: u32, wq: u32, p: u32) {
    for x in a.iter_mut() {
        *x = shoup_mul(*x, w, wq, p);
    }
});

dispatch!(mul_shoup(out: &mut [u32], x: &[u32], w: &[u32], wq: &[u32], p: u32) {
    for (((o, &a), &b), &bq) in out.iter_mut().zip(x).zip(w).zip(wq) {
        *o = shoup_mul(a, b, bq, p);
    }
});

dispatch!(mul_add_shoup(out: &mut [u32], x: &[u32], w: &[u32], wq: &[u32], p: u32) {
    for (((o, &a), &b), &bq) in out.iter_mut().zip(x).zip(w).zip(wq) {
        *o = reduce_once(*o + shoup_mul(a, b, bq, p), p);
    }
});

/// A vector with Shoup quotients precomputed, so that products against it
/// are cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ShoupVec {
    w: Vec<u32>,
    q: Vec<u32>,
}

impl ShoupVec {
    pub(crate) fn new(field: &PrimeField, xs: &[FieldElem]) -> Self {
        let p = field.p as u32;
        ShoupVec { w: xs.iter().map(|x| x.0).collect(), q: xs.iter().map(|x| shoup_quotient(x.0, p)).collect() }
    }

    /// `out = x * self`, pointwise.
    pub(crate) fn mul_into(&self, field: &PrimeField, x: &[FieldElem], out: &mut [FieldElem]) {
        assert!(x.len() == self.w.len() && out.len() == self.w.len());
        mul_shoup(as_raw(out), as_raw_ref(x), &self.w, &self.q, field.p as u32);
    }

    /// `out += x * self`, pointwise.
    pub(crate) fn mul_add_into(&self, field: &PrimeField, x: &[FieldElem], out: &mut [FieldElem]) {
        assert!(x.len() == self.w.len() && out.len() == self.w.len());
        mul_add_shoup(as_raw(out), as_raw_ref(x), &self.w, &self.q, field.p as u32);
    }
}

impl NttPlan {
    pub fn new(field: &PrimeField, len: usize) -> Result<Self> {
        if !len.is_power_of_two() || len > field.max_ntt_len() {
            return Err(Error::LengthOverflow { len, max: field.max_ntt_len() });
        }
        let p = field.p as u32;
        let size = len.max(4);
        let (mut fwd_w, mut inv_w) = (vec![0u32; size], vec![0u32; size]);
        let mut h = 1;
        while h < len {
            let w = field.root_of_unity(2 * h);
            let w_inv = field.inv(w).expect("roots of unity are nonzero");
            let (mut cur, mut cur_inv) = (FieldElem::ONE, FieldElem::ONE);
            for j in 0..h {
                fwd_w[h + j] = cur.0;
                inv_w[h + j] = cur_inv.0;
                cur = field.mul(cur, w);
                cur_inv = field.mul(cur_inv, w_inv);
            }
            h *= 2;
        }
        let fwd_q = fwd_w.iter().map(|&w| shoup_quotient(w, p)).collect();
        let inv_q = inv_w.iter().map(|&w| shoup_quotient(w, p)).collect();
        let il = field.inv(field.elem(len as u64)).expect("len < p").0;
        Ok(NttPlan { field: *field, len, fwd_w, fwd_q, inv_w, inv_q, inv_len: (il, shoup_quotient(il, p)) })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform, natural order in and out.
    pub fn forward(&self, a: &mut [FieldElem]) {
        self.forward_bitrev(a);
        bit_reverse(a);
    }

    /// Inverse transform with the `1/len` scaling, natural order in and out.
    pub fn inverse(&self, a: &mut [FieldElem]) {
        bit_reverse(a);
        self.inverse_bitrev(a);
    }

    /// Forward transform leaving the output in bit-reversed order.
    pub(crate) fn forward_bitrev(&self, a: &mut [FieldElem]) {
        assert_eq!(a.len(), self.len, "buffer length must match the plan");
        dif(as_raw(a), &self.fwd_w, &self.fwd_q, self.field.p as u32);
    }

    /// Scaled inverse of [`Self::forward_bitrev`]: bit-reversed input,
    /// natural output.
    pub(crate) fn inverse_bitrev(&self, a: &mut [FieldElem]) {
        self.inverse_bitrev_unscaled(a);
        scale_all(as_raw(a), self.inv_len.0, self.inv_len.1, self.field.p as u32);
    }

    /// As [`Self::inverse_bitrev`] but without the `1/len` factor.
    pub(crate) fn inverse_bitrev_unscaled(&self, a: &mut [FieldElem]) {
        assert_eq!(a.len(), self.len, "buffer length must match the plan");
        dit(as_raw(a), &self.inv_w, &self.inv_q, self.field.p as u32);
    }

    /// Multiplies by `1/len`.
    pub(crate) fn scale(&self, x: FieldElem) -> FieldElem {
        FieldElem(shoup_mul(x.0, self.inv_len.0, self.inv_len.1, self.field.p as u32))
    }
}

fn bit_reverse(a: &mut [FieldElem]) {
    let n = a.len();
    if n <= 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Linear convolution of `x` and `y` through the NTT.
///
/// Fails with [`Error::LengthOverflow`] when the padded length exceeds what
/// the modulus supports; see [`convolve`] for the variant that falls back to
/// the schoolbook product.
pub fn ntt_convolve(field: &PrimeField, x: &[FieldElem], y: &[FieldElem]) -> Result<Vec<FieldElem>> {
    if x.is_empty() || y.is_empty() {
        return Ok(Vec::new());
    }
    let out_len = x.len() + y.len() - 1;
    let len = out_len.next_power_of_two();
    let plan = NttPlan::new(field, len)?;
    let mut fx = vec![FieldElem::ZERO; len];
    let mut fy = vec![FieldElem::ZERO; len];
    fx[..x.len()].copy_from_slice(x);
    fy[..y.len()].copy_from_slice(y);
    plan.forward_bitrev(&mut fx);
    plan.forward_bitrev(&mut fy);
    for (a, b) in fx.iter_mut().zip(&fy) {
        *a = field.mul(*a, *b);
    }
    plan.inverse_bitrev(&mut fx);
    fx.truncate(out_len);
    Ok(fx)
}

/// O(|x|·|y|) convolution.
pub fn schoolbook_convolve(field: &PrimeField, x: &[FieldElem], y: &[FieldElem]) -> Vec<FieldElem> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            acc[i + j] += a.0 as u64 as u128 * b.0 as u128;
        }
    }
    acc.into_iter().map(|s| FieldElem(field.reduce_wide(s))).collect()
}

const SCHOOLBOOK_CUTOFF: usize = 32;

/// Convolution that picks the NTT when it is available and worthwhile.
pub fn convolve(field: &PrimeField, x: &[FieldElem], y: &[FieldElem]) -> Vec<FieldElem> {
    if x.len().min(y.len()) <= SCHOOLBOOK_CUTOFF {
        return schoolbook_convolve(field, x, y);
    }
    match ntt_convolve(field, x, y) {
        Ok(out) => out,
        Err(_) => schoolbook_convolve(field, x, y),
    }
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn distinct_prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            out.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}
