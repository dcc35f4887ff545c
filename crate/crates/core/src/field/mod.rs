//! Arithmetic in `F_q`, `q = p^r`.
//!
//! Elements are stored as their canonical index: the coefficient vector
//! `(a_0, ..., a_{r-1})` of the polynomial-basis representation read as a
//! base-`p` number with `a_0` as the least significant digit. Index 0 is the
//! zero element and index 1 is the identity, and the order of indices is the
//! order used everywhere a "sorted" or "lexicographic" choice is made.
//!
//! A [`Field`] is a cheap-to-clone handle to precomputed tables (logarithms
//! for multiplication in extension fields, the trace and the additive
//! character). All operations are pure.

mod poly;

pub use poly::{poly_roots, FqPolynomial, RootStrategy};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted by [`Field::new`].
pub const MAX_ORDER: u64 = 1 << 16;

/// Extension fields up to this order get a full addition table.
const ADD_TABLE_MAX: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field order {order} exceeds the configured cap of {cap}")]
    CapExceeded { order: u128, cap: u64 },
    #[error("division by zero")]
    DivideByZero,
    #[error("element index {index} does not belong to a field of order {order}")]
    FieldMismatch { index: u64, order: u32 },
    #[error("polynomial must have degree at least 1")]
    EmptyPolynomial,
}

/// An element of some `F_q`, identified by its canonical index.
///
/// The value carries no reference to its field; arithmetic goes through
/// [`Field`]. Use [`Field::element`] to validate an index.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw index without checking it against any field.
    pub const fn from_index(index: u32) -> Self {
        FieldElement(index)
    }

    pub const fn index(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

struct Tables {
    p: u32,
    r: u32,
    q: u32,
    /// Monic modulus, low-to-high, length `r + 1`.
    modulus: Vec<u32>,
    /// `p^i` for `i < r`.
    place: Vec<u32>,
    add: Option<Vec<u16>>,
    neg: Vec<u32>,
    /// Powers of a primitive element, length `q - 1`. Empty for prime fields.
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    character: Vec<Complex64>,
}

/// The finite field `F_{p^r}`.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t) || (self.t.p == other.t.p && self.t.r == other.t.r)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.t.p)
            .field("r", &self.t.r)
            .field("modulus", &self.t.modulus)
            .finish()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^r` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut r = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p, r))
}

/// All prime powers in `lo..=hi`, ascending.
pub fn prime_powers_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&q| prime_power(q).is_some()).collect()
}

impl Field {
    /// Builds `F_{p^r}` using the smallest monic irreducible modulus of degree `r`.
    ///
    /// Candidate moduli `X^r + m_{r-1} X^{r-1} + ... + m_0` are tried in
    /// increasing order of `(m_{r-1}, ..., m_0)`.
    pub fn new(p: u64, r: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if r == 0 {
            return Err(FieldError::DegreeZero);
        }
        let order = (p as u128).checked_pow(r).unwrap_or(u128::MAX);
        if order > MAX_ORDER as u128 {
            return Err(FieldError::CapExceeded {
                order,
                cap: MAX_ORDER,
            });
        }
        let p = p as u32;
        if r == 1 {
            return Ok(Self::prime(p));
        }
        let base = Self::prime(p);
        let modulus = smallest_irreducible(&base, r);
        Ok(Self::extension(p, r, modulus))
    }

    /// Builds the field of the given order.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        match prime_power(q) {
            Some((p, r)) => Self::new(p, r),
            None => Err(FieldError::NotPrime(q)),
        }
    }

    fn prime(p: u32) -> Self {
        let q = p;
        let neg = (0..q).map(|a| (q - a) % q).collect();
        let t = Tables {
            p,
            r: 1,
            q,
            modulus: vec![0, 1],
            place: vec![1],
            add: None,
            neg,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            character: Vec::new(),
        };
        finish_tables(t)
    }

    fn extension(p: u32, r: u32, modulus: Vec<u32>) -> Self {
        let q = p.pow(r);
        let mut place = Vec::with_capacity(r as usize);
        let mut acc = 1u32;
        for _ in 0..r {
            place.push(acc);
            acc *= p;
        }
        let digits = |a: u32| -> Vec<u32> { (0..r).map(|i| (a / place[i as usize]) % p).collect() };
        let undigits = |d: &[u32]| -> u32 { d.iter().zip(&place).map(|(c, w)| c * w).sum() };
        let neg = (0..q)
            .map(|a| {
                let d: Vec<u32> = digits(a).iter().map(|&c| (p - c) % p).collect();
                undigits(&d)
            })
            .collect();
        let mul_raw = |a: u32, b: u32| -> u32 {
            let da = digits(a);
            let db = digits(b);
            let mut prod = vec![0u64; 2 * r as usize - 1];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] += x as u64 * y as u64;
                }
            }
            let pp = p as u64;
            for c in prod.iter_mut() {
                *c %= pp;
            }
            // reduce by the monic modulus from the top down
            for deg in (r as usize..prod.len()).rev() {
                let lead = prod[deg];
                if lead == 0 {
                    continue;
                }
                prod[deg] = 0;
                for (i, &m) in modulus[..r as usize].iter().enumerate() {
                    let off = deg - r as usize + i;
                    prod[off] = (prod[off] + pp * pp - lead * m as u64) % pp;
                }
            }
            let d: Vec<u32> = prod[..r as usize].iter().map(|&c| c as u32).collect();
            undigits(&d)
        };

        // primitive element: smallest index whose powers cover F_q^*
        let mut exp = Vec::new();
        for g in 2..q {
            exp.clear();
            let mut x = 1u32;
            loop {
                exp.push(x);
                x = mul_raw(x, g);
                if x == 1 || exp.len() >= q as usize {
                    break;
                }
            }
            if exp.len() == (q - 1) as usize {
                break;
            }
        }
        assert_eq!(exp.len(), (q - 1) as usize, "no primitive element found");
        let mut log = vec![0u32; q as usize];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }

        let add = (q <= ADD_TABLE_MAX).then(|| {
            let mut table = vec![0u16; (q * q) as usize];
            for a in 0..q {
                let da = digits(a);
                for b in 0..q {
                    let db = digits(b);
                    let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                    table[(a * q + b) as usize] = undigits(&s) as u16;
                }
            }
            table
        });

        let t = Tables {
            p,
            r,
            q,
            modulus,
            place,
            add,
            neg,
            exp,
            log,
            trace: Vec::new(),
            character: Vec::new(),
        };
        finish_tables(t)
    }

    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    pub fn degree(&self) -> u32 {
        self.t.r
    }

    pub fn order(&self) -> u32 {
        self.t.q
    }

    /// Modulus coefficients, low-to-high, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// Validates an index as an element of this field.
    pub fn element(&self, index: u64) -> Result<FieldElement, FieldError> {
        if index < self.t.q as u64 {
            Ok(FieldElement(index as u32))
        } else {
            Err(FieldError::FieldMismatch {
                index,
                order: self.t.q,
            })
        }
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.t.q
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.t.q).map(FieldElement)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.t.p as i64) as u32)
    }

    /// Polynomial-basis coefficients `(a_0, ..., a_{r-1})`.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let t = &*self.t;
        t.place.iter().map(|w| (a.0 / w) % t.p).collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let t = &*self.t;
        if coeffs.len() != t.r as usize {
            return Err(FieldError::FieldMismatch {
                index: coeffs.len() as u64,
                order: t.q,
            });
        }
        let mut index = 0u64;
        for (&c, &w) in coeffs.iter().zip(&t.place) {
            if c >= t.p {
                return Err(FieldError::FieldMismatch {
                    index: c as u64,
                    order: t.q,
                });
            }
            index += c as u64 * w as u64;
        }
        self.element(index)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let t = &*self.t;
        debug_assert!(a.0 < t.q && b.0 < t.q);
        if t.r == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= t.q { s - t.q } else { s });
        }
        if let Some(table) = &t.add {
            return FieldElement(table[(a.0 * t.q + b.0) as usize] as u32);
        }
        let mut out = 0;
        for &w in &t.place {
            out += (((a.0 / w) % t.p + (b.0 / w) % t.p) % t.p) * w;
        }
        FieldElement(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.t.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let t = &*self.t;
        debug_assert!(a.0 < t.q && b.0 < t.q);
        if t.r == 1 {
            return FieldElement(((a.0 as u64 * b.0 as u64) % t.q as u64) as u32);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = t.q - 1;
        let e = t.log[a.0 as usize] + t.log[b.0 as usize];
        FieldElement(t.exp[(if e >= n { e - n } else { e }) as usize])
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^{q-2}`.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivideByZero);
        }
        Ok(self.pow(a, self.t.q as u64 - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Checked arithmetic: both operands must be elements of this field.
    pub fn arith(
        &self,
        a: FieldElement,
        b: FieldElement,
        op: ArithOp,
    ) -> Result<FieldElement, FieldError> {
        for x in [a, b] {
            self.element(x.0 as u64)?;
        }
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// `a^p`.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.t.p as u64)
    }

    /// Absolute trace to `F_p`, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.t.trace[a.0 as usize]
    }

    /// The additive character `e(a) = exp(2 pi i Tr(a) / p)`.
    #[inline]
    pub fn character(&self, a: FieldElement) -> Complex64 {
        self.t.character[a.0 as usize]
    }

    /// `e(a * b)`, the Fourier kernel.
    #[inline]
    pub fn kernel(&self, a: FieldElement, b: FieldElement) -> Complex64 {
        self.character(self.mul(a, b))
    }
}

fn finish_tables(t: Tables) -> Field {
    let p = t.p;
    let r = t.r;
    let mut field = Field { t: Arc::new(t) };
    // Tr(a) = a + a^p + ... + a^{p^{r-1}}; only add and mul are needed here
    let trace: Vec<u32> = field
        .elements()
        .map(|a| {
            let mut acc = FieldElement::ZERO;
            let mut x = a;
            for _ in 0..r {
                acc = field.add(acc, x);
                x = field.frobenius(x);
            }
            assert!(acc.0 < p, "trace left the prime subfield");
            acc.0
        })
        .collect();
    let roots: Vec<Complex64> = (0..p)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / p as f64))
        .collect();
    let tables = Arc::get_mut(&mut field.t).expect("fresh field handle is unique");
    tables.character = trace.iter().map(|&j| roots[j as usize]).collect();
    tables.trace = trace;
    field
}

fn smallest_irreducible(base: &Field, r: u32) -> Vec<u32> {
    let p = base.order();
    let count = p.pow(r);
    for tail in 0..count {
        let mut coeffs: Vec<FieldElement> = (0..r)
            .map(|i| FieldElement((tail / p.pow(i)) % p))
            .collect();
        coeffs.push(FieldElement::ONE);
        let f = FqPolynomial::new(coeffs);
        if f.is_irreducible(base) {
            return f.coeffs().iter().map(|c| c.index()).collect();
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}
