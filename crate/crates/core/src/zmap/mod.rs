//! The power-sum map `Z(x, y)_j = sum_i y_i x_i^j` and everything counted
//! from it.
//!
//! Univariate problems are the `n = 1` case of the multivariate map, where
//! `x_i` ranges over points of `F_q^n` and `j` over exponent tuples of total
//! degree at most `d` (graded, then lexicographically descending within a
//! degree). For `n = 1` the exponents are simply `0, 1, ..., d`.
//!
//! Tuples over `F_q` (coefficient vectors, `z` vectors, pairs) are indexed
//! row-major: the first entry is the most significant base-`q` digit. A pair
//! `(x, y)` is the tuple `(x_1, ..., x_k, y_1, ..., y_k)` with every `x_i`
//! flattened to its `n` coordinates.

mod census;
mod multivariate;

pub use census::{
    enumerate_census, fiber_counts, pair_images, preimage_count, EnumOptions, FiberCounts,
    PairImages, Probability, RangeCensus, ScopeStats,
};
pub use multivariate::{
    multivariate_census, MultivariateMode, MultivariateReport, SampleMode, MIN_SAMPLES,
};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZmapError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} needs {needed} but the budget allows {cap}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        cap: u64,
    },
    #[error("at least {min} samples are required, got {got}")]
    InsufficientSamples { got: usize, min: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Which pairs a count ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Every `(x, y)` in `F_q^k x F_q^k`.
    #[default]
    All,
    /// Distinct `x_i` and nonzero `y_i` only.
    Good,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::All => "all",
            Scope::Good => "good",
        })
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Scope::All),
            "good" => Ok(Scope::Good),
            other => Err(format!("unknown scope `{other}` (expected all or good)")),
        }
    }
}

/// Field, degree, query count and number of variables.
#[derive(Clone, Debug)]
pub struct ProblemParams {
    field: Field,
    n: usize,
    d: usize,
    k: usize,
    exponents: Arc<Vec<Vec<u32>>>,
}

impl ProblemParams {
    /// Univariate problem. `k = 0` is accepted as the no-query baseline.
    pub fn new(field: Field, d: usize, k: usize) -> Result<Self, ZmapError> {
        Self::multivariate(field, 1, d, k)
    }

    pub fn multivariate(field: Field, n: usize, d: usize, k: usize) -> Result<Self, ZmapError> {
        if n == 0 {
            return Err(ZmapError::InvalidParams("n must be at least 1".into()));
        }
        if d == 0 {
            return Err(ZmapError::InvalidParams("d must be at least 1".into()));
        }
        if field.order() as usize <= d {
            return Err(ZmapError::InvalidParams(format!(
                "need q > d, got q = {} and d = {d}",
                field.order()
            )));
        }
        Ok(ProblemParams {
            field,
            n,
            d,
            k,
            exponents: Arc::new(exponent_set(n, d)),
        })
    }

    /// Same field, degree and variables with a different query count.
    pub fn with_k(&self, k: usize) -> Self {
        ProblemParams { k, ..self.clone() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.order() as u64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Exponent tuples indexing the coefficients, in canonical order.
    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// `J = C(n + d, d)`; `d + 1` when univariate.
    pub fn num_coeffs(&self) -> usize {
        self.exponents.len()
    }

    /// `q^J`.
    pub fn z_space_size(&self) -> u128 {
        pow_u128(self.q(), self.num_coeffs())
    }

    /// `q^{kn}`.
    pub fn x_space_size(&self) -> u128 {
        pow_u128(self.q(), self.k * self.n)
    }

    /// `q^{(n+1)k}`.
    pub fn pair_space_size(&self) -> u128 {
        pow_u128(self.q(), (self.n + 1) * self.k)
    }

    /// `|X_k^good| * |Y_k^good| = (q^n)!/(q^n - k)! * (q - 1)^k`.
    pub fn good_pair_count(&self) -> u128 {
        let points = pow_u128(self.q(), self.n);
        let k = self.k as u128;
        if k > points {
            return 0;
        }
        let falling: u128 = (0..k).map(|i| points - i).product();
        falling * pow_u128(self.q() - 1, self.k)
    }

    /// Values `point^j` for every exponent tuple `j`.
    pub fn monomials(&self, point: &[FieldElement]) -> Vec<FieldElement> {
        let f = &self.field;
        self.exponents
            .iter()
            .map(|j| {
                j.iter()
                    .zip(point)
                    .fold(FieldElement::ONE, |acc, (&e, &x)| f.mul(acc, f.pow(x, e as u64)))
            })
            .collect()
    }

    pub(crate) fn check_len(&self, what: &'static str, expected: usize, got: usize) -> Result<(), ZmapError> {
        if expected == got {
            Ok(())
        } else {
            Err(ZmapError::LengthMismatch {
                what,
                expected,
                got,
            })
        }
    }

    pub(crate) fn check_elements(&self, v: &[FieldElement]) -> Result<(), ZmapError> {
        for &a in v {
            self.field.element(a.index() as u64)?;
        }
        Ok(())
    }
}

fn exponent_set(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn fill(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            fill(n, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=d as u32 {
        fill(n, total, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

pub(crate) fn pow_u128(base: u64, e: usize) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Row-major index of a tuple over `F_q`.
pub fn encode_tuple(q: u64, entries: &[FieldElement]) -> u64 {
    entries
        .iter()
        .fold(0u64, |acc, &e| acc * q + e.index() as u64)
}

pub fn decode_tuple(q: u64, len: usize, mut index: u64) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; len];
    for slot in out.iter_mut().rev() {
        *slot = FieldElement::from_index((index % q) as u32);
        index /= q;
    }
    out
}

/// Coefficients `c_j` of the hidden polynomial, in exponent order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoeffVector(pub Vec<FieldElement>);

impl CoeffVector {
    pub fn index(&self, q: u64) -> u64 {
        encode_tuple(q, &self.0)
    }

    pub fn from_index(params: &ProblemParams, index: u64) -> Self {
        CoeffVector(decode_tuple(params.q(), params.num_coeffs(), index))
    }
}

/// A point of `F_q^J`, the image space of `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZVector(pub Vec<FieldElement>);

impl ZVector {
    pub fn index(&self, q: u64) -> u64 {
        encode_tuple(q, &self.0)
    }

    pub fn from_index(params: &ProblemParams, index: u64) -> Self {
        ZVector(decode_tuple(params.q(), params.num_coeffs(), index))
    }

    pub fn zero(params: &ProblemParams) -> Self {
        ZVector(vec![FieldElement::ZERO; params.num_coeffs()])
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.0
    }
}

/// Query points `x` (flattened, `n` coordinates each) and weights `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairXY {
    pub x: Vec<FieldElement>,
    pub y: Vec<FieldElement>,
}

impl PairXY {
    pub fn new(x: Vec<FieldElement>, y: Vec<FieldElement>) -> Self {
        PairXY { x, y }
    }

    pub fn k(&self) -> usize {
        self.y.len()
    }

    /// The `i`th query point.
    pub fn point(&self, i: usize, n: usize) -> &[FieldElement] {
        &self.x[i * n..(i + 1) * n]
    }

    /// All points pairwise distinct.
    pub fn is_good_x(&self, n: usize) -> bool {
        let k = self.k();
        (0..k).all(|i| (i + 1..k).all(|j| self.point(i, n) != self.point(j, n)))
    }

    pub fn is_good_y(&self) -> bool {
        self.y.iter().all(|v| !v.is_zero())
    }

    pub fn is_good(&self, n: usize) -> bool {
        self.is_good_x(n) && self.is_good_y()
    }

    pub fn index(&self, q: u64) -> u64 {
        encode_tuple(q, &self.x) * pow_u128(q, self.y.len()) as u64 + encode_tuple(q, &self.y)
    }

    pub fn from_index(params: &ProblemParams, index: u64) -> Self {
        let q = params.q();
        let k = params.k();
        let y_space = pow_u128(q, k) as u64;
        PairXY {
            x: decode_tuple(q, k * params.n(), index / y_space),
            y: decode_tuple(q, k, index % y_space),
        }
    }

    /// Reorders the points ascending by canonical index, carrying `y` along.
    /// Univariate only.
    pub fn sorted(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.k()).collect();
        idx.sort_by_key(|&i| self.x[i]);
        PairXY {
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

/// `f(x) = sum_j c_j x^j` at a point of `F_q^n`.
pub fn poly_eval(
    params: &ProblemParams,
    c: &CoeffVector,
    point: &[FieldElement],
) -> Result<FieldElement, ZmapError> {
    params.check_len("coefficient vector", params.num_coeffs(), c.0.len())?;
    params.check_len("point", params.n(), point.len())?;
    params.check_elements(&c.0)?;
    params.check_elements(point)?;
    let f = params.field();
    if params.n() == 1 {
        let x = point[0];
        return Ok(c
            .0
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &cj| f.add(f.mul(acc, x), cj)));
    }
    let m = params.monomials(point);
    Ok(dot(f, &c.0, &m))
}

pub(crate) fn dot(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    a.iter()
        .zip(b)
        .fold(FieldElement::ZERO, |acc, (&u, &v)| f.add(acc, f.mul(u, v)))
}

/// `Z(x, y)_j = sum_i y_i x_i^j`.
pub fn z_eval(params: &ProblemParams, pair: &PairXY) -> Result<ZVector, ZmapError> {
    params.check_len("x", params.k() * params.n(), pair.x.len())?;
    params.check_len("y", params.k(), pair.y.len())?;
    params.check_elements(&pair.x)?;
    params.check_elements(&pair.y)?;
    let f = params.field();
    let mut z = vec![FieldElement::ZERO; params.num_coeffs()];
    for i in 0..params.k() {
        let m = params.monomials(pair.point(i, params.n()));
        let yi = pair.y[i];
        for (zj, mj) in z.iter_mut().zip(m) {
            *zj = f.add(*zj, f.mul(yi, mj));
        }
    }
    Ok(ZVector(z))
}

/// Power sums `sum_i y_i x_i^j` for `j = 0..len`, univariate.
pub fn power_sums(field: &Field, x: &[FieldElement], y: &[FieldElement], len: usize) -> Vec<FieldElement> {
    let mut z = vec![FieldElement::ZERO; len];
    for (&xi, &yi) in x.iter().zip(y) {
        let mut term = yi;
        for zj in z.iter_mut() {
            *zj = field.add(*zj, term);
            term = field.mul(term, xi);
        }
    }
    z
}
