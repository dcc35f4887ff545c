//! Dense univariate polynomials over `F_q` and root finding.

use rand::Rng;

use super::{Field, FieldElement, FieldError};

/// Coefficients low-to-high; trailing zeros are always trimmed, so the zero
/// polynomial has an empty coefficient vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FqPolynomial {
    coeffs: Vec<FieldElement>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RootStrategy {
    /// Evaluate at every element of the field.
    Exhaustive,
    /// `gcd(f, X^q - X)` followed by random equal-degree splitting.
    #[default]
    Randomized,
}

impl FqPolynomial {
    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FqPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `X`.
    pub fn x() -> Self {
        Self::new(vec![FieldElement::ZERO, FieldElement::ONE])
    }

    /// `prod (X - r)` over the given roots.
    pub fn from_roots(field: &Field, roots: &[FieldElement]) -> Self {
        roots.iter().fold(Self::constant(FieldElement::ONE), |acc, &r| {
            acc.mul(field, &Self::new(vec![field.neg(r), FieldElement::ONE]))
        })
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> FieldElement {
        self.coeffs.last().copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == FieldElement::ONE
    }

    pub fn eval(&self, field: &Field, x: FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub fn add(&self, field: &Field, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[FieldElement], i: usize| v.get(i).copied().unwrap_or(FieldElement::ZERO);
        Self::new(
            (0..n)
                .map(|i| field.add(get(&self.coeffs, i), get(&other.coeffs, i)))
                .collect(),
        )
    }

    pub fn sub(&self, field: &Field, other: &Self) -> Self {
        self.add(field, &other.scale(field, field.neg(FieldElement::ONE)))
    }

    pub fn scale(&self, field: &Field, s: FieldElement) -> Self {
        Self::new(self.coeffs.iter().map(|&c| field.mul(c, s)).collect())
    }

    pub fn mul(&self, field: &Field, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![FieldElement::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Self::new(out)
    }

    pub fn div_rem(&self, field: &Field, divisor: &Self) -> Result<(Self, Self), FieldError> {
        let dd = divisor.degree().ok_or(FieldError::DivideByZero)?;
        let lead_inv = field.inv(divisor.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![FieldElement::ZERO; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = field.mul(rem[i + dd], lead_inv);
            quot[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = field.sub(rem[i + j], field.mul(c, b));
            }
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, field: &Field, divisor: &Self) -> Result<Self, FieldError> {
        Ok(self.div_rem(field, divisor)?.1)
    }

    pub fn monic(&self, field: &Field) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let inv = field.inv(self.leading()).expect("nonzero leading coefficient");
        self.scale(field, inv)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(field: &Field, a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(field, &b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic(field)
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(
        &self,
        field: &Field,
        mut e: u128,
        modulus: &Self,
    ) -> Result<Self, FieldError> {
        let mut base = self.rem(field, modulus)?;
        let mut acc = Self::constant(FieldElement::ONE).rem(field, modulus)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base).rem(field, modulus)?;
            }
            base = base.mul(field, &base).rem(field, modulus)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Removes one factor `(X - a)`, assuming `a` is a root.
    fn deflate(&self, field: &Field, a: FieldElement) -> Self {
        // synthetic division
        let n = self.coeffs.len();
        let mut out = vec![FieldElement::ZERO; n - 1];
        let mut carry = FieldElement::ZERO;
        for i in (1..n).rev() {
            carry = field.add(self.coeffs[i], field.mul(carry, a));
            out[i - 1] = carry;
        }
        Self::new(out)
    }

    fn multiplicity(&self, field: &Field, a: FieldElement) -> usize {
        let mut m = 0;
        let mut g = self.clone();
        while g.degree().is_some_and(|d| d >= 1) && g.eval(field, a).is_zero() {
            g = g.deflate(field, a);
            m += 1;
        }
        m
    }

    /// Irreducibility over `field` by `gcd(f, X^{q^i} - X) = 1` for `i <= deg/2`.
    pub fn is_irreducible(&self, field: &Field) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        let q = field.order() as u128;
        let x = Self::x();
        let mut h = x.clone();
        for _ in 0..n / 2 {
            h = h.pow_mod(field, q, self).expect("nonzero modulus");
            let g = Self::gcd(field, self, &h.sub(field, &x));
            if g.degree() != Some(0) {
                return false;
            }
        }
        true
    }
}

/// All roots of `f` in `F_q` with multiplicities, sorted by element index.
pub fn poly_roots<R: Rng + ?Sized>(
    field: &Field,
    f: &FqPolynomial,
    strategy: RootStrategy,
    rng: &mut R,
) -> Result<Vec<(FieldElement, usize)>, FieldError> {
    match f.degree() {
        None | Some(0) => return Err(FieldError::EmptyPolynomial),
        _ => {}
    }
    let mut roots = match strategy {
        RootStrategy::Exhaustive => field.elements().filter(|&a| f.eval(field, a).is_zero()).collect(),
        RootStrategy::Randomized => randomized_roots(field, f, rng),
    };
    roots.sort();
    Ok(roots
        .into_iter()
        .map(|a| (a, f.multiplicity(field, a)))
        .collect())
}

fn randomized_roots<R: Rng + ?Sized>(
    field: &Field,
    f: &FqPolynomial,
    rng: &mut R,
) -> Vec<FieldElement> {
    let f = f.monic(field);
    let x = FqPolynomial::x();
    let xq = x
        .pow_mod(field, field.order() as u128, &f)
        .expect("nonzero modulus");
    // product of (X - a) over the distinct roots a
    let g = FqPolynomial::gcd(field, &f, &xq.sub(field, &x));
    let deg = g.degree().unwrap_or(0);
    let mut budget = 8 * deg.max(1);
    let mut found = Vec::with_capacity(deg);
    let mut pending = vec![g];
    while let Some(h) = pending.pop() {
        match h.degree() {
            None | Some(0) => continue,
            Some(1) => {
                // X + c  =>  root -c
                found.push(field.neg(h.coeffs()[0]));
                continue;
            }
            Some(_) => {}
        }
        let mut split = None;
        while budget > 0 {
            budget -= 1;
            let s = split_once(field, &h, rng);
            if s.degree().is_some_and(|d| d >= 1 && Some(d) < h.degree()) {
                split = Some(s);
                break;
            }
        }
        match split {
            Some(s) => {
                let (rest, _) = h.div_rem(field, &s).expect("s divides h");
                pending.push(s);
                pending.push(rest);
            }
            None => {
                // retry budget spent: finish this factor by scanning
                found.extend(field.elements().filter(|&a| h.eval(field, a).is_zero()));
            }
        }
    }
    found
}

/// One equal-degree splitting attempt on a product of distinct linear factors.
fn split_once<R: Rng + ?Sized>(field: &Field, h: &FqPolynomial, rng: &mut R) -> FqPolynomial {
    let q = field.order();
    let delta = FieldElement::from_index(rng.gen_range(0..q));
    if field.characteristic() == 2 {
        // Tr_{F_q/F_2}(delta X) mod h vanishes on about half of the roots
        let mut t = FqPolynomial::new(vec![FieldElement::ZERO, delta])
            .rem(field, h)
            .expect("nonzero modulus");
        let mut acc = t.clone();
        for _ in 1..field.degree() {
            t = t.mul(field, &t).rem(field, h).expect("nonzero modulus");
            acc = acc.add(field, &t);
        }
        FqPolynomial::gcd(field, h, &acc)
    } else {
        let shifted = FqPolynomial::new(vec![delta, FieldElement::ONE]);
        let w = shifted
            .pow_mod(field, ((q - 1) / 2) as u128, h)
            .expect("nonzero modulus");
        FqPolynomial::gcd(
            field,
            h,
            &w.sub(field, &FqPolynomial::constant(FieldElement::ONE)),
        )
    }
}
