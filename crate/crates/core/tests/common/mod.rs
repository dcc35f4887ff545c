//! Brute-force reference implementations, independent of the library's
//! tables and algorithms. Only the modulus is taken from a built field.

#![allow(dead_code)]

use std::collections::HashMap;

use qinterp::zmap::ProblemParams;
use qinterp::Field;

/// `F_p[X] / (m)` with elements as base-`p` digit vectors, low degree first.
pub struct NaiveField {
    pub p: u64,
    pub r: usize,
    /// Low to high, monic, length `r + 1`.
    pub modulus: Vec<u64>,
}

impl NaiveField {
    pub fn from_field(f: &Field) -> Self {
        NaiveField {
            p: f.characteristic() as u64,
            r: f.degree() as usize,
            modulus: f.modulus().iter().map(|&c| c as u64).collect(),
        }
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.r as u32) as u32
    }

    pub fn digits(&self, mut idx: u32) -> Vec<u64> {
        (0..self.r)
            .map(|_| {
                let d = idx as u64 % self.p;
                idx /= self.p as u32;
                d
            })
            .collect()
    }

    pub fn index(&self, c: &[u64]) -> u32 {
        c.iter().rev().fold(0u64, |acc, &d| acc * self.p + d) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.digits(a), self.digits(b));
        self.index(&x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.index(&self.digits(a).iter().map(|u| (self.p - u) % self.p).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.r];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        let reduced = poly_rem(self.p, &prod, &self.modulus);
        let mut out = vec![0u64; self.r];
        out[..reduced.len()].copy_from_slice(&reduced);
        self.index(&out)
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// Inverse by the extended Euclidean algorithm on `F_p[X]`.
    pub fn inv_euclid(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let p = self.p;
        let (mut r0, mut r1) = (self.modulus.clone(), trim(self.digits(a)));
        let (mut t0, mut t1) = (vec![], vec![1u64]);
        while !r1.is_empty() {
            let (quot, rem) = poly_divmod(p, &r0, &r1);
            let t2 = poly_sub(p, &t0, &poly_mul(p, &quot, &t1));
            r0 = std::mem::replace(&mut r1, rem);
            t0 = std::mem::replace(&mut t1, t2);
        }
        // r0 is a nonzero constant
        let c_inv = mod_inv(r0[0], p);
        let mut out = vec![0u64; self.r];
        for (i, v) in t0.iter().enumerate() {
            out[i] = v * c_inv % p;
        }
        Some(self.index(&out))
    }

    pub fn trace(&self, a: u32) -> u64 {
        let mut acc = 0;
        let mut term = a;
        for _ in 0..self.r {
            acc = self.add(acc, term);
            term = self.pow(term, self.p);
        }
        let d = self.digits(acc);
        assert!(d[1..].iter().all(|&v| v == 0), "trace left the prime field");
        d[0]
    }
}

pub fn mod_inv(a: u64, p: u64) -> u64 {
    (1..p).find(|b| a * b % p == 1).expect("unit")
}

pub fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub fn poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, u) in a.iter().enumerate() {
        for (j, v) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + u * v) % p;
        }
    }
    trim(out)
}

pub fn poly_sub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub fn poly_divmod(p: u64, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead_inv = mod_inv(*b.last().unwrap(), p);
    let mut quot = vec![0u64; rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() * lead_inv % p;
        quot[shift] = c;
        for (i, v) in b.iter().enumerate() {
            rem[shift + i] = (rem[shift + i] + p * p - c * v % p) % p;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

pub fn poly_rem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    poly_divmod(p, a, b).1
}

/// Monic polynomial of degree `deg` whose non-leading coefficients, read
/// from `X^{deg-1}` down to `X^0`, are the base-`p` digits of `t`.
pub fn monic_from_rank(p: u64, deg: usize, mut t: u64) -> Vec<u64> {
    let mut c = vec![0u64; deg + 1];
    c[deg] = 1;
    for slot in c[..deg].iter_mut() {
        *slot = t % p;
        t /= p;
    }
    c
}

/// No monic factor of degree `1..=deg/2`.
pub fn brute_irreducible(p: u64, f: &[u64]) -> bool {
    let deg = f.len() - 1;
    (1..=deg / 2).all(|e| (0..p.pow(e as u32)).all(|t| !poly_rem(p, f, &monic_from_rank(p, e, t)).is_empty()))
}

/// First irreducible in increasing `(m_{r-1}, ..., m_0)` order.
pub fn smallest_irreducible(p: u64, r: usize) -> Vec<u64> {
    (0..p.pow(r as u32))
        .map(|t| {
            // rank t: most significant digit is m_{r-1}
            let mut c = vec![0u64; r + 1];
            c[r] = 1;
            let mut rest = t;
            for slot in c[..r].iter_mut() {
                *slot = rest % p;
                rest /= p;
            }
            c
        })
        .find(|f| brute_irreducible(p, f))
        .expect("an irreducible exists")
}

/// Fiber sizes by `z` tuple, over all pairs and over good pairs, with the
/// map evaluated by the naive field.
pub fn census_oracle(params: &ProblemParams) -> (HashMap<Vec<u32>, u32>, HashMap<Vec<u32>, u32>) {
    let nf = NaiveField::from_field(params.field());
    let q = nf.order();
    let (n, k) = (params.n(), params.k());
    let exps = params.exponents().to_vec();
    let mut all = HashMap::new();
    let mut good = HashMap::new();
    let digits = |mut idx: u64, len: usize| -> Vec<u32> {
        let mut v = vec![0u32; len];
        for s in v.iter_mut().rev() {
            *s = (idx % q as u64) as u32;
            idx /= q as u64;
        }
        v
    };
    let xs = (q as u64).pow((n * k) as u32);
    let ys = (q as u64).pow(k as u32);
    for xi in 0..xs {
        let x = digits(xi, n * k);
        let pts: Vec<&[u32]> = x.chunks(n.max(1)).take(k).collect();
        let distinct = (0..k).all(|i| (i + 1..k).all(|j| pts[i] != pts[j]));
        for yi in 0..ys {
            let y = digits(yi, k);
            let z: Vec<u32> = exps
                .iter()
                .map(|e| {
                    (0..k).fold(0, |acc, i| {
                        let mono = e
                            .iter()
                            .zip(pts[i])
                            .fold(1, |m, (&ej, &c)| nf.mul(m, nf.pow(c, ej as u64)));
                        nf.add(acc, nf.mul(y[i], mono))
                    })
                })
                .collect();
            *all.entry(z.clone()).or_insert(0) += 1;
            if distinct && y.iter().all(|&v| v != 0) {
                *good.entry(z).or_insert(0) += 1;
            }
        }
    }
    (all, good)
}
