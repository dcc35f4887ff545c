//! Algebraic and structural invariants over random inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use qinterp::field::{poly_roots, FqPolynomial, RootStrategy};
use qinterp::linalg;
use qinterp::prony::{
    char_poly_from_z, check_recurrence, check_sympoly_identity, invert_z, HankelSystem, RecurrenceCoeffs,
};
use qinterp::qsim::{
    fourier_on_registers, phase_query, phase_query_via_standard, standard_query, Direction, StateVector,
};
use qinterp::zmap::{poly_eval, z_eval, CoeffVector, PairXY, ProblemParams};
use qinterp::{Budget, Field, FieldElement};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORDERS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27];

fn field(i: usize) -> Field {
    Field::with_order(ORDERS[i % ORDERS.len()]).unwrap()
}

fn elem(f: &Field, raw: u32) -> FieldElement {
    FieldElement::from_index(raw % f.order())
}

fn elems(f: &Field, raw: &[u32]) -> Vec<FieldElement> {
    raw.iter().map(|&r| elem(f, r)).collect()
}

/// `k` distinct elements and `k` nonzero weights.
fn good_pair(f: &Field, k: usize, raw_x: &[u32], raw_y: &[u32]) -> Option<PairXY> {
    let mut x = Vec::new();
    for &r in raw_x {
        let v = elem(f, r);
        if !x.contains(&v) {
            x.push(v);
        }
        if x.len() == k {
            break;
        }
    }
    if x.len() < k {
        return None;
    }
    let q = f.order();
    let y = raw_y[..k].iter().map(|&r| FieldElement::from_index(1 + r % (q - 1))).collect();
    Some(PairXY::new(x, y))
}

proptest! {
    #[test]
    fn field_axioms(fi in 0usize..10, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = field(fi);
        let (a, b, c) = (elem(&f, a), elem(&f, b), elem(&f, c));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.zero()), a);
        prop_assert_eq!(f.mul(a, f.one()), a);
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
        }
    }

    #[test]
    fn frobenius_is_additive(fi in 0usize..10, a in any::<u32>(), b in any::<u32>()) {
        let f = field(fi);
        let (a, b) = (elem(&f, a), elem(&f, b));
        let p = f.characteristic() as u64;
        prop_assert_eq!(f.pow(f.add(a, b), p), f.add(f.pow(a, p), f.pow(b, p)));
        prop_assert_eq!(f.frobenius(a), f.pow(a, p));
    }

    #[test]
    fn trace_is_linear_and_frobenius_invariant(fi in 0usize..10, a in any::<u32>(), b in any::<u32>(), s in any::<u32>()) {
        let f = field(fi);
        let p = f.characteristic();
        let (a, b) = (elem(&f, a), elem(&f, b));
        let s = FieldElement::from_index(s % p);
        prop_assert!(f.trace(a) < p);
        prop_assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
        prop_assert_eq!(f.trace(f.mul(s, a)), s.index() * f.trace(a) % p);
        prop_assert_eq!(f.trace(f.frobenius(a)), f.trace(a));
    }

    #[test]
    fn character_is_a_homomorphism(fi in 0usize..10, a in any::<u32>(), b in any::<u32>()) {
        let f = field(fi);
        let (a, b) = (elem(&f, a), elem(&f, b));
        let lhs = f.character(f.add(a, b));
        prop_assert!((lhs - f.character(a) * f.character(b)).norm() < 1e-12);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn character_orthogonality(fi in 0usize..10, v in any::<u32>()) {
        let f = field(fi);
        let v = elem(&f, v);
        let q = f.order() as f64;
        let s: Complex64 = f.elements().map(|z| f.character(f.mul(z, v))).sum();
        let want = if v.is_zero() { q } else { 0.0 };
        prop_assert!((s - Complex64::new(want, 0.0)).norm() < 1e-9 * q);
    }

    #[test]
    fn root_strategies_agree(fi in 0usize..10, raw in prop::collection::vec(any::<u32>(), 2..10), seed in any::<u64>()) {
        let f = field(fi);
        let mut coeffs = elems(&f, &raw);
        let last = coeffs.len() - 1;
        if coeffs[last].is_zero() {
            coeffs[last] = f.one();
        }
        let poly = FqPolynomial::new(coeffs);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fast = poly_roots(&f, &poly, RootStrategy::Randomized, &mut rng).unwrap();
        let slow = poly_roots(&f, &poly, RootStrategy::Exhaustive, &mut rng).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn z_map_is_linear_in_weights(
        fi in 2usize..10, d in 1usize..4, raw_x in prop::collection::vec(any::<u32>(), 3),
        raw_y in prop::collection::vec(any::<u32>(), 3), raw_w in prop::collection::vec(any::<u32>(), 3),
        lam in any::<u32>(),
    ) {
        let f = field(fi);
        prop_assume!(f.order() as usize > d);
        let params = ProblemParams::new(f.clone(), d, 3).unwrap();
        let x = elems(&f, &raw_x);
        let (y, w) = (elems(&f, &raw_y), elems(&f, &raw_w));
        let lam = elem(&f, lam);
        let sum: Vec<FieldElement> = y.iter().zip(&w).map(|(&a, &b)| f.add(a, b)).collect();
        let scaled: Vec<FieldElement> = y.iter().map(|&a| f.mul(lam, a)).collect();
        let zy = z_eval(&params, &PairXY::new(x.clone(), y)).unwrap();
        let zw = z_eval(&params, &PairXY::new(x.clone(), w)).unwrap();
        let zs = z_eval(&params, &PairXY::new(x.clone(), sum)).unwrap();
        let zl = z_eval(&params, &PairXY::new(x, scaled)).unwrap();
        for j in 0..=d {
            prop_assert_eq!(zs.0[j], f.add(zy.0[j], zw.0[j]));
            prop_assert_eq!(zl.0[j], f.mul(lam, zy.0[j]));
        }
    }

    #[test]
    fn z_map_is_permutation_invariant(
        fi in 2usize..10, raw_x in prop::collection::vec(any::<u32>(), 6), raw_y in prop::collection::vec(any::<u32>(), 6),
        n in 1usize..3, shift in 1usize..3,
    ) {
        let f = field(fi);
        prop_assume!(f.order() > 2);
        let params = ProblemParams::multivariate(f.clone(), n, 2, 3).unwrap();
        let x = elems(&f, &raw_x[..3 * n]);
        let y = elems(&f, &raw_y[..3]);
        let perm: Vec<usize> = (0..3).map(|i| (i + shift) % 3).collect();
        let px: Vec<FieldElement> = perm.iter().flat_map(|&i| x[i * n..(i + 1) * n].to_vec()).collect();
        let py: Vec<FieldElement> = perm.iter().map(|&i| y[i]).collect();
        prop_assert_eq!(
            z_eval(&params, &PairXY::new(x, y)).unwrap(),
            z_eval(&params, &PairXY::new(px, py)).unwrap()
        );
    }

    #[test]
    fn phase_identity(
        fi in 2usize..10, n in 1usize..3, raw_c in prop::collection::vec(any::<u32>(), 10),
        raw_x in prop::collection::vec(any::<u32>(), 6), raw_y in prop::collection::vec(any::<u32>(), 3),
    ) {
        let f = field(fi);
        prop_assume!(f.order() > 2);
        let params = ProblemParams::multivariate(f.clone(), n, 2, 3).unwrap();
        let c = CoeffVector(elems(&f, &raw_c[..params.num_coeffs()]));
        let pair = PairXY::new(elems(&f, &raw_x[..3 * n]), elems(&f, &raw_y));
        let lhs = (0..3).fold(f.zero(), |acc, i| {
            let fx = poly_eval(&params, &c, pair.point(i, n)).unwrap();
            f.add(acc, f.mul(pair.y[i], fx))
        });
        let z = z_eval(&params, &pair).unwrap();
        let rhs = c.0.iter().zip(&z.0).fold(f.zero(), |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sympoly_and_recurrence_hold(fi in 0usize..10, raw_x in prop::collection::vec(any::<u32>(), 1..5), raw_y in prop::collection::vec(any::<u32>(), 4)) {
        let f = field(fi);
        let x = elems(&f, &raw_x);
        let y = elems(&f, &raw_y[..x.len()]);
        for i in 1..=x.len() {
            prop_assert!(check_sympoly_identity(&f, &x, i));
        }
        prop_assert!(check_recurrence(&f, &x, &y, 10));
    }

    #[test]
    fn inversion_round_trip(fi in 3usize..10, kk in 1usize..4, raw_x in prop::collection::vec(any::<u32>(), 12), raw_y in prop::collection::vec(any::<u32>(), 3)) {
        let f = field(fi);
        let d = 2 * kk - 1;
        prop_assume!(f.order() as usize > d);
        let pair = good_pair(&f, kk, &raw_x, &raw_y);
        prop_assume!(pair.is_some());
        let pair = pair.unwrap();
        let params = ProblemParams::new(f.clone(), d, kk).unwrap();
        let z = z_eval(&params, &pair).unwrap();
        let c = invert_z(&params, &z).unwrap();
        let sorted = pair.sorted();
        prop_assert_eq!(&c.pair, &sorted);
        // coefficients and Hankel factorization
        let a = char_poly_from_z(&f, &z.0, kk).unwrap();
        prop_assert_eq!(&a, &RecurrenceCoeffs::from_roots(&f, &sorted.x));
        let h = HankelSystem::new(&z.0, kk).unwrap().matrix;
        let v: Vec<Vec<FieldElement>> = (0..kk)
            .map(|i| sorted.x.iter().map(|&xi| f.pow(xi, i as u64)).collect())
            .collect();
        let vt = linalg::transpose(&v);
        let dy: Vec<Vec<FieldElement>> = (0..kk)
            .map(|i| (0..kk).map(|j| if i == j { sorted.y[i] } else { f.zero() }).collect())
            .collect();
        // V[i][m] = x_m^i, so H = V diag(y) V^T
        let prod = linalg::matmul(&f, &linalg::matmul(&f, &v, &dy), &vt);
        prop_assert_eq!(h, prod);
        let chi = a.characteristic_polynomial(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let roots = poly_roots(&f, &chi, RootStrategy::Exhaustive, &mut rng).unwrap();
        prop_assert_eq!(roots.iter().map(|r| r.0).collect::<Vec<_>>(), sorted.x);
    }

    #[test]
    fn fourier_round_trip(fi in 0usize..6, regs in 1usize..3, raw in prop::collection::vec(-1.0f64..1.0, 2 * 81)) {
        let f = field(fi);
        let dim = (f.order() as usize).pow(regs as u32);
        let amps: Vec<Complex64> = (0..dim).map(|i| Complex64::new(raw[2 * i], raw[2 * i + 1])).collect();
        let mut s = StateVector::from_amplitudes(&f, regs, amps.clone()).unwrap();
        let before = s.norm();
        let all: Vec<usize> = (0..regs).collect();
        fourier_on_registers(&mut s, &all, Direction::Forward).unwrap();
        prop_assert!((s.norm() - before).abs() < 1e-9);
        fourier_on_registers(&mut s, &all, Direction::Inverse).unwrap();
        for (a, b) in s.amplitudes().iter().zip(&amps) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn queries_preserve_norm(fi in 0usize..5, raw_c in prop::collection::vec(any::<u32>(), 3), raw in prop::collection::vec(-1.0f64..1.0, 2 * 81)) {
        let f = field(fi);
        prop_assume!(f.order() > 2);
        let params = ProblemParams::new(f.clone(), 2, 2).unwrap();
        let c = CoeffVector(elems(&f, &raw_c));
        let dim = (f.order() as usize).pow(4);
        let amps: Vec<Complex64> = (0..dim).map(|i| Complex64::new(raw[(2 * i) % raw.len()], raw[(2 * i + 1) % raw.len()])).collect();
        let mut s = StateVector::from_amplitudes(&f, 4, amps).unwrap();
        let before = s.norm();
        standard_query(&mut s, &params, &c).unwrap();
        prop_assert!((s.norm() - before).abs() < 1e-9);
        phase_query(&mut s, &params, &c).unwrap();
        prop_assert!((s.norm() - before).abs() < 1e-9);
    }
}

#[test]
fn phase_equals_conjugated_standard_on_basis() {
    let budget = Budget::default();
    for q in [3u64, 4, 5] {
        let f = Field::with_order(q).unwrap();
        let params = ProblemParams::new(f.clone(), 1, 1).unwrap();
        for ci in 0..q * q {
            let c = CoeffVector::from_index(&params, ci);
            for b in 0..q * q {
                let mut s1 = StateVector::basis(&f, 2, b, &budget).unwrap();
                let mut s2 = s1.clone();
                phase_query(&mut s1, &params, &c).unwrap();
                phase_query_via_standard(&mut s2, &params, &c).unwrap();
                for (u, v) in s1.amplitudes().iter().zip(s2.amplitudes()) {
                    assert!((u - v).norm() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn root_strategies_agree_on_many_polynomials() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in ORDERS {
        let f = Field::with_order(q).unwrap();
        for _ in 0..1000 {
            let deg = rng.gen_range(1..=8);
            let mut coeffs: Vec<FieldElement> = (0..=deg).map(|_| elem(&f, rng.gen())).collect();
            coeffs[deg] = FieldElement::from_index(rng.gen_range(1..f.order()));
            let poly = FqPolynomial::new(coeffs);
            let fast = poly_roots(&f, &poly, RootStrategy::Randomized, &mut rng).unwrap();
            let slow = poly_roots(&f, &poly, RootStrategy::Exhaustive, &mut rng).unwrap();
            assert_eq!(fast, slow, "q = {q}");
        }
    }
}
