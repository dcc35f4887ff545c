//! Recovering a good preimage of `z` from its power sums.
//!
//! For a good pair with `k` points the sequence `z_j = sum_i y_i x_i^j`
//! satisfies an order-`k` linear recurrence whose characteristic polynomial
//! has the `x_i` as roots. The recurrence coefficients come from a `k x k`
//! Hankel solve, the points from root finding, and the weights from a
//! transposed Vandermonde solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{poly_roots, FqPolynomial, RootStrategy};
use crate::field::{Field, FieldElement, FieldError};
use crate::linalg;
use crate::zmap::{power_sums, PairXY, ProblemParams, ZVector, ZmapError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PronyError {
    #[error("parameters do not fit this inversion: {0}")]
    ParamMismatch(String),
    #[error("index {j} is out of range 0..={k}")]
    IndexOutOfRange { j: usize, k: usize },
    #[error("expected {expected} power sums, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("singular Hankel matrix: no good preimage")]
    SingularHankel,
    #[error("characteristic polynomial has {found} distinct simple roots, expected {expected}")]
    WrongRootCount { found: usize, expected: usize },
    #[error("recovered weight is zero: no good preimage")]
    ZeroWeight,
    #[error("no valid extension found in {attempts} attempts")]
    AttemptsExhausted { attempts: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Zmap(#[from] ZmapError),
}

impl PronyError {
    /// The failure means `z` has no good preimage (for this extension).
    pub fn is_not_in_range(&self) -> bool {
        matches!(
            self,
            PronyError::SingularHankel | PronyError::WrongRootCount { .. } | PronyError::ZeroWeight
        )
    }

    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            PronyError::ParamMismatch(_) => "ParamMismatch",
            PronyError::IndexOutOfRange { .. } => "IndexOutOfRange",
            PronyError::LengthMismatch { .. } => "LengthMismatch",
            PronyError::SingularHankel => "SingularHankel",
            PronyError::WrongRootCount { .. } => "WrongRootCount",
            PronyError::ZeroWeight => "ZeroWeight",
            PronyError::AttemptsExhausted { .. } => "AttemptsExhausted",
            PronyError::Field(_) => "Field",
            PronyError::Zmap(_) => "Zmap",
        }
    }
}

/// `H a = (z_k, ..., z_{2k-1})` with `H[i][j] = z_{i+j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HankelSystem {
    pub matrix: Vec<Vec<FieldElement>>,
    pub rhs: Vec<FieldElement>,
}

impl HankelSystem {
    pub fn new(z: &[FieldElement], k: usize) -> Result<Self, PronyError> {
        if z.len() < 2 * k {
            return Err(PronyError::LengthMismatch {
                expected: 2 * k,
                got: z.len(),
            });
        }
        Ok(HankelSystem {
            matrix: (0..k).map(|i| z[i..i + k].to_vec()).collect(),
            rhs: z[k..2 * k].to_vec(),
        })
    }

    pub fn solve(&self, field: &Field) -> Result<RecurrenceCoeffs, PronyError> {
        linalg::solve(field, &self.matrix, &self.rhs)
            .map(RecurrenceCoeffs)
            .ok_or(PronyError::SingularHankel)
    }
}

/// `a_0, ..., a_{k-1}` with `z_{n+k} = sum_j a_j z_{n+j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RecurrenceCoeffs(pub Vec<FieldElement>);

impl RecurrenceCoeffs {
    /// Coefficients of the recurrence whose characteristic roots are `x`:
    /// `a_j = -(-1)^(k-j) e_{k-j}(x)`.
    pub fn from_roots(field: &Field, x: &[FieldElement]) -> Self {
        let k = x.len();
        let e = elementary_symmetric_all(field, x);
        RecurrenceCoeffs(
            (0..k)
                .map(|j| {
                    let t = e[k - j];
                    if (k - j).is_multiple_of(2) {
                        field.neg(t)
                    } else {
                        t
                    }
                })
                .collect(),
        )
    }

    /// `X^k - sum_j a_j X^j`.
    pub fn characteristic_polynomial(&self, field: &Field) -> FqPolynomial {
        let mut coeffs: Vec<FieldElement> = self.0.iter().map(|&a| field.neg(a)).collect();
        coeffs.push(FieldElement::ONE);
        FqPolynomial::new(coeffs)
    }
}

/// A sorted good pair, plus the guessed `z_{d+1}` when one was needed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CanonicalPair {
    pub pair: PairXY,
    pub extension: Option<FieldElement>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedInversion {
    pub canonical: CanonicalPair,
    /// Draws used, counting the successful one.
    pub attempts: usize,
}

/// `e_0(x), ..., e_k(x)`.
pub fn elementary_symmetric_all(field: &Field, x: &[FieldElement]) -> Vec<FieldElement> {
    let mut e = vec![FieldElement::ZERO; x.len() + 1];
    e[0] = FieldElement::ONE;
    for (m, &xi) in x.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            e[j] = field.add(e[j], field.mul(e[j - 1], xi));
        }
    }
    e
}

pub fn elementary_symmetric(field: &Field, x: &[FieldElement], j: usize) -> Result<FieldElement, PronyError> {
    if j > x.len() {
        return Err(PronyError::IndexOutOfRange { j, k: x.len() });
    }
    Ok(elementary_symmetric_all(field, x)[j])
}

/// Whether `x_i^k = -sum_{j=1}^k x_i^(k-j) (-1)^j e_j(x)` for the point
/// numbered `i` (1-based). Out-of-range `i` gives `false`.
pub fn check_sympoly_identity(field: &Field, x: &[FieldElement], i: usize) -> bool {
    let k = x.len();
    if i == 0 || i > k {
        return false;
    }
    let xi = x[i - 1];
    let e = elementary_symmetric_all(field, x);
    let mut rhs = FieldElement::ZERO;
    for (j, &ej) in e.iter().enumerate().skip(1) {
        let term = field.mul(field.pow(xi, (k - j) as u64), ej);
        rhs = if j % 2 == 0 {
            field.sub(rhs, term)
        } else {
            field.add(rhs, term)
        };
    }
    field.pow(xi, k as u64) == rhs
}

/// Whether the power sums of `(x, y)` obey the order-`k` recurrence from
/// `x` for every start `n <= n_max`.
pub fn check_recurrence(field: &Field, x: &[FieldElement], y: &[FieldElement], n_max: usize) -> bool {
    let k = x.len();
    let a = RecurrenceCoeffs::from_roots(field, x);
    let z = power_sums(field, x, y, n_max + k + 1);
    (0..=n_max).all(|n| {
        let rhs = (0..k).fold(FieldElement::ZERO, |acc, j| field.add(acc, field.mul(a.0[j], z[n + j])));
        z[n + k] == rhs
    })
}

/// Recurrence coefficients from the first `2k` power sums.
pub fn char_poly_from_z(field: &Field, z: &[FieldElement], k: usize) -> Result<RecurrenceCoeffs, PronyError> {
    let system = HankelSystem::new(z, k)?;
    if z[..2 * k].iter().all(|v| v.is_zero()) {
        return Err(PronyError::SingularHankel);
    }
    system.solve(field)
}

/// The sorted good pair with `k` points whose first `2k` power sums are
/// `z[..2k]`.
pub fn recover_pair<R: Rng + ?Sized>(
    field: &Field,
    z: &[FieldElement],
    k: usize,
    strategy: RootStrategy,
    rng: &mut R,
) -> Result<PairXY, PronyError> {
    let a = char_poly_from_z(field, z, k)?;
    let chi = a.characteristic_polynomial(field);
    let roots = poly_roots(field, &chi, strategy, rng)?;
    let simple = roots.iter().filter(|&&(_, m)| m == 1).count();
    if roots.len() != k || simple != k {
        return Err(PronyError::WrongRootCount {
            found: simple,
            expected: k,
        });
    }
    let x: Vec<FieldElement> = roots.into_iter().map(|(r, _)| r).collect();
    let vt: Vec<Vec<FieldElement>> = (0..k)
        .map(|j| x.iter().map(|&xi| field.pow(xi, j as u64)).collect())
        .collect();
    let y = linalg::solve(field, &vt, &z[..k]).ok_or(PronyError::SingularHankel)?;
    if y.iter().any(|v| v.is_zero()) {
        return Err(PronyError::ZeroWeight);
    }
    Ok(PairXY::new(x, y))
}

fn check_shape(params: &ProblemParams, z: &ZVector, d_odd: bool) -> Result<(), PronyError> {
    let d = params.d();
    if params.n() != 1 {
        return Err(PronyError::ParamMismatch("inversion is univariate only".into()));
    }
    let expected_k = if d_odd { d.div_ceil(2) } else { d / 2 + 1 };
    if (d % 2 == 1) != d_odd || params.k() != expected_k {
        let need = if d_odd { "odd d with k = (d+1)/2" } else { "even d with k = d/2+1" };
        return Err(PronyError::ParamMismatch(format!(
            "need {need}, got d = {d}, k = {}",
            params.k()
        )));
    }
    if z.0.len() != d + 1 {
        return Err(PronyError::LengthMismatch {
            expected: d + 1,
            got: z.0.len(),
        });
    }
    params.check_elements(&z.0)?;
    Ok(())
}

/// Seed derived from the entries so that inversion is a function of `z`.
fn z_seed(z: &ZVector) -> u64 {
    z.0.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, e| {
        (h ^ e.index() as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Canonical good preimage for odd `d` and `k = (d+1)/2`.
pub fn invert_z(params: &ProblemParams, z: &ZVector) -> Result<CanonicalPair, PronyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(z_seed(z));
    invert_z_with(params, z, RootStrategy::Randomized, &mut rng)
}

pub fn invert_z_with<R: Rng + ?Sized>(
    params: &ProblemParams,
    z: &ZVector,
    strategy: RootStrategy,
    rng: &mut R,
) -> Result<CanonicalPair, PronyError> {
    check_shape(params, z, true)?;
    let pair = recover_pair(params.field(), &z.0, params.k(), strategy, rng)?;
    Ok(CanonicalPair {
        pair,
        extension: None,
    })
}

/// `40 * k!`.
pub fn default_attempt_cap(k: usize) -> usize {
    40 * (1..=k).product::<usize>()
}

/// Inversion with one guessed entry `z_{d+1}` for even `d`, `k = d/2+1`.
pub fn try_extension<R: Rng + ?Sized>(
    params: &ProblemParams,
    z: &ZVector,
    extension: FieldElement,
    strategy: RootStrategy,
    rng: &mut R,
) -> Result<CanonicalPair, PronyError> {
    check_shape(params, z, false)?;
    params.field().element(extension.index() as u64)?;
    let mut extended = z.0.clone();
    extended.push(extension);
    let pair = recover_pair(params.field(), &extended, params.k(), strategy, rng)?;
    Ok(CanonicalPair {
        pair,
        extension: Some(extension),
    })
}

/// Draws `z_{d+1}` uniformly until the inversion succeeds, at most `cap` times.
pub fn invert_z_extended<R: Rng + ?Sized>(
    params: &ProblemParams,
    z: &ZVector,
    rng: &mut R,
    cap: usize,
) -> Result<ExtendedInversion, PronyError> {
    check_shape(params, z, false)?;
    let q = params.q() as u32;
    for attempt in 1..=cap {
        let ext = FieldElement::from_index(rng.gen_range(0..q));
        match try_extension(params, z, ext, RootStrategy::Randomized, rng) {
            Ok(canonical) => {
                return Ok(ExtendedInversion {
                    canonical,
                    attempts: attempt,
                })
            }
            Err(e) if e.is_not_in_range() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(PronyError::AttemptsExhausted { attempts: cap })
}

/// Every `z_{d+1}` for which the extended inversion succeeds, with its pair.
pub fn valid_extensions(params: &ProblemParams, z: &ZVector) -> Result<Vec<CanonicalPair>, PronyError> {
    check_shape(params, z, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(z_seed(z));
    let mut out = Vec::new();
    for ext in params.field().elements() {
        match try_extension(params, z, ext, RootStrategy::Randomized, &mut rng) {
            Ok(c) => out.push(c),
            Err(e) if e.is_not_in_range() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
