//! Desk-scale reproduction of optimal quantum polynomial interpolation over
//! finite fields.
//!
//! - [`field`]: arithmetic in `F_{p^r}`, trace, additive character, root finding.
//! - [`zmap`]: the power-sum map `Z(x, y)_j = sum_i y_i x_i^j`, its range and
//!   fiber statistics by exhaustive enumeration, and the multivariate variant.
//! - [`prony`]: recovering a canonical preimage of `z` from a Hankel solve,
//!   the roots of the characteristic polynomial and a Vandermonde solve.
//! - [`qsim`]: dense statevector simulation of the interpolation algorithms
//!   and the span-rank optimality check.

pub mod budget;
pub mod field;
pub mod linalg;
pub mod prony;
pub mod qsim;
pub mod zmap;

pub use budget::Budget;
pub use field::{Field, FieldElement, FieldError};

use thiserror::Error;

/// Any error raised by the library, for callers that drive several modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Zmap(#[from] zmap::ZmapError),
    #[error(transparent)]
    Prony(#[from] prony::PronyError),
    #[error(transparent)]
    Qsim(#[from] qsim::QsimError),
}

pub type Exact = num_rational::Ratio<u128>;

/// `"num/den"`, always with an explicit denominator.
pub fn exact_string(e: &Exact) -> String {
    format!("{}/{}", e.numer(), e.denom())
}

pub(crate) fn serialize_exact<S: serde::Serializer>(e: &Exact, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&exact_string(e))
}
