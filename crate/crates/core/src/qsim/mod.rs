//! Dense statevector simulation over registers of dimension `q`.
//!
//! Basis states are tuples of field elements indexed row-major, the first
//! register most significant, matching the tuple indices of [`crate::zmap`].
//! A query state has `(n + 1) k` registers: the `k` points (`n` registers
//! each) followed by the `k` weights.

mod algorithms;

pub use algorithms::{
    run_interpolation, run_pgm, run_superposed_rep, span_rank, QueryKind, RankReport,
    RepresentativeSource, Simulator, Variant,
};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::budget::Budget;
use crate::field::Field;
use crate::prony::PronyError;
use crate::zmap::{decode_tuple, encode_tuple, poly_eval, pow_u128, CoeffVector, ProblemParams, ZmapError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("register {index} out of range for a {registers}-register state")]
    BadRegisterIndex { index: usize, registers: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{what} needs {needed} but the budget allows {cap}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        cap: u64,
    },
    #[error("parameters do not fit this simulation: {0}")]
    ParamMismatch(String),
    #[error(transparent)]
    Zmap(#[from] ZmapError),
    #[error(transparent)]
    Prony(#[from] PronyError),
}

pub(crate) fn check_amplitudes(what: &'static str, needed: u128, budget: &Budget) -> Result<usize, QsimError> {
    if needed > budget.state_amplitudes as u128 {
        return Err(QsimError::BudgetExceeded {
            what,
            needed,
            cap: budget.state_amplitudes,
        });
    }
    Ok(needed as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `|a> -> q^{-1/2} sum_b e(ab) |b>`
    Forward,
    Inverse,
}

/// One basis amplitude, for JSON dumps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplitudeEntry {
    pub index: u64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug)]
pub struct StateVector {
    field: Field,
    registers: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0, ..., 0>`.
    pub fn new(field: &Field, registers: usize, budget: &Budget) -> Result<Self, QsimError> {
        Self::basis(field, registers, 0, budget)
    }

    pub fn basis(field: &Field, registers: usize, index: u64, budget: &Budget) -> Result<Self, QsimError> {
        let dim = check_amplitudes("statevector", pow_u128(field.order() as u64, registers), budget)?;
        if index as usize >= dim {
            return Err(QsimError::ShapeMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            field: field.clone(),
            registers,
            amps,
        })
    }

    pub fn from_amplitudes(field: &Field, registers: usize, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let dim = pow_u128(field.order() as u64, registers);
        if dim != amps.len() as u128 {
            return Err(QsimError::ShapeMismatch(format!(
                "{} amplitudes for {registers} registers of dimension {}",
                amps.len(),
                field.order()
            )));
        }
        Ok(StateVector {
            field: field.clone(),
            registers,
            amps,
        })
    }

    /// Equal superposition over the given basis indices.
    pub fn uniform_over(
        field: &Field,
        registers: usize,
        indices: &[u64],
        budget: &Budget,
    ) -> Result<Self, QsimError> {
        let dim = check_amplitudes("statevector", pow_u128(field.order() as u64, registers), budget)?;
        if indices.is_empty() {
            return Err(QsimError::ShapeMismatch("empty support".into()));
        }
        let a = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for &i in indices {
            let slot = amps.get_mut(i as usize).ok_or_else(|| {
                QsimError::ShapeMismatch(format!("basis index {i} out of range for dimension {dim}"))
            })?;
            *slot = a;
        }
        Ok(StateVector {
            field: field.clone(),
            registers,
            amps,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Nonzero amplitudes as `(index, re, im)` entries.
    pub fn export(&self) -> Vec<AmplitudeEntry> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| AmplitudeEntry {
                index: i as u64,
                re: a.re,
                im: a.im,
            })
            .collect()
    }
}

/// `q x q` Fourier matrix, row `a`, column `b`.
fn fourier_matrix(field: &Field, direction: Direction) -> Vec<Complex64> {
    let q = field.order() as usize;
    let scale = 1.0 / (q as f64).sqrt();
    let mut m = Vec::with_capacity(q * q);
    for a in field.elements() {
        for b in field.elements() {
            let e = field.kernel(a, b) * scale;
            m.push(match direction {
                Direction::Forward => e,
                Direction::Inverse => e.conj(),
            });
        }
    }
    m
}

/// Applies the Fourier transform over `F_q` to each listed register.
pub fn fourier_on_registers(
    state: &mut StateVector,
    registers: &[usize],
    direction: Direction,
) -> Result<(), QsimError> {
    if let Some(&bad) = registers.iter().find(|&&r| r >= state.registers) {
        return Err(QsimError::BadRegisterIndex {
            index: bad,
            registers: state.registers,
        });
    }
    let q = state.field.order() as usize;
    let kernel = fourier_matrix(&state.field, direction);
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    for &r in registers {
        let stride = q.pow((state.registers - 1 - r) as u32);
        let block = stride * q;
        for base in (0..state.amps.len()).step_by(block) {
            for inner in 0..stride {
                let start = base + inner;
                for (a, slot) in buf.iter_mut().enumerate() {
                    *slot = state.amps[start + a * stride];
                }
                for b in 0..q {
                    state.amps[start + b * stride] =
                        buf.iter().enumerate().map(|(a, &v)| kernel[a * q + b] * v).sum();
                }
            }
        }
    }
    Ok(())
}

/// Fourier transform on every register.
pub fn fourier_all(state: &mut StateVector, direction: Direction) -> Result<(), QsimError> {
    let regs: Vec<usize> = (0..state.registers).collect();
    fourier_on_registers(state, &regs, direction)
}

/// `f` at every point of `F_q^n`, by point index.
fn evaluate_all(params: &ProblemParams, c: &CoeffVector) -> Result<Vec<u32>, QsimError> {
    let q = params.q();
    let n = params.n();
    (0..pow_u128(q, n) as u64)
        .map(|pt| {
            poly_eval(params, c, &decode_tuple(q, n, pt))
                .map(|v| v.index())
                .map_err(QsimError::from)
        })
        .collect()
}

fn check_query_shape(state: &StateVector, params: &ProblemParams) -> Result<(), QsimError> {
    if state.field != *params.field() {
        return Err(QsimError::ShapeMismatch("state and problem use different fields".into()));
    }
    let expected = (params.n() + 1) * params.k();
    if state.registers != expected {
        return Err(QsimError::ShapeMismatch(format!(
            "query state needs {expected} registers, got {}",
            state.registers
        )));
    }
    Ok(())
}

/// `|x, y> -> |x, y + f(x)>` on each of the `k` register pairs.
pub fn standard_query(state: &mut StateVector, params: &ProblemParams, c: &CoeffVector) -> Result<(), QsimError> {
    check_query_shape(state, params)?;
    let fvals = evaluate_all(params, c)?;
    let f = params.field();
    let q = params.q();
    let n = params.n();
    let k = params.k();
    let m = state.registers;
    let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for (idx, &a) in state.amps.iter().enumerate() {
        let mut digits = decode_tuple(q, m, idx as u64);
        for i in 0..k {
            let pt = encode_tuple(q, &digits[i * n..(i + 1) * n]);
            let fx = crate::field::FieldElement::from_index(fvals[pt as usize]);
            digits[n * k + i] = f.add(digits[n * k + i], fx);
        }
        out[encode_tuple(q, &digits) as usize] = a;
    }
    state.amps = out;
    Ok(())
}

/// `|x, y> -> e(sum_i y_i f(x_i)) |x, y>`.
pub fn phase_query(state: &mut StateVector, params: &ProblemParams, c: &CoeffVector) -> Result<(), QsimError> {
    check_query_shape(state, params)?;
    let fvals = evaluate_all(params, c)?;
    let f = params.field();
    let q = params.q();
    let n = params.n();
    let k = params.k();
    let m = state.registers;
    for (idx, a) in state.amps.iter_mut().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let digits = decode_tuple(q, m, idx as u64);
        let mut total = crate::field::FieldElement::ZERO;
        for i in 0..k {
            let pt = encode_tuple(q, &digits[i * n..(i + 1) * n]);
            let fx = crate::field::FieldElement::from_index(fvals[pt as usize]);
            total = f.add(total, f.mul(digits[n * k + i], fx));
        }
        *a *= f.character(total);
    }
    Ok(())
}

/// A phase query built from one standard query: inverse Fourier on the
/// weight registers, the standard query, then the forward Fourier.
pub fn phase_query_via_standard(
    state: &mut StateVector,
    params: &ProblemParams,
    c: &CoeffVector,
) -> Result<(), QsimError> {
    check_query_shape(state, params)?;
    let y_regs: Vec<usize> = (params.n() * params.k()..state.registers).collect();
    fourier_on_registers(state, &y_regs, Direction::Inverse)?;
    standard_query(state, params, c)?;
    fourier_on_registers(state, &y_regs, Direction::Forward)
}

/// Full outcome distribution of a Fourier-basis measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementResult {
    /// Probability of each outcome, by coefficient-vector index.
    pub probabilities: Vec<f64>,
    /// Index of the hidden coefficient vector.
    pub target: u64,
    /// Probability of recovering the hidden coefficient vector.
    pub success: f64,
    pub total: f64,
}

impl MeasurementResult {
    /// Measures `state` (over the `z` registers) in the Fourier basis.
    pub fn measure(mut state: StateVector, target: u64) -> Result<Self, QsimError> {
        fourier_all(&mut state, Direction::Inverse)?;
        let probabilities = state.probabilities();
        let success = *probabilities
            .get(target as usize)
            .ok_or_else(|| QsimError::ShapeMismatch(format!("outcome {target} out of range")))?;
        let total = probabilities.iter().sum();
        Ok(MeasurementResult {
            probabilities,
            target,
            success,
            total,
        })
    }
}
