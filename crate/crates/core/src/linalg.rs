//! Dense linear algebra over `F_q` for the small systems in Prony recovery.

use crate::field::{Field, FieldElement};

/// Solves `A v = b` by Gaussian elimination with nonzero-pivot search.
///
/// Returns `None` if `A` is singular. `A` is square, given row-major.
pub fn solve(field: &Field, a: &[Vec<FieldElement>], b: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n), "system must be square");
    let mut m: Vec<Vec<FieldElement>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = field.inv(m[col][col]).ok()?;
        for v in m[col].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col];
            let pivot_row = m[col].clone();
            for (dst, &src) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst = field.sub(*dst, field.mul(factor, src));
            }
        }
    }
    Some(m.into_iter().map(|row| row[n]).collect())
}

/// `A B` for square matrices.
pub fn matmul(field: &Field, a: &[Vec<FieldElement>], b: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..b.len()).fold(FieldElement::ZERO, |acc, t| {
                        field.add(acc, field.mul(a[i][t], b[t][j]))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}
