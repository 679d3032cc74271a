use serde::Serialize;

use super::system::Exponents;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, Var};

/// Linear parts after the ramification `z1 = x1^p`, in `(z1, x2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct RankReducedPair<S> {
    pub a_tilde: BivariateSeries<S>,
    pub b_tilde: BivariateSeries<S>,
    /// `z1 x2^{q'} (x2 dA~/dx2 - q A~) - p z1 x2^q (z1 dB~/dz1 - B~) + [A~, B~]`.
    pub residual: BivariateSeries<S>,
}

/// `A_i(z1, x2)` with `A = sum_{i<p} x1^i A_i(x1^p, x2)`, known to `trunc`.
fn ramified_part<S: Scalar>(a: &BivariateSeries<S>, p: usize, i: usize, trunc: usize) -> BivariateSeries<S> {
    let entries = a
        .terms()
        .filter(|((n, _), _)| n % p == i)
        .map(|((n, m), v)| ((n / p, m), v.to_vec()))
        .filter(|((n, m), _)| n + m <= trunc);
    BivariateSeries::from_entries(entries, trunc, a.shape()).expect("entries within trunc")
}

/// Block `(r, j)` is `A_{r-j}` on and below the diagonal and `z1 A_{p+r-j}`
/// above it.
fn circulant<S: Scalar>(parts: &[BivariateSeries<S>], trunc: usize) -> Vec<Vec<BivariateSeries<S>>> {
    let p = parts.len();
    (0..p)
        .map(|r| {
            (0..p)
                .map(|j| {
                    if j <= r {
                        parts[r - j].clone()
                    } else {
                        parts[p + r - j].mul_monomial(1, 0).truncated(trunc)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn rank_reduce<S: Scalar>(
    a: &BivariateSeries<S>,
    b: &BivariateSeries<S>,
    exponents: Exponents,
) -> Result<RankReducedPair<S>> {
    let Exponents { p, q, p2, q2 } = exponents;
    if p != p2 {
        return Err(Error::Exponents(format!("rank reduction needs p = p', got p = {p}, p' = {p2}")));
    }
    if !a.shape().is_square() {
        return Err(Error::NotSquare(a.shape()));
    }
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch { expected: a.shape(), found: b.shape() });
    }
    let l = a.shape().rows;
    let trunc = (a.trunc().min(b.trunc()) + 1) / p;
    let trunc = trunc.checked_sub(1).ok_or(Error::TruncationTooSmall { trunc: a.trunc().min(b.trunc()), needed: p - 1 })?;
    let a_parts: Vec<_> = (0..p).map(|i| ramified_part(a, p, i, trunc)).collect();
    let b_parts: Vec<_> = (0..p).map(|i| ramified_part(b, p, i, trunc)).collect();
    let mut a_blocks = circulant(&a_parts, trunc);
    for (r, row) in a_blocks.iter_mut().enumerate() {
        let shift = BivariateSeries::identity(l, trunc)
            .mul_monomial(1, q)
            .scale(&S::from_i64(r as i64))
            .truncated(trunc);
        row[r] = row[r].sub(&shift)?;
    }
    let a_tilde = BivariateSeries::block_matrix(&a_blocks)?;
    let b_tilde = BivariateSeries::block_matrix(&circulant(&b_parts, trunc))?;
    let residual = reduced_residual(&a_tilde, &b_tilde, p, q, q2)?;
    Ok(RankReducedPair { a_tilde, b_tilde, residual })
}

/// Integrability identity of the ramified pair.
pub fn reduced_residual<S: Scalar>(
    a: &BivariateSeries<S>,
    b: &BivariateSeries<S>,
    p: usize,
    q: usize,
    q2: usize,
) -> Result<BivariateSeries<S>> {
    let first = a
        .derivative(Var::X2)
        .mul_monomial(0, 1)
        .sub(&a.scale(&S::from_i64(q as i64)))?
        .mul_monomial(1, q2);
    let second = b
        .derivative(Var::X1)
        .mul_monomial(1, 0)
        .sub(b)?
        .mul_monomial(1, q)
        .scale(&S::from_i64(p as i64));
    first.sub(&second)?.add(&a.bracket(b)?)
}
