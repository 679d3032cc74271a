//! Small model systems.

use super::expansion::{unit_index, YExpansion};
use super::system::{Exponents, PfaffianSystem};
use crate::error::Result;
use crate::linalg::matvec;
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, Shape};

/// `f = M (y - c)` for a constant matrix `M`.
pub fn affine_expansion<S: Scalar>(m: &[S], c: &[S], dim: usize, trunc: usize) -> Result<YExpansion<S>> {
    let mut f = YExpansion::zero(dim, Shape::vector(dim), trunc);
    let mc: Vec<S> = matvec(m, c, dim).into_iter().map(|v| -v).collect();
    f.add_term(vec![0; dim], BivariateSeries::constant(mc, Shape::vector(dim), trunc)?)?;
    for j in 0..dim {
        let column: Vec<S> = (0..dim).map(|i| m[i * dim + j].clone()).collect();
        f.add_term(unit_index(dim, j), BivariateSeries::constant(column, Shape::vector(dim), trunc)?)?;
    }
    Ok(f)
}

/// `f1 = M1 (y - c)`, `f2 = M2 (y - c)`.
pub fn affine_system<S: Scalar>(
    exponents: Exponents,
    m1: &[S],
    m2: &[S],
    c: &[S],
    trunc: usize,
) -> Result<PfaffianSystem<S>> {
    let dim = c.len();
    let f1 = affine_expansion(m1, c, dim, trunc)?;
    let f2 = affine_expansion(m2, c, dim, trunc)?;
    PfaffianSystem::new(exponents, dim, 1, f1, f2)
}

/// `f1 = f2 = y - c`; completely integrable only when all exponents agree.
pub fn closing_example<S: Scalar>(exponents: Exponents, c: &[S], trunc: usize) -> Result<PfaffianSystem<S>> {
    let id = crate::linalg::identity::<S>(c.len());
    affine_system(exponents, &id, &id, c, trunc)
}
