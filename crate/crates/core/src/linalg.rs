//! Small dense linear algebra on row-major coefficient blocks.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold in float mode.
pub const PIVOT_TOL: f64 = 1e-12;

/// LU factorization with partial pivoting (`PA = LU`, stored packed).
#[derive(Clone, Debug)]
pub struct Lu<S> {
    dim: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factor(matrix: &[S], dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::Invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                matrix.len()
            )));
        }
        let scale = matrix.iter().map(Scalar::modulus).fold(0.0, f64::max);
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..dim).collect();
        for col in 0..dim {
            let (pivot_row, pivot_mod) = (col..dim)
                .map(|r| (r, lu[r * dim + col].modulus()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let pivot = &lu[pivot_row * dim + col];
            let singular = if S::EXACT {
                pivot.is_zero()
            } else {
                pivot_mod <= PIVOT_TOL * scale || scale == 0.0
            };
            if singular {
                return Err(Error::SingularLinearPart(format!(
                    "matrix is singular (column {col})"
                )));
            }
            if pivot_row != col {
                for j in 0..dim {
                    lu.swap(col * dim + j, pivot_row * dim + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[col * dim + col].clone();
            for r in col + 1..dim {
                let factor = lu[r * dim + col].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col + 1..dim {
                    let v = lu[r * dim + j].clone() - factor.clone() * lu[col * dim + j].clone();
                    lu[r * dim + j] = v;
                }
                lu[r * dim + col] = factor;
            }
        }
        Ok(Lu { dim, lu, perm })
    }

    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut x: Vec<S> = self.perm.iter().map(|&i| rhs[i].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[i].clone() - self.lu[i * n + j].clone() * x[j].clone();
                x[i] = v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = x[i].clone() - self.lu[i * n + j].clone() * x[j].clone();
                x[i] = v;
            }
            x[i] = x[i].clone() / self.lu[i * n + i].clone();
        }
        x
    }
}

pub fn identity<S: Scalar>(dim: usize) -> Vec<S> {
    let mut out = vec![S::zero(); dim * dim];
    for i in 0..dim {
        out[i * dim + i] = S::one();
    }
    out
}

pub fn matmul<S: Scalar>(a: &[S], b: &[S], dim: usize) -> Vec<S> {
    let mut out = vec![S::zero(); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = &a[i * dim + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..dim {
                let v = out[i * dim + j].clone() + aik.clone() * b[k * dim + j].clone();
                out[i * dim + j] = v;
            }
        }
    }
    out
}

pub fn matvec<S: Scalar>(a: &[S], x: &[S], dim: usize) -> Vec<S> {
    (0..dim)
        .map(|i| {
            (0..dim).fold(S::zero(), |acc, j| acc + a[i * dim + j].clone() * x[j].clone())
        })
        .collect()
}

pub fn matpow<S: Scalar>(a: &[S], dim: usize, power: usize) -> Vec<S> {
    let mut out = identity(dim);
    for _ in 0..power {
        out = matmul(&out, a, dim);
    }
    out
}

/// Largest entry modulus.
pub fn max_modulus<S: Scalar>(a: &[S]) -> f64 {
    a.iter().map(Scalar::modulus).fold(0.0, f64::max)
}

pub fn to_dmatrix(a: &[Complex64], rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(rows, cols, a)
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(a: &[Complex64], dim: usize) -> Vec<Complex64> {
    if dim == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(to_dmatrix(a, dim, dim)).unpack();
    (0..dim).map(|i| t[(i, i)]).collect()
}

/// Orthonormal basis (as columns) of the numerical null space of `a`.
pub fn null_space(a: &DMatrix<Complex64>, rel_tol: f64) -> DMatrix<Complex64> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * smax.max(1.0);
    let mut cols = Vec::new();
    for i in 0..n {
        let s = svd.singular_values.get(i).cloned().unwrap_or(0.0);
        if s <= cutoff {
            cols.push(v_t.row(i).adjoint());
        }
    }
    // Rows of v_t beyond the singular value count belong to the kernel too.
    for i in svd.singular_values.len()..v_t.nrows() {
        cols.push(v_t.row(i).adjoint());
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
