use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::system::Exponents;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, matpow, to_dmatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpectralCase {
    #[serde(rename = "A_nilpotent_required")]
    ANilpotentRequired,
    #[serde(rename = "B_nilpotent_required")]
    BNilpotentRequired,
    #[serde(rename = "Both_nilpotent_required")]
    BothNilpotentRequired,
    EigenPairing,
}

/// Which conclusion the exponents force on the linear parts at the origin.
pub fn spectral_case(e: Exponents) -> SpectralCase {
    let Exponents { p, q, p2, q2 } = e;
    if (p < p2 && q2 < q) || (p2 < p && q < q2) {
        SpectralCase::BothNilpotentRequired
    } else if p2 < p || q2 < q {
        SpectralCase::ANilpotentRequired
    } else if p < p2 || q < q2 {
        SpectralCase::BNilpotentRequired
    } else {
        SpectralCase::EigenPairing
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub mu: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralDiagnosis {
    pub case: SpectralCase,
    pub eigenvalues_a: Vec<Complex64>,
    pub eigenvalues_b: Vec<Complex64>,
    pub a_nilpotent: bool,
    pub b_nilpotent: bool,
    /// For the pairing case, one entry per eigenvalue of `B(0,0)`.
    pub pairs: Vec<EigenPair>,
    pub unpaired: Vec<Complex64>,
    pub violated: bool,
}

/// Relative threshold for the float nilpotency and pairing tests.
pub const SPECTRAL_TOL: f64 = 1e-9;

fn frobenius<S: Scalar>(a: &[S]) -> f64 {
    a.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

/// Exact `A^l = 0` in exact arithmetic. In floating point: all eigenvalues
/// below `1e-9 |A|`, or `|A^l| <= 1e-9 |A|^l` (eigenvalues of defective
/// matrices are only accurate to a root of the rounding error).
pub fn is_nilpotent<S: Scalar>(a: &[S], dim: usize) -> bool {
    let power = matpow(a, dim, dim);
    if S::EXACT {
        return power.iter().all(|x| x.is_zero());
    }
    let norm = frobenius(a);
    if norm == 0.0 {
        return true;
    }
    let float: Vec<Complex64> = a.iter().map(Scalar::to_c64).collect();
    let spectral = eigenvalues(&float, dim).iter().all(|z| z.norm() < SPECTRAL_TOL * norm);
    spectral || frobenius(&power) <= SPECTRAL_TOL * norm.powi(dim as i32)
}

fn cluster(values: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &v in values {
        match out.iter_mut().find(|(c, _)| (c - v).norm() <= 1e-6 * (1.0 + v.norm())) {
            Some((c, k)) => {
                *c = (*c * *k as f64 + v) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => out.push((v, 1)),
        }
    }
    out
}

/// Right singular vectors for the `k` smallest singular values.
fn kernel_basis(m: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let cols: Vec<_> = order.iter().take(k).map(|&i| vt.row(i).adjoint()).collect();
    DMatrix::from_columns(&cols)
}

/// Eigenvalues of `A` restricted to the generalized eigenspace of `B` at `mu`.
fn restricted_spectrum(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, mu: Complex64, mult: usize) -> Vec<Complex64> {
    let n = a.nrows();
    let shifted = b - DMatrix::<Complex64>::identity(n, n) * mu;
    let mut power = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..n {
        power = &power * &shifted;
    }
    let v = kernel_basis(&power, mult);
    let restricted = v.adjoint() * a * &v;
    let flat: Vec<Complex64> = (0..mult).flat_map(|i| (0..mult).map(move |j| (i, j))).map(|(i, j)| restricted[(i, j)]).collect();
    eigenvalues(&flat, mult)
}

pub fn classify_spectra<S: Scalar>(exponents: Exponents, a00: &[S], b00: &[S], dim: usize) -> Result<SpectralDiagnosis> {
    if a00.len() != dim * dim || b00.len() != dim * dim {
        return Err(Error::Invalid(format!(
            "linear parts must be {dim}x{dim}, got {} and {} entries",
            a00.len(),
            b00.len()
        )));
    }
    let case = spectral_case(exponents);
    let fa: Vec<Complex64> = a00.iter().map(Scalar::to_c64).collect();
    let fb: Vec<Complex64> = b00.iter().map(Scalar::to_c64).collect();
    let eigenvalues_a = eigenvalues(&fa, dim);
    let eigenvalues_b = eigenvalues(&fb, dim);
    let a_nilpotent = is_nilpotent(a00, dim);
    let b_nilpotent = is_nilpotent(b00, dim);
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    let violated = match case {
        SpectralCase::ANilpotentRequired => !a_nilpotent,
        SpectralCase::BNilpotentRequired => !b_nilpotent,
        SpectralCase::BothNilpotentRequired => !(a_nilpotent && b_nilpotent),
        SpectralCase::EigenPairing => {
            let (p, q) = (exponents.p as f64, exponents.q as f64);
            let ma = to_dmatrix(&fa, dim, dim);
            let mb = to_dmatrix(&fb, dim, dim);
            for (mu, mult) in cluster(&eigenvalues_b) {
                let local = restricted_spectrum(&ma, &mb, mu, mult);
                let found = local
                    .iter()
                    .copied()
                    .find(|l| (l * q - mu * p).norm() <= SPECTRAL_TOL * (1.0 + (l * q).norm()));
                match found {
                    Some(lambda) => pairs.extend((0..mult).map(|_| EigenPair { lambda, mu })),
                    None => unpaired.extend((0..mult).map(|_| mu)),
                }
            }
            !unpaired.is_empty()
        }
    };
    Ok(SpectralDiagnosis { case, eigenvalues_a, eigenvalues_b, a_nilpotent, b_nilpotent, pairs, unpaired, violated })
}
