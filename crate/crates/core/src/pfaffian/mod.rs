//! Pfaffian systems with normal crossings
//! `x2^q x1^{p+1} dy/dx1 = f1(x, y)`, `x1^{p'} x2^{q'+1} dy/dx2 = f2(x, y)`.

pub mod expansion;
pub mod models;
mod reduce;
mod solve;
mod spectral;
mod system;

pub use expansion::YExpansion;
pub use reduce::{rank_reduce, reduced_residual, RankReducedPair};
pub use solve::{cross_check_other_side, equation_residual, formal_solve, Side};
pub use spectral::{classify_spectra, is_nilpotent, spectral_case, EigenPair, SpectralCase, SpectralDiagnosis, SPECTRAL_TOL};
pub use system::{
    integrability_residual, linear_integrability_residual, linear_parts, pullback_system, Exponents, PfaffianSystem,
};
