//! Monomial summability toolkit for bivariate formal power series.

pub mod asymptotics;
pub mod borel;
pub mod error;
pub mod linalg;
pub mod pfaffian;
pub mod scalar;
pub mod series;
pub mod tauberian;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::{ExactComplex, Scalar};
pub use series::{BivariateSeries, BlowupAxis, BlowupMap, MonomialIndex, Shape, Var};
