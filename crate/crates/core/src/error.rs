use thiserror::Error;

use crate::series::Shape;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: Shape, found: Shape },

    #[error("incompatible shapes for product: {left} * {right}")]
    IncompatibleShapes { left: Shape, right: Shape },

    #[error("expected a square matrix, found {0}")]
    NotSquare(Shape),

    #[error("bidegree ({n},{m}) exceeds truncation order {trunc}")]
    BeyondTruncation { n: usize, m: usize, trunc: usize },

    #[error("layer {layer} has term ({m},{j}) outside the support m<p or j<q")]
    LayerSupport { layer: usize, m: usize, j: usize },

    #[error("series is not divisible by x1^{a} x2^{b}")]
    NotDivisible { a: usize, b: usize },

    #[error("empty window: no total degrees in [{floor}, {trunc}]")]
    EmptyWindow { floor: usize, trunc: usize },

    #[error("degenerate fit window: {distinct} distinct total degrees with nonzero terms (need 3)")]
    DegenerateWindow { distinct: usize },

    #[error("truncation order {trunc} too small: need at least {needed}")]
    TruncationTooSmall { trunc: usize, needed: usize },

    #[error("singular linear part at the origin: {0}")]
    SingularLinearPart(String),

    #[error("constant term of the solution could not be determined: {0}")]
    ConstantTerm(String),

    #[error("pole of the Borel continuation at {re}{im:+}i lies on the integration ray (direction {direction})")]
    PoleOnRay { re: f64, im: f64, direction: f64 },

    #[error("Laplace kernel does not decay along direction {direction} for t = {t_re}{t_im:+}i")]
    DecayViolated { direction: f64, t_re: f64, t_im: f64 },

    #[error("exponent precondition failed: {0}")]
    Exponents(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Domain errors are well-formed requests the mathematics rejects;
    /// everything else is malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::SingularLinearPart(_)
                | Error::ConstantTerm(_)
                | Error::PoleOnRay { .. }
                | Error::DecayViolated { .. }
                | Error::NotDivisible { .. }
                | Error::Exponents(_)
                | Error::TruncationTooSmall { .. }
                | Error::DegenerateWindow { .. }
                | Error::EmptyWindow { .. }
        )
    }
}
