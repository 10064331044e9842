use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("shape mismatch: {0}x{1} against {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("expected a form of degree {expected}, found {found:?}")]
    Degree { expected: usize, found: Option<usize> },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("Kähler form is not exact on invariant forms (residual {residual:.3e})")]
    NotExact { residual: f64 },
    #[error("connection fails the unitary block shape (residual {residual:.3e})")]
    NotKahler { residual: f64 },
    #[error("structural equation fails (residual {residual:.3e})")]
    StructuralEquation { residual: f64 },
    #[error("kappa is not a primitive of the Kähler form (residual {residual:.3e})")]
    BadPrimitive { residual: f64 },
    #[error("d^2 does not vanish (residual {residual:.3e})")]
    DSquaredNonzero { residual: f64 },
    #[error("cone connection check failed in {block} (residual {residual:.3e})")]
    ConeAssertion { block: &'static str, residual: f64 },
    #[error("form is not invariant under the lifted symmetry (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("candidate is not special Kähler (max residual {residual:.3e})")]
    NotPsk { residual: f64 },
    #[error("twisted differential keeps t/tau dependence (residual {residual:.3e})")]
    NonConstant { residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
