//! Part maps, induced first-order operators and their classification.

mod acp;
mod catalogue;
mod ellipticity;
mod factor;
pub mod linalg;
mod operator;
mod part_map;

pub use acp::{almost_complementary, AcpDecomposition, DependentIndex};
pub use catalogue::{catalogue, catalogue_names, parse_operator, OperatorSpec};
pub use ellipticity::{
    is_c_elliptic, is_cancelling, is_elliptic, CEllipticity, CEllipticityCertificate,
    ComplexWitness, Ellipticity, EllipticityCertificate, RealWitness,
};
pub use factor::{factor_through, Factorization};
pub use operator::{induce_operator, pure_tensor, pure_tensor_span_dim, symbol, symbol_complex, DiffOperator, SymbolMap};
pub use part_map::PartMap;

use thiserror::Error;

/// Default relative tolerance for the ellipticity decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("malformed part map: {0}")]
    Malformed(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not C-elliptic (span dimension {span_dim}); no almost complementary part exists")]
    NotCElliptic { span_dim: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("construction failed: {0}")]
    Construction(String),
}
