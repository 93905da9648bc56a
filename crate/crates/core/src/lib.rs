//! Korn–Maxwell–Sobolev inequalities: part-map algebra, generalized cross
//! products and matrix curls, spectral fields on periodic grids, and a
//! harness that tests the inequalities numerically.

pub mod algebra;
pub mod harness;
pub mod spectral;
pub mod tensor;

pub use algebra::{
    almost_complementary, factor_through, induce_operator, is_c_elliptic, is_cancelling, is_elliptic,
    parse_operator, AcpDecomposition, AlgebraError, DiffOperator, PartMap,
};
pub use harness::{
    blowup_probe, estimate_constant, kms_quotient, predict, subcritical_quotient, verify, HarnessError,
    KmsConfig, KmsReport, Mode, Verdict, VerifySettings,
};
pub use spectral::{Grid, PeriodicField, Shape, SpectralError};
pub use tensor::{cross_matrix, cross_product};
