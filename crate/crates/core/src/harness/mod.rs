//! Quotients of the incompatible Korn–Maxwell–Sobolev inequalities, their
//! predicted validity, and numerical evidence for or against it.

mod config;
mod estimate;
pub mod families;
mod predict;
mod probe;
mod quotient;
mod verify;

pub use config::{sobolev_conjugate, KmsConfig, Mode};
pub use estimate::{estimate_constant, ConstantEstimate};
pub use families::{Family, FamilyGeometry, FamilyInputs};
pub use predict::{classify, predict, AlgebraSummary, Classification, Criterion, Prediction, Verdict};
pub use probe::{blowup_probe, fit_slope, BlowupSeries, ProbeSettings, ProbeVerdict, DEFAULT_FAIL_RATIO};
pub use quotient::{acp_pipeline_residual, kms_quotient, quotient, subcritical_quotient, Quotient, SUPPORT_RTOL};
pub use verify::{
    default_grid_size, family_geometry, probe_eps0, standard_constellations, trial_grid_size, verify, KmsReport,
    QuotientEntry, VerifySettings, NUMERICAL_KERNEL_QUOTIENT,
};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unsupported constellation: {0}")]
    Unsupported(String),
    #[error("denominator vanishes (numerator {numerator:e}); the field lies in the joint kernel")]
    ZeroDenominator { numerator: f64 },
    #[error("field does not vanish outside B_{radius}: sup outside {outside:e}, global sup {sup:e}")]
    SupportViolation { outside: f64, sup: f64, radius: f64 },
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("family: {0}")]
    Family(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
