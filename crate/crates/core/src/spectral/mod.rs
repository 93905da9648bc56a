//! Periodic-grid fields with spectral calculus.
//!
//! The whole space is approximated by a torus; fields of interest are kept
//! well inside the central region so that wrap-around is negligible.

pub mod calculus;
mod fft;
mod field;
pub mod generators;
mod grid;
pub mod io;
mod norms;
mod random;

pub use calculus::{
    curl_matrix_field, curl_vec, derivative, divergence, gradient, helmholtz, helmholtz_residuals,
    helmholtz_rows, laplacian, laplacian_decomposition_check, riesz_potential, HelmholtzParts,
    HelmholtzResiduals,
};
pub use fft::{forward, inverse_real};
pub use field::{PeriodicField, Shape};
pub use generators::{
    gen_blowup3d, gen_example12_field, gen_mollified_log, gen_nullvector_field, Blowup3d,
    NullvectorField,
};
pub use grid::{Grid, DEFAULT_MAX_POINTS};
pub use norms::{averaged_lp_norm_on_ball, ball_mask, lp_norm, sup_outside_ball};
pub use random::{bump, random_field, random_field_seeded, RandomFieldSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains non-finite samples")]
    NonFinite,
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("field has non-zero mean {0:e}")]
    NonZeroMean(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate witness: {0}")]
    DegenerateWitness(String),
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
