use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{pinv, spectral_norm, RANK_RTOL};
use super::operator::DiffOperator;

/// Least-squares solution of `L·[𝔸₁|…|𝔸ₙ] = [𝔼₁|…|𝔼ₙ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `L: ℝ^N → ℝ^{m·n}`, present iff the residual is within tolerance.
    pub map: Option<DMatrix<f64>>,
    /// Spectral norm of `L·[𝔸ᵢ] − [𝔼ᵢ]`, relative to `‖[𝔼ᵢ]‖ = 1`.
    pub residual: f64,
    pub tolerance: f64,
}

impl Factorization {
    pub fn exists(&self) -> bool {
        self.map.is_some()
    }
}

fn hstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Looks for `L` with `𝔼ᵢ = L∘𝔸ᵢ` for every `i`.
///
/// The stacked gradient coefficients form a permutation matrix, so the
/// residual is `0` when `𝒜` is injective and `1` otherwise (up to rounding).
pub fn factor_through(op: &DiffOperator, tol: f64) -> Factorization {
    let a = hstack(&op.coeffs);
    let e = hstack(&op.gradient_coeffs);
    let l = &e * pinv(&a, RANK_RTOL);
    let residual = spectral_norm(&(&l * &a - &e)) / spectral_norm(&e);
    Factorization {
        map: (residual <= tol).then_some(l),
        residual,
        tolerance: tol,
    }
}
