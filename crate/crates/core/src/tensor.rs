//! Generalized cross product in `n` dimensions and its matrix form.
//!
//! The product `a ×ₙ b` maps two `n`-vectors to an `n(n-1)/2`-vector and is
//! defined by induction on `n`: splitting `a = (ā, aₙ)` and `b = (b̄, bₙ)`,
//!
//! ```text
//! a ×ₙ b = ( ā ×ₙ₋₁ b̄ ,  bₙ·ā − aₙ·b̄ )      with   a ×₂ b = a₁b₂ − a₂b₁.
//! ```
//!
//! For `n = 3` this yields `(a₁b₂ − a₂b₁, b₃a₁ − a₃b₁, b₃a₂ − a₃b₂)`, i.e. the
//! classical cross product `(c₁, c₂, c₃)` reordered and signed as
//! `(c₃, −c₂, c₁)`. Every downstream curl/Curl in this crate uses this
//! ordering.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossError {
    #[error("generalized cross product needs dimension >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Number of components of `a ×ₙ b`.
pub const fn cross_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Evaluates `a ×ₙ b` following the inductive definition.
pub fn cross_product(a: &[f64], b: &[f64]) -> Result<Vec<f64>, CrossError> {
    if a.len() != b.len() {
        return Err(CrossError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(CrossError::DimensionTooSmall(n));
    }
    let mut out = Vec::with_capacity(cross_dim(n));
    cross_into(a, b, &mut out);
    Ok(out)
}

fn cross_into(a: &[f64], b: &[f64], out: &mut Vec<f64>) {
    let n = a.len();
    if n == 2 {
        out.push(a[0] * b[1] - a[1] * b[0]);
        return;
    }
    let (a_bar, a_last) = (&a[..n - 1], a[n - 1]);
    let (b_bar, b_last) = (&b[..n - 1], b[n - 1]);
    cross_into(a_bar, b_bar, out);
    out.extend(
        a_bar
            .iter()
            .zip(b_bar)
            .map(|(&ai, &bi)| b_last * ai - a_last * bi),
    );
}

/// The matrix `⟦a⟧ₙ` with `⟦a⟧ₙ b = a ×ₙ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub a: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl CrossMatrix {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let v = &self.matrix * nalgebra::DVector::from_column_slice(b);
        v.iter().copied().collect()
    }
}

/// Builds `⟦a⟧ₙ` column by column from `a ×ₙ eⱼ`.
pub fn cross_matrix(a: &[f64]) -> Result<CrossMatrix, CrossError> {
    let n = a.len();
    if n < 2 {
        return Err(CrossError::DimensionTooSmall(n));
    }
    let rows = cross_dim(n);
    let mut matrix = DMatrix::zeros(rows, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = cross_product(a, &e)?;
        for (i, c) in col.into_iter().enumerate() {
            matrix[(i, j)] = c;
        }
        e[j] = 0.0;
    }
    Ok(CrossMatrix {
        a: a.to_vec(),
        matrix,
    })
}

/// `| ‖v×ₙξ‖² − (‖v‖²‖ξ‖² − ⟨v,ξ⟩²) |`.
pub fn area_property_check(v: &[f64], xi: &[f64]) -> Result<f64, CrossError> {
    let c = cross_product(v, xi)?;
    let cross_sq: f64 = c.iter().map(|x| x * x).sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let xx: f64 = xi.iter().map(|x| x * x).sum();
    let vx: f64 = v.iter().zip(xi).map(|(a, b)| a * b).sum();
    Ok((cross_sq - (vv * xx - vx * vx)).abs())
}

/// Classical 3D cross product, only used to document the reordering above.
pub fn classical_cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
