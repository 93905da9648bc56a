use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{rank, RANK_RTOL};
use super::{AlgebraError, PartMap};

/// The first-order operator `𝔸u = 𝒜[Du] = Σ 𝔸ᵢ ∂ᵢu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    /// `𝔸ᵢ`, each `N×m`.
    pub coeffs: Vec<DMatrix<f64>>,
    /// `𝔼ᵢ`, each `(m·n)×m`, with `Du = Σ 𝔼ᵢ ∂ᵢu`.
    pub gradient_coeffs: Vec<DMatrix<f64>>,
    pub source: PartMap,
}

impl DiffOperator {
    /// Spatial dimension.
    pub fn n(&self) -> usize {
        self.source.n()
    }

    /// Number of unknowns `m` (length of `v` in `𝔸[ξ]v`).
    pub fn m(&self) -> usize {
        self.source.m()
    }

    pub fn out_dim(&self) -> usize {
        self.source.out_dim()
    }

    /// Spectral norm of the part map; the natural scale for tolerances.
    pub fn scale(&self) -> f64 {
        super::linalg::spectral_norm(self.source.matrix())
    }
}

/// `𝔸[ξ] = Σ ξᵢ𝔸ᵢ` over the scalar field of `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMap<T: nalgebra::Scalar> {
    pub xi: Vec<T>,
    pub matrix: DMatrix<T>,
}

/// Column `k` of `𝔸ᵢ` is `𝒜[e_k ⊗ eᵢ]`, i.e. column `k·n + i` of the part map.
pub fn induce_operator(a: &PartMap) -> DiffOperator {
    let (m, n) = (a.m(), a.n());
    let mat = a.matrix();
    let coeffs = (0..n)
        .map(|i| DMatrix::from_fn(a.out_dim(), m, |r, k| mat[(r, k * n + i)]))
        .collect();
    let gradient_coeffs = (0..n)
        .map(|i| DMatrix::from_fn(m * n, m, |r, k| if r == k * n + i { 1.0 } else { 0.0 }))
        .collect();
    DiffOperator {
        coeffs,
        gradient_coeffs,
        source: a.clone(),
    }
}

fn check_len(op: &DiffOperator, len: usize) -> Result<(), AlgebraError> {
    if len != op.n() {
        return Err(AlgebraError::DimensionMismatch {
            expected: op.n(),
            got: len,
        });
    }
    Ok(())
}

pub fn symbol(op: &DiffOperator, xi: &[f64]) -> Result<SymbolMap<f64>, AlgebraError> {
    check_len(op, xi.len())?;
    let mut matrix = DMatrix::zeros(op.out_dim(), op.m());
    for (x, a) in xi.iter().zip(&op.coeffs) {
        matrix += a * *x;
    }
    Ok(SymbolMap {
        xi: xi.to_vec(),
        matrix,
    })
}

pub fn symbol_complex(
    op: &DiffOperator,
    xi: &[Complex64],
) -> Result<SymbolMap<Complex64>, AlgebraError> {
    check_len(op, xi.len())?;
    let mut matrix = DMatrix::<Complex64>::zeros(op.out_dim(), op.m());
    for (x, a) in xi.iter().zip(&op.coeffs) {
        matrix += a.map(|c| Complex64::new(c, 0.0)) * *x;
    }
    Ok(SymbolMap {
        xi: xi.to_vec(),
        matrix,
    })
}

/// The pure tensor `v ⊗_𝔸 ξ = 𝔸[ξ]v`.
pub fn pure_tensor(op: &DiffOperator, v: &[f64], xi: &[f64]) -> Result<DVector<f64>, AlgebraError> {
    if v.len() != op.m() {
        return Err(AlgebraError::DimensionMismatch {
            expected: op.m(),
            got: v.len(),
        });
    }
    let s = symbol(op, xi)?;
    Ok(&s.matrix * DVector::from_column_slice(v))
}

/// `dim span{eᵢ ⊗_𝔸 eⱼ}`, which is the rank of the part map itself.
pub fn pure_tensor_span_dim(op: &DiffOperator) -> usize {
    rank(op.source.matrix(), RANK_RTOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;

    #[test]
    fn sym_first_coefficient() {
        let op = induce_operator(&parse_operator("sym", 2).unwrap());
        let expect = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0]);
        assert_eq!(op.coeffs[0], expect);
    }

    #[test]
    fn dev_sym_first_coefficient() {
        let op = induce_operator(&parse_operator("dev_sym", 2).unwrap());
        let expect =
            DMatrix::from_row_slice(4, 2, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.5, -0.5, 0.0]);
        assert!((&op.coeffs[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn identity_coeffs_are_gradient_coeffs() {
        let op = induce_operator(&parse_operator("identity", 3).unwrap());
        assert_eq!(op.coeffs, op.gradient_coeffs);
    }

    #[test]
    fn symbol_of_zero_vector() {
        let op = induce_operator(&parse_operator("sym", 2).unwrap());
        let s = symbol(&op, &[0.0, 0.0]).unwrap();
        assert!(s.matrix.iter().all(|&x| x == 0.0));
        assert!(matches!(
            symbol(&op, &[1.0]),
            Err(AlgebraError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn dev_sym_complex_nullvector() {
        let op = induce_operator(&parse_operator("dev_sym", 2).unwrap());
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let s = symbol_complex(&op, &[one, i]).unwrap();
        let v = DVector::from_vec(vec![one, -i]);
        assert!((&s.matrix * v).norm() < 1e-15);
    }

    #[test]
    fn pure_tensors() {
        let sym = induce_operator(&parse_operator("sym", 2).unwrap());
        let t = pure_tensor(&sym, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 0.5, 0.5, 0.0]);
        let grad = induce_operator(&parse_operator("grad", 2).unwrap());
        let t = pure_tensor(&grad, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        assert!(pure_tensor(&grad, &[0.0, 0.0], &[1.0, 2.0]).unwrap().norm() == 0.0);
    }

    #[test]
    fn span_dims() {
        let dim = |name: &str| pure_tensor_span_dim(&induce_operator(&parse_operator(name, 2).unwrap()));
        assert_eq!(dim("grad"), 4);
        assert_eq!(dim("sym"), 3);
        assert_eq!(dim("dev_grad"), 3);
        assert_eq!(dim("dev_sym"), 2);
        assert_eq!(dim("skew_plus_trace(1,1)"), 2);
        assert_eq!(dim("zero"), 0);
    }
}
