use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::AlgebraError;

/// A linear map `𝒜: ℝ^{m×n} → ℝ^N` acting on row-major flattened matrices.
///
/// Column `i*n + j` of [`PartMap::matrix`] is `𝒜[eᵢ⊗eⱼ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartMap {
    m: usize,
    n: usize,
    matrix: DMatrix<f64>,
    name: Option<String>,
}

impl PartMap {
    pub fn new(
        m: usize,
        n: usize,
        matrix: DMatrix<f64>,
        name: Option<String>,
    ) -> Result<Self, AlgebraError> {
        if m == 0 || n == 0 || matrix.nrows() == 0 {
            return Err(AlgebraError::Malformed(
                "part map dimensions must be positive".into(),
            ));
        }
        if matrix.ncols() != m * n {
            return Err(AlgebraError::Malformed(format!(
                "matrix has {} columns, expected m*n = {}",
                matrix.ncols(),
                m * n
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(AlgebraError::Malformed("non-finite entry".into()));
        }
        Ok(Self { m, n, matrix, name })
    }

    /// Builds a part map `ℝ^{m×n} → ℝ^{m×n}` from a closure on matrices.
    pub fn from_fn<F>(m: usize, n: usize, name: &str, f: F) -> Self
    where
        F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
    {
        let cols = m * n;
        let mut matrix = DMatrix::zeros(cols, cols);
        for c in 0..cols {
            let mut x = DMatrix::zeros(m, n);
            x[(c / n, c % n)] = 1.0;
            let y = f(&x);
            debug_assert_eq!(y.shape(), (m, n));
            for r in 0..cols {
                matrix[(r, c)] = y[(r / n, r % n)];
            }
        }
        Self {
            m,
            n,
            matrix,
            name: Some(name.to_string()),
        }
    }

    /// Rows of the input matrices.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Columns of the input matrices (the spatial dimension).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Output dimension `N`.
    pub fn out_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "custom".to_string())
    }

    /// Applies `𝒜` to a row-major flattened `m×n` matrix.
    pub fn apply_flat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m * self.n, "input length");
        let mut out = vec![0.0; self.out_dim()];
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.matrix.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        assert_eq!(x.shape(), (self.m, self.n), "input shape");
        let flat: Vec<f64> = (0..self.m * self.n)
            .map(|k| x[(k / self.n, k % self.n)])
            .collect();
        DVector::from_vec(self.apply_flat(&flat))
    }

    /// Reshapes an output back to `m×n` when `N = m·n`.
    pub fn apply_square(&self, x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        if self.out_dim() != self.m * self.n {
            return None;
        }
        let y = self.apply(x);
        Some(DMatrix::from_fn(self.m, self.n, |i, j| y[i * self.n + j]))
    }
}

/// On-disk / wire form: `{m, n, N, matrix: [[row], ...], name}`.
#[derive(Serialize, Deserialize)]
struct PartMapDoc {
    m: usize,
    n: usize,
    #[serde(rename = "N")]
    out_dim: usize,
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    name: Option<String>,
}

impl Serialize for PartMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PartMapDoc {
            m: self.m,
            n: self.n,
            out_dim: self.out_dim(),
            matrix: self
                .matrix
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            name: self.name.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = PartMapDoc::deserialize(d)?;
        if doc.matrix.len() != doc.out_dim {
            return Err(D::Error::custom(format!(
                "matrix has {} rows but N = {}",
                doc.matrix.len(),
                doc.out_dim
            )));
        }
        let cols = doc.m * doc.n;
        if doc.matrix.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom(format!("every row must have m*n = {cols} entries")));
        }
        let flat: Vec<f64> = doc.matrix.into_iter().flatten().collect();
        let matrix = DMatrix::from_row_slice(doc.out_dim, cols, &flat);
        PartMap::new(doc.m, doc.n, matrix, doc.name).map_err(D::Error::custom)
    }
}
