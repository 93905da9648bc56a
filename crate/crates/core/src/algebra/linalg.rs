//! Small dense helpers shared by the classification routines.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Relative singular-value cutoff used for ranks and subspace intersections.
pub const RANK_RTOL: f64 = 1e-9;

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with cutoff `rtol * σ_max`.
pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rtol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_basis(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rtol * smax).collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Intersection of two subspaces given by orthonormal column bases.
///
/// Returns an orthonormal basis of `span(a) ∩ span(b)`. Shared directions are
/// the null vectors `(x, y)` of `[a | -b]`; the cutoff is `rtol` times the
/// largest singular value of that stacked matrix.
pub fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let rows = a.nrows();
    let (ka, kb) = (a.ncols(), b.ncols());
    if ka == 0 || kb == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let mut stacked = DMatrix::zeros(rows, ka + kb);
    stacked.view_mut((0, 0), (rows, ka)).copy_from(a);
    stacked.view_mut((0, ka), (rows, kb)).copy_from(&(-b));
    let null = null_space(&stacked, rtol);
    if null.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let coeffs = null.rows(0, ka).into_owned();
    column_basis(&(a * coeffs), rtol)
}

/// Orthonormal basis of the right null space of `m`.
pub fn null_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to a square-or-tall matrix so the SVD returns a full V.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let null_idx: Vec<usize> = (0..s.len())
        .filter(|&i| smax == 0.0 || s[i] <= rtol * smax)
        .collect();
    DMatrix::from_fn(cols, null_idx.len(), |r, c| v_t[(null_idx[c], r)])
}

/// Moore-Penrose pseudo-inverse with relative cutoff.
pub fn pinv(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rtol * smax).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps).unwrap_or_else(|_| DMatrix::zeros(c, r))
}

/// Smallest singular value and the associated right singular vector.
///
/// When the matrix is wide (`rows < cols`) the kernel is nontrivial and the
/// returned value is exactly zero.
pub fn min_singular<T>(m: &DMatrix<T>) -> (f64, DVector<T>)
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::<T>::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    // Rows of V^H are conjugated right singular vectors.
    let v = DVector::from_fn(cols, |r, _| v_t[(idx, r)].clone().conjugate());
    (smin, v)
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}
