//! Spectral differential operators: derivatives, div, curl, matrix Curl,
//! Helmholtz projection, Laplacian decomposition and Riesz potentials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{apply_multiplier, for_each_mode, forward, inverse_real};
use super::{Grid, PeriodicField, Shape, SpectralError};
use crate::tensor::{cross_dim, cross_product};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sparse coefficients of `(a ×ₙ b)_r = Σ c·a_i·b_j`, as `(r, i, j, c)`.
pub fn cross_terms(n: usize) -> Vec<(usize, usize, usize, f64)> {
    let mut terms = Vec::new();
    let mut ei = vec![0.0; n];
    let mut ej = vec![0.0; n];
    for i in 0..n {
        ei[i] = 1.0;
        for j in 0..n {
            ej[j] = 1.0;
            let c = cross_product(&ei, &ej).expect("n >= 2");
            for (r, &v) in c.iter().enumerate() {
                if v != 0.0 {
                    terms.push((r, i, j, v));
                }
            }
            ej[j] = 0.0;
        }
        ei[i] = 0.0;
    }
    terms
}

fn spectra(f: &PeriodicField) -> Vec<Vec<Complex64>> {
    (0..f.components()).map(|c| forward(f.grid(), f.component(c))).collect()
}

/// `IFFT(Σ c·(i k_axis)·ŝ_input)` for a list of `(input, axis, c)` terms.
fn derivative_combination(grid: &Grid, inputs: &[Vec<Complex64>], terms: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.points()];
    for &(input, axis, c) in terms {
        let src = &inputs[input];
        for_each_mode(grid, |idx, multi| {
            acc[idx] += I * (c * grid.wavenumber(multi[axis])) * src[idx];
        });
    }
    inverse_real(grid, &acc)
}

fn check_axis(f: &PeriodicField, axis: usize) -> Result<(), SpectralError> {
    if axis >= f.grid().n {
        return Err(SpectralError::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            f.grid().n
        )));
    }
    Ok(())
}

fn expect_vector(f: &PeriodicField, len: usize) -> Result<(), SpectralError> {
    if f.shape() != Shape::Vector(len) {
        return Err(SpectralError::ShapeMismatch {
            expected: Shape::Vector(len).to_string(),
            got: f.shape().to_string(),
        });
    }
    Ok(())
}

/// `∂_axis f`, componentwise, via the multiplier `i·k_axis`.
pub fn derivative(f: &PeriodicField, axis: usize) -> Result<PeriodicField, SpectralError> {
    check_axis(f, axis)?;
    let grid = *f.grid();
    let comps = (0..f.components())
        .map(|c| {
            let mut s = forward(&grid, f.component(c));
            apply_multiplier(&grid, &mut s, |k, _| I * k[axis]);
            inverse_real(&grid, &s)
        })
        .collect();
    PeriodicField::from_components(grid, f.shape(), comps)
}

/// Gradient: scalar → `n`-vector, `m`-vector → `m×n` matrix (`Du`).
pub fn gradient(f: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *f.grid();
    let n = grid.n;
    let m = match f.shape() {
        Shape::Scalar => 1,
        Shape::Vector(m) => m,
        s => {
            return Err(SpectralError::ShapeMismatch {
                expected: "scalar or vector".into(),
                got: s.to_string(),
            })
        }
    };
    let spec = spectra(f);
    let mut comps = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            comps.push(derivative_combination(&grid, &spec, &[(i, j, 1.0)]));
        }
    }
    let shape = if m == 1 && f.shape() == Shape::Scalar {
        Shape::Vector(n)
    } else {
        Shape::Matrix(m, n)
    };
    PeriodicField::from_components(grid, shape, comps)
}

pub fn divergence(a: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *a.grid();
    expect_vector(a, grid.n)?;
    let terms: Vec<_> = (0..grid.n).map(|j| (j, j, 1.0)).collect();
    let d = derivative_combination(&grid, &spectra(a), &terms);
    PeriodicField::scalar(grid, d)
}

/// Componentwise Laplacian with multiplier `−Σ k_j²`.
pub fn laplacian(f: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *f.grid();
    let comps = (0..f.components())
        .map(|c| {
            let mut s = forward(&grid, f.component(c));
            apply_multiplier(&grid, &mut s, |k, _| {
                Complex64::new(-k.iter().map(|x| x * x).sum::<f64>(), 0.0)
            });
            inverse_real(&grid, &s)
        })
        .collect();
    PeriodicField::from_components(grid, f.shape(), comps)
}

/// `curl a = ∇ ×ₙ a = ⟦∇⟧ₙ a`; in two dimensions `∂₁a₂ − ∂₂a₁`.
pub fn curl_vec(a: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *a.grid();
    let n = grid.n;
    if n < 2 {
        return Err(SpectralError::InvalidParameter("curl needs n >= 2".into()));
    }
    expect_vector(a, n)?;
    let spec = spectra(a);
    let terms = cross_terms(n);
    let comps = (0..cross_dim(n))
        .map(|r| {
            let t: Vec<_> = terms
                .iter()
                .filter(|t| t.0 == r)
                .map(|&(_, i, j, c)| (j, i, c))
                .collect();
            derivative_combination(&grid, &spec, &t)
        })
        .collect();
    PeriodicField::from_components(grid, Shape::Vector(cross_dim(n)), comps)
}

/// Row-wise curl of an `m×n` matrix field, `Curl P = P⟦∇⟧ₙᵀ`.
pub fn curl_matrix_field(p: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *p.grid();
    let n = grid.n;
    let m = match p.shape() {
        Shape::Matrix(m, c) if c == n && n >= 2 => m,
        s => {
            return Err(SpectralError::ShapeMismatch {
                expected: format!("matrix m x {n}"),
                got: s.to_string(),
            })
        }
    };
    let spec = spectra(p);
    let terms = cross_terms(n);
    let k = cross_dim(n);
    let mut comps = Vec::with_capacity(m * k);
    for row in 0..m {
        for r in 0..k {
            let t: Vec<_> = terms
                .iter()
                .filter(|t| t.0 == r)
                .map(|&(_, i, j, c)| (row * n + j, i, c))
                .collect();
            comps.push(derivative_combination(&grid, &spec, &t));
        }
    }
    PeriodicField::from_components(grid, Shape::Matrix(m, k), comps)
}

/// `⟦∇⟧ₙᵀ c` for a field with `n(n−1)/2` components.
pub fn cross_transpose(c: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    let grid = *c.grid();
    let n = grid.n;
    expect_vector(c, cross_dim(n))?;
    let spec = spectra(c);
    let terms = cross_terms(n);
    let comps = (0..n)
        .map(|j| {
            let t: Vec<_> = terms
                .iter()
                .filter(|t| t.2 == j)
                .map(|&(r, i, _, coef)| (r, i, coef))
                .collect();
            derivative_combination(&grid, &spec, &t)
        })
        .collect();
    PeriodicField::from_components(grid, Shape::Vector(n), comps)
}

/// Curl-free and divergence-free parts plus the constant mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzParts {
    pub curl_free: PeriodicField,
    pub div_free: PeriodicField,
    pub mean: Vec<f64>,
}

impl HelmholtzParts {
    pub fn reconstruct(&self) -> PeriodicField {
        let p = self.curl_free.grid().points();
        let mut data = self.curl_free.data().to_vec();
        for (i, (d, v)) in data.iter_mut().zip(self.div_free.data()).enumerate() {
            *d += v + self.mean[i / p];
        }
        PeriodicField::new(*self.curl_free.grid(), self.curl_free.shape(), data)
            .expect("sum of finite fields")
    }
}

/// Fourier projection `â_curl = k(k·â)/|k|²`, `â_div = â − â_curl` for `k ≠ 0`.
///
/// Modes whose derivative wavenumber vanishes without being the zero mode
/// (pure Nyquist modes) are annihilated by every derivative; they are
/// assigned to the divergence-free part.
pub fn helmholtz(a: &PeriodicField) -> Result<HelmholtzParts, SpectralError> {
    let grid = *a.grid();
    let n = grid.n;
    expect_vector(a, n)?;
    let spec = spectra(a);
    let pts = grid.points();
    let mean: Vec<f64> = spec.iter().map(|s| s[0].re / pts as f64).collect();
    let mut curl_hat = vec![vec![Complex64::new(0.0, 0.0); pts]; n];
    let mut div_hat = spec.clone();
    let mut k = vec![0.0; n];
    for_each_mode(&grid, |idx, multi| {
        for (ka, &j) in k.iter_mut().zip(multi) {
            *ka = grid.wavenumber(j);
        }
        if idx == 0 {
            for d in div_hat.iter_mut() {
                d[0] = Complex64::new(0.0, 0.0);
            }
            return;
        }
        let k2: f64 = k.iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            return;
        }
        let dot: Complex64 = (0..n).map(|j| spec[j][idx] * k[j]).sum();
        for j in 0..n {
            let c = dot * (k[j] / k2);
            curl_hat[j][idx] = c;
            div_hat[j][idx] -= c;
        }
    });
    let curl_free = PeriodicField::from_components(
        grid,
        a.shape(),
        curl_hat.iter().map(|s| inverse_real(&grid, s)).collect(),
    )?;
    let div_free = PeriodicField::from_components(
        grid,
        a.shape(),
        div_hat.iter().map(|s| inverse_real(&grid, s)).collect(),
    )?;
    Ok(HelmholtzParts {
        curl_free,
        div_free,
        mean,
    })
}

/// Row-wise Helmholtz decomposition of an `m×n` matrix field.
pub fn helmholtz_rows(p: &PeriodicField) -> Result<HelmholtzParts, SpectralError> {
    let grid = *p.grid();
    let n = grid.n;
    let Shape::Matrix(m, c) = p.shape() else {
        return Err(SpectralError::ShapeMismatch {
            expected: "matrix".into(),
            got: p.shape().to_string(),
        });
    };
    if c != n {
        return Err(SpectralError::ShapeMismatch {
            expected: format!("matrix {m}x{n}"),
            got: p.shape().to_string(),
        });
    }
    let (mut cf, mut df, mut mean) = (Vec::new(), Vec::new(), Vec::new());
    for row in 0..m {
        let comps = (0..n).map(|j| p.component(row * n + j).to_vec()).collect();
        let h = helmholtz(&PeriodicField::from_components(grid, Shape::Vector(n), comps)?)?;
        cf.extend_from_slice(h.curl_free.data());
        df.extend_from_slice(h.div_free.data());
        mean.extend(h.mean);
    }
    Ok(HelmholtzParts {
        curl_free: PeriodicField::new(grid, p.shape(), cf)?,
        div_free: PeriodicField::new(grid, p.shape(), df)?,
        mean,
    })
}

/// Max-norm of `Δa − ∇div a − ⟦∇⟧ₙᵀ curl a`, each term computed separately.
pub fn laplacian_decomposition_check(a: &PeriodicField) -> Result<f64, SpectralError> {
    let grid = *a.grid();
    if grid.n < 2 {
        return Err(SpectralError::InvalidParameter("needs n >= 2".into()));
    }
    expect_vector(a, grid.n)?;
    let lap = laplacian(a)?;
    let grad_div = gradient(&divergence(a)?)?;
    let rot = cross_transpose(&curl_vec(a)?)?;
    Ok(lap.sub(&grad_div)?.sub(&rot)?.max_abs())
}

/// Periodic Riesz potential: multiplier `|k|^{−s}` on the nonzero modes.
pub fn riesz_potential(f: &PeriodicField, s: f64) -> Result<PeriodicField, SpectralError> {
    let grid = *f.grid();
    if !(s > 0.0 && s < grid.n as f64) {
        return Err(SpectralError::InvalidParameter(format!(
            "Riesz order must lie in (0, {}), got {s}",
            grid.n
        )));
    }
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    let comps = (0..f.components())
        .map(|c| {
            let mut spec = forward(&grid, f.component(c));
            let mean = spec[0].re / grid.points() as f64;
            if mean.abs() > 1e-10 * scale {
                return Err(SpectralError::NonZeroMean(mean));
            }
            spec[0] = Complex64::new(0.0, 0.0);
            apply_multiplier(&grid, &mut spec, |_, multi| {
                let k2: f64 = multi.iter().map(|&j| grid.wavenumber_abs(j).powi(2)).sum();
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(k2.powf(-s / 2.0), 0.0)
                }
            });
            Ok(inverse_real(&grid, &spec))
        })
        .collect::<Result<Vec<_>, _>>()?;
    PeriodicField::from_components(grid, f.shape(), comps)
}

/// Summary of a Helmholtz split, used by reports and the acceptance suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzResiduals {
    pub reconstruction: f64,
    pub div_of_div_free: f64,
    pub curl_of_curl_free: f64,
}

pub fn helmholtz_residuals(a: &PeriodicField, parts: &HelmholtzParts) -> Result<HelmholtzResiduals, SpectralError> {
    Ok(HelmholtzResiduals {
        reconstruction: parts.reconstruct().sub(a)?.max_abs(),
        div_of_div_free: divergence(&parts.div_free)?.max_abs(),
        curl_of_curl_free: curl_vec(&parts.curl_free)?.max_abs(),
    })
}
