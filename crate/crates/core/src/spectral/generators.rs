//! Field generators: mollified fundamental solutions and the structured
//! matrix fields built from a scalar potential.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use super::calculus::{derivative, gradient, laplacian};
use super::fft::{for_each_mode, forward, inverse_real};
use super::{Grid, PeriodicField, Shape, SpectralError};
use crate::algebra::ComplexWitness;

/// Smooth transition `S(t)`: `0` for `t ≤ 0`, `1` for `t ≥ 1`, `C^∞` in between.
/// Returns `(S, S', S'')`.
pub fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    // u(s) = exp(−1/s) and its first two derivatives.
    let u = |s: f64| {
        let e = (-1.0 / s).exp();
        (e, e / (s * s), e * (1.0 / s.powi(4) - 2.0 / s.powi(3)))
    };
    let (a, a1, a2) = u(t);
    let (b, b1, b2) = u(1.0 - t);
    let (b1, b2) = (-b1, b2);
    let d = a + b;
    let d1 = a1 + b1;
    let num = a1 * b - a * b1;
    let num1 = a2 * b - a * b2;
    (a / d, num / (d * d), num1 / (d * d) - 2.0 * num * d1 / (d * d * d))
}

/// Radial cutoff `φ_R(r) = S((2R − r)/R)`: `1` on `B_R`, `0` outside `B_{2R}`.
/// Returns `(φ, φ', φ'')` in `r`.
pub fn cutoff(r: f64, big_r: f64) -> (f64, f64, f64) {
    let (s, s1, s2) = smoothstep((2.0 * big_r - r) / big_r);
    (s, -s1 / big_r, s2 / (big_r * big_r))
}

/// Samples of the mollifier `ρ_ε ∝ exp(−1/(1−|x/ε|²))`, normalized to unit
/// discrete mass. When `ε` is below the grid spacing this degenerates to a
/// discrete delta at the origin.
pub fn mollifier(grid: Grid, eps: f64) -> PeriodicField {
    let raw = PeriodicField::scalar_from_fn(grid, |x| {
        let q = x.iter().map(|v| v * v).sum::<f64>() / (eps * eps);
        if q < 1.0 {
            (-1.0 / (1.0 - q)).exp()
        } else {
            0.0
        }
    });
    let mass: f64 = raw.data().iter().sum::<f64>() * grid.cell_volume();
    raw.scale(1.0 / mass)
}

/// Cyclic shift by `N/2` on every axis; moves the origin between index
/// `N/2` (field layout) and index `0` (convolution layout). An involution.
pub fn roll_half(grid: &Grid, data: &[f64]) -> Vec<f64> {
    let half = grid.size / 2;
    let mut out = vec![0.0; data.len()];
    let mut multi = vec![0usize; grid.n];
    for (idx, &v) in data.iter().enumerate() {
        grid.unflatten(idx, &mut multi);
        multi.iter_mut().for_each(|j| *j = (*j + half) % grid.size);
        out[grid.flatten(&multi)] = v;
    }
    out
}

fn validate(grid: &Grid, eps: f64, big_r: f64, n: usize) -> Result<(), SpectralError> {
    if grid.n != n {
        return Err(SpectralError::InvalidParameter(format!(
            "generator needs a {n}-dimensional grid, got {}",
            grid.n
        )));
    }
    if !(eps > 0.0 && eps < big_r && big_r < grid.length / 4.0) {
        return Err(SpectralError::InvalidParameter(format!(
            "need 0 < eps < R < L/4, got eps = {eps}, R = {big_r}, L = {}",
            grid.length
        )));
    }
    Ok(())
}

/// Composite Simpson rule on `[0, b]`.
fn simpson(f: impl Fn(f64) -> f64, b: f64, intervals: usize) -> f64 {
    let h = b / intervals as f64;
    let mut s = f(0.0) + f(b);
    for i in 1..intervals {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Solves `Δg = c·ρ_ε + ρ_ε * h` for the potential `g = ρ_ε * (φ_R·G)` where
/// `G` is a fundamental solution with `ΔG = c·δ` and `h = Δ(φ_R G) − c·δ` is
/// smooth and radial. `mean` fixes the constant mode. Nyquist modes are
/// dropped so that every derivative of the result is consistent.
fn mollified_potential(
    grid: Grid,
    eps: f64,
    c: f64,
    h_radial: impl Fn(f64) -> f64,
    mean: f64,
) -> Vec<f64> {
    let rho = roll_half(&grid, mollifier(grid, eps).data());
    let h = PeriodicField::scalar_from_fn(grid, |x| h_radial(x.iter().map(|v| v * v).sum::<f64>().sqrt()));
    let h = roll_half(&grid, h.data());
    let rho_hat = forward(&grid, &rho);
    let h_hat = forward(&grid, &h);
    let cell = grid.cell_volume();
    let mut g_hat = vec![Complex64::new(0.0, 0.0); grid.points()];
    for_each_mode(&grid, |idx, multi| {
        if multi.iter().any(|&j| grid.is_nyquist(j)) {
            return;
        }
        if idx == 0 {
            g_hat[0] = Complex64::new(mean * grid.points() as f64, 0.0);
            return;
        }
        let k2: f64 = multi.iter().map(|&j| grid.wavenumber(j).powi(2)).sum();
        let s = rho_hat[idx] * c + rho_hat[idx] * h_hat[idx] * cell;
        g_hat[idx] = -s / k2;
    });
    roll_half(&grid, &inverse_real(&grid, &g_hat))
}

/// `f = ρ_ε * (φ_R · (1/2π) log|x|)` on a two-dimensional torus.
pub fn gen_mollified_log(grid: Grid, eps: f64, big_r: f64) -> Result<PeriodicField, SpectralError> {
    validate(&grid, eps, big_r, 2)?;
    // Δ(φ_R Φ) = δ + 2∇φ_R·∇Φ + Φ Δφ_R with Φ = log r / 2π.
    let h = |r: f64| {
        if r < big_r || r > 2.0 * big_r {
            return 0.0;
        }
        let (_, p1, p2) = cutoff(r, big_r);
        2.0 * p1 / (TAU * r) + r.ln() / TAU * (p2 + p1 / r)
    };
    let integral = simpson(|r| if r > 0.0 { cutoff(r, big_r).0 * r * r.ln() } else { 0.0 }, 2.0 * big_r, 40_000);
    let mean = integral / grid.volume();
    PeriodicField::scalar(grid, mollified_potential(grid, eps, 1.0, h, mean))
}

/// A member of the three-dimensional blow-up family.
#[derive(Debug, Clone, PartialEq)]
pub struct Blowup3d {
    /// `g = ρ_ε * (φ_R / |x|)`.
    pub g: PeriodicField,
    /// `f = ∇g`.
    pub f: PeriodicField,
    /// `Δg`.
    pub laplacian: PeriodicField,
}

/// `f = ∇(ρ_ε * (φ_R/|x|))` on a three-dimensional torus.
pub fn gen_blowup3d(grid: Grid, eps: f64, big_r: f64) -> Result<Blowup3d, SpectralError> {
    validate(&grid, eps, big_r, 3)?;
    // Δ(φ_R/r) = −4πδ + φ_R''/r.
    let h = |r: f64| {
        if r < big_r || r > 2.0 * big_r {
            return 0.0;
        }
        cutoff(r, big_r).2 / r
    };
    let integral = 4.0 * PI * simpson(|r| cutoff(r, big_r).0 * r, 2.0 * big_r, 40_000);
    let mean = integral / grid.volume();
    let g = PeriodicField::scalar(grid, mollified_potential(grid, eps, -4.0 * PI, h, mean))?;
    let f = gradient(&g)?;
    let laplacian = laplacian(&g)?;
    Ok(Blowup3d { g, f, laplacian })
}

/// `P_f = [[∂₁f, ∂₂f], [−∂₂f, ∂₁f]]`, annihilated by `dev sym`.
pub fn gen_example12_field(f: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    if f.grid().n != 2 || f.shape() != Shape::Scalar {
        return Err(SpectralError::ShapeMismatch {
            expected: "scalar field in two dimensions".into(),
            got: format!("{} in {} dimensions", f.shape(), f.grid().n),
        });
    }
    let d1 = derivative(f, 0)?.into_data();
    let d2 = derivative(f, 1)?.into_data();
    let neg_d2 = d2.iter().map(|v| -v).collect();
    PeriodicField::from_components(*f.grid(), Shape::Matrix(2, 2), vec![d1.clone(), d2, neg_d2, d1])
}

/// Output of [`gen_nullvector_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct NullvectorField {
    pub field: PeriodicField,
    /// The witness after rescaling `ξ ↦ λξ`.
    pub witness: ComplexWitness,
    /// `α = det[Re ξ; Im ξ]`, so that `Curl P_f = −α (Δf)(x_ξ) Im v`.
    pub alpha: f64,
    /// Whether `x ↦ x_ξ` maps the grid onto itself (exact resampling).
    pub lattice_exact: bool,
}

fn integer_matrix(b: &[[f64; 2]; 2]) -> Option<[[i64; 2]; 2]> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let r = b[i][j].round();
            if (b[i][j] - r).abs() > 1e-12 {
                return None;
            }
            out[i][j] = r as i64;
        }
    }
    Some(out)
}

/// Evaluates the trigonometric interpolant of `data` at `y` (physical).
fn fourier_interpolate(grid: &Grid, modes: &[(Vec<i64>, Complex64)], y: &[f64]) -> f64 {
    let h = grid.spacing();
    let half = (grid.size / 2) as f64;
    let scale = 1.0 / grid.points() as f64;
    modes
        .iter()
        .map(|(m, c)| {
            let phase: f64 = m
                .iter()
                .zip(y)
                .map(|(&mi, &yi)| TAU * mi as f64 * (yi / h + half) / grid.size as f64)
                .sum();
            (c * Complex64::from_polar(1.0, phase)).re
        })
        .sum::<f64>()
        * scale
}

fn significant_modes(grid: &Grid, data: &[f64]) -> Vec<(Vec<i64>, Complex64)> {
    let spec = forward(grid, data);
    let max = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for_each_mode(grid, |idx, multi| {
        if spec[idx].norm() > 1e-15 * max && !multi.iter().any(|&j| grid.is_nyquist(j)) {
            let signed = multi
                .iter()
                .map(|&j| if j < grid.size / 2 { j as i64 } else { j as i64 - grid.size as i64 })
                .collect();
            out.push((signed, spec[idx]));
        }
    });
    out
}

/// Builds
/// `P_f(x) = Re v⊗Re ξ ψ − Im v⊗Im ξ ψ + Re v⊗Im ξ χ + Im v⊗Re ξ χ`
/// with `ψ = (∂₁f)(x_ξ)`, `χ = (∂₂f)(x_ξ)` and `x_ξ = (⟨x,Re ξ⟩, ⟨x,Im ξ⟩)`.
///
/// The witness is first rescaled by a complex factor so that `x ↦ x_ξ` is an
/// integer matrix whenever possible; resampling is then an exact index map.
/// Otherwise the trigonometric interpolant is evaluated at the mapped
/// points, which is spectrally accurate but no longer periodic.
pub fn gen_nullvector_field(w: &ComplexWitness, f: &PeriodicField) -> Result<NullvectorField, SpectralError> {
    let grid = *f.grid();
    if grid.n != 2 || f.shape() != Shape::Scalar {
        return Err(SpectralError::ShapeMismatch {
            expected: "scalar field in two dimensions".into(),
            got: format!("{} in {} dimensions", f.shape(), grid.n),
        });
    }
    if [&w.re_xi, &w.im_xi, &w.re_v, &w.im_v].iter().any(|v| v.len() != 2) {
        return Err(SpectralError::DegenerateWitness("witness must have length 2".into()));
    }
    let xi = w.xi();
    let one = Complex64::new(1.0, 0.0);
    let mut lambdas = vec![one];
    for z in &xi {
        if z.norm() > 1e-12 {
            lambdas.push(one / z);
            lambdas.push(Complex64::i() / z);
        }
    }
    let as_b = |l: Complex64| {
        let s: Vec<Complex64> = xi.iter().map(|z| z * l).collect();
        [[s[0].re, s[1].re], [s[0].im, s[1].im]]
    };
    let det = |b: &[[f64; 2]; 2]| b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let chosen = lambdas
        .iter()
        .map(|&l| (l, as_b(l)))
        .find(|(_, b)| det(b).abs() > 1e-12 && integer_matrix(b).is_some());
    let (lambda, b) = chosen.unwrap_or((one, as_b(one)));
    let alpha = det(&b);
    let xi_norm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if alpha.abs() <= 1e-12 * xi_norm * xi_norm {
        return Err(SpectralError::DegenerateWitness("Re xi and Im xi are parallel".into()));
    }

    let d1 = derivative(f, 0)?.into_data();
    let d2 = derivative(f, 1)?.into_data();
    let pts = grid.points();
    let (psi, chi, lattice_exact) = match integer_matrix(&b) {
        Some(bi) => {
            let nn = grid.size as i64;
            let half = nn / 2;
            let mut psi = vec![0.0; pts];
            let mut chi = vec![0.0; pts];
            let mut multi = [0usize; 2];
            for idx in 0..pts {
                grid.unflatten(idx, &mut multi);
                let j = [multi[0] as i64 - half, multi[1] as i64 - half];
                let target = [
                    (bi[0][0] * j[0] + bi[0][1] * j[1] + half).rem_euclid(nn) as usize,
                    (bi[1][0] * j[0] + bi[1][1] * j[1] + half).rem_euclid(nn) as usize,
                ];
                let t = grid.flatten(&target);
                psi[idx] = d1[t];
                chi[idx] = d2[t];
            }
            (psi, chi, true)
        }
        None => {
            log::warn!("witness does not preserve the grid lattice; using Fourier interpolation");
            let m1 = significant_modes(&grid, &d1);
            let m2 = significant_modes(&grid, &d2);
            let mut psi = vec![0.0; pts];
            let mut chi = vec![0.0; pts];
            let mut x = [0.0; 2];
            for idx in 0..pts {
                grid.position(idx, &mut x);
                let y = [
                    b[0][0] * x[0] + b[0][1] * x[1],
                    b[1][0] * x[0] + b[1][1] * x[1],
                ];
                psi[idx] = fourier_interpolate(&grid, &m1, &y);
                chi[idx] = fourier_interpolate(&grid, &m2, &y);
            }
            (psi, chi, false)
        }
    };

    let scaled: Vec<Complex64> = xi.iter().map(|z| z * lambda).collect();
    let witness = ComplexWitness {
        re_xi: scaled.iter().map(|z| z.re).collect(),
        im_xi: scaled.iter().map(|z| z.im).collect(),
        re_v: w.re_v.clone(),
        im_v: w.im_v.clone(),
    };
    let (rx, ix, rv, iv) = (&witness.re_xi, &witness.im_xi, &witness.re_v, &witness.im_v);
    let mut comps = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let a = rv[i] * rx[j] - iv[i] * ix[j];
            let c = rv[i] * ix[j] + iv[i] * rx[j];
            comps.push(psi.iter().zip(&chi).map(|(p, q)| a * p + c * q).collect());
        }
    }
    Ok(NullvectorField {
        field: PeriodicField::from_components(grid, Shape::Matrix(2, 2), comps)?,
        witness,
        alpha,
        lattice_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_derivative_bounds() {
        let big_r = 0.7;
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for i in 0..=20_000 {
            let r = 2.0 * big_r * i as f64 / 20_000.0;
            let (_, c1, c2) = cutoff(r, big_r);
            d1 = d1.max(c1.abs());
            d2 = d2.max(c2.abs());
        }
        assert!(d1 * big_r <= 2.0 + 1e-9);
        // No C² transition over a length-R interval gets below 4/R²; this one peaks near 9.84/R².
        assert!(d2 * big_r * big_r < 9.85);
    }

    #[test]
    fn smoothstep_derivatives_match_differences() {
        for &t in &[0.1, 0.37, 0.5, 0.8] {
            let (s, s1, s2) = smoothstep(t);
            let h = 1e-5;
            let (sp, s1p, _) = smoothstep(t + h);
            let (sm, s1m, _) = smoothstep(t - h);
            assert!(((sp - sm) / (2.0 * h) - s1).abs() < 1e-8);
            assert!(((s1p - s1m) / (2.0 * h) - s2).abs() < 1e-6);
            assert!((0.0..=1.0).contains(&s));
        }
        assert!((smoothstep(0.5).0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let g = Grid::periodic(2, 64).unwrap();
        let m = mollifier(g, 0.5);
        assert!((m.data().iter().sum::<f64>() * g.cell_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roll_half_is_involution() {
        let g = Grid::periodic(3, 8).unwrap();
        let d: Vec<f64> = (0..g.points()).map(|i| i as f64).collect();
        assert_eq!(roll_half(&g, &roll_half(&g, &d)), d);
    }

    #[test]
    fn parameter_ordering() {
        let g = Grid::periodic(2, 32).unwrap();
        assert!(gen_mollified_log(g, 0.5, 0.4).is_err());
        assert!(gen_mollified_log(g, 0.1, 2.0).is_err());
        assert!(gen_blowup3d(g, 0.1, 0.5).is_err());
    }

    #[test]
    fn mollified_log_matches_log_away_from_origin() {
        let g = Grid::periodic(2, 128).unwrap();
        let f = gen_mollified_log(g, 0.2, 1.0).unwrap();
        // Between the mollifier radius and the cutoff, f = log|x| / 2π exactly
        // (the mollifier preserves harmonic functions' mean values).
        let mut x = [0.0; 2];
        let mut worst: f64 = 0.0;
        for idx in 0..g.points() {
            g.position(idx, &mut x);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r > 0.4 && r < 0.7 {
                worst = worst.max((f.data()[idx] - r.ln() / TAU).abs());
            }
        }
        assert!(worst < 1e-3, "worst deviation {worst}");
    }
}
