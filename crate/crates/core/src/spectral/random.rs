use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::fft::inverse_real;
use super::{Grid, PeriodicField, Shape, SpectralError};

/// Band-limited random fields with Gaussian Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldSpec {
    /// Largest integer wavenumber per axis.
    pub kmax: usize,
    /// Coefficients decay like `|k|^{−decay}`; `None` uses `n + 1`.
    pub decay: Option<f64>,
    /// Multiply by a smooth bump supported in `|x| < radius`.
    pub mask_radius: Option<f64>,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        Self {
            kmax: 6,
            decay: None,
            mask_radius: None,
        }
    }
}

/// `exp(1 − 1/(1 − (r/ρ)²))` inside `r < ρ`, zero outside; equals 1 at 0.
pub fn bump(r: f64, radius: f64) -> f64 {
    let q = (r / radius).powi(2);
    if q < 1.0 {
        (1.0 - 1.0 / (1.0 - q)).exp()
    } else {
        0.0
    }
}

/// Zero-mean random field, normalized to unit RMS over all components
/// before masking.
pub fn random_field<R: Rng + ?Sized>(
    grid: Grid,
    shape: Shape,
    spec: RandomFieldSpec,
    rng: &mut R,
) -> Result<PeriodicField, SpectralError> {
    if spec.kmax == 0 || spec.kmax >= grid.size / 2 {
        return Err(SpectralError::InvalidParameter(format!(
            "kmax must lie in 1..{}, got {}",
            grid.size / 2,
            spec.kmax
        )));
    }
    let n = grid.n;
    let decay = spec.decay.unwrap_or(n as f64 + 1.0);
    let width = 2 * spec.kmax + 1;
    let mut comps = Vec::with_capacity(shape.components());
    for _ in 0..shape.components() {
        let mut hat = vec![Complex64::new(0.0, 0.0); grid.points()];
        let mut multi = vec![0usize; n];
        for code in 0..width.pow(n as u32) {
            let mut c = code;
            let mut k2 = 0.0;
            for slot in multi.iter_mut() {
                let m = (c % width) as i64 - spec.kmax as i64;
                c /= width;
                k2 += (m * m) as f64;
                *slot = m.rem_euclid(grid.size as i64) as usize;
            }
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if k2 == 0.0 {
                continue;
            }
            hat[grid.flatten(&multi)] = Complex64::new(re, im) * k2.powf(-decay / 2.0);
        }
        comps.push(inverse_real(&grid, &hat));
    }
    let total: f64 = comps.iter().flatten().map(|v| v * v).sum();
    let rms = (total / (grid.points() * shape.components()) as f64).sqrt();
    if rms > 0.0 {
        comps.iter_mut().flatten().for_each(|v| *v /= rms);
    }
    if let Some(radius) = spec.mask_radius {
        let mut x = vec![0.0; n];
        let mask: Vec<f64> = (0..grid.points())
            .map(|idx| {
                grid.position(idx, &mut x);
                bump(x.iter().map(|v| v * v).sum::<f64>().sqrt(), radius)
            })
            .collect();
        for c in comps.iter_mut() {
            c.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
        }
    }
    PeriodicField::from_components(grid, shape, comps)
}

pub fn random_field_seeded(
    grid: Grid,
    shape: Shape,
    spec: RandomFieldSpec,
    seed: u64,
) -> Result<PeriodicField, SpectralError> {
    random_field(grid, shape, spec, &mut ChaCha8Rng::seed_from_u64(seed))
}
