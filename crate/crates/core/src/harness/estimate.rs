//! Empirical lower bounds for the optimal constant by randomized ascent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{quotient, HarnessError, KmsConfig, Mode};
use crate::spectral::{bump, gradient, random_field, Grid, PeriodicField, RandomFieldSpec, Shape};

/// Directions per ascent step.
const SUBSPACE_DIM: usize = 6;
/// Relative finite-difference step.
const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    /// Largest quotient found.
    pub best: f64,
    /// Which candidate attained it.
    pub argmax_id: String,
    pub iterations: usize,
    /// Best-so-far after the start and after every iteration.
    pub history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// Seeded random candidates, masked to `B_r` in subcritical mode.
#[derive(Debug, Clone, Copy)]
pub(super) struct Sampler {
    grid: Grid,
    spec: RandomFieldSpec,
    n: usize,
}

impl Sampler {
    pub(super) fn new(cfg: &KmsConfig, grid: Grid) -> Self {
        let mask_radius = match cfg.mode {
            Mode::Critical => None,
            Mode::Subcritical { r } => Some(r),
        };
        Self {
            grid,
            spec: RandomFieldSpec {
                kmax: (grid.size / 8).clamp(1, 6),
                decay: None,
                mask_radius,
            },
            n: cfg.n,
        }
    }

    pub(super) fn matrix(&self, rng: &mut ChaCha8Rng) -> Result<PeriodicField, HarnessError> {
        Ok(random_field(self.grid, Shape::Matrix(self.n, self.n), self.spec, rng)?)
    }

    /// `D(wχ) = Dw·χ + w⊗∇χ` with `w` band-limited, so the support of the
    /// mask is kept exactly.
    pub(super) fn gradient_field(&self, rng: &mut ChaCha8Rng) -> Result<PeriodicField, HarnessError> {
        let spec = RandomFieldSpec {
            mask_radius: None,
            ..self.spec
        };
        let w = random_field(self.grid, Shape::Vector(self.n), spec, rng)?;
        let dw = gradient(&w)?;
        let Some(rho) = self.spec.mask_radius else {
            return Ok(dw);
        };
        let n = self.n;
        let grid = self.grid;
        let mut data = vec![0.0; n * n * grid.points()];
        let mut x = vec![0.0; n];
        for idx in 0..grid.points() {
            grid.position(idx, &mut x);
            let r2: f64 = x.iter().map(|a| a * a).sum();
            let chi = bump(r2.sqrt(), rho);
            if chi == 0.0 {
                continue;
            }
            let q = r2 / (rho * rho);
            for i in 0..n {
                for j in 0..n {
                    let dchi = -chi * 2.0 * x[j] / (rho * rho * (1.0 - q).powi(2));
                    let c = i * n + j;
                    data[c * grid.points() + idx] =
                        dw.component(c)[idx] * chi + w.component(i)[idx] * dchi;
                }
            }
        }
        Ok(PeriodicField::new(grid, Shape::Matrix(n, n), data)?)
    }
}

fn rms(f: &PeriodicField) -> f64 {
    (f.data().iter().map(|v| v * v).sum::<f64>() / f.data().len() as f64).sqrt()
}

fn axpy(y: &PeriodicField, a: f64, x: &PeriodicField) -> PeriodicField {
    let data = y.data().iter().zip(x.data()).map(|(u, v)| u + a * v).collect();
    PeriodicField::new(*y.grid(), y.shape(), data).expect("same layout")
}

fn value(p: &PeriodicField, cfg: &KmsConfig) -> f64 {
    quotient(p, cfg).map(|q| q.value).unwrap_or(f64::NEG_INFINITY)
}

/// Randomized ascent on the quotient.
///
/// Starts from the better of a random matrix field and a random gradient
/// field; each iteration estimates the gradient of the quotient by finite
/// differences in a fresh random subspace of band-limited fields, tries a
/// few step lengths along it and keeps the candidate only if it improves.
/// All randomness comes from one seeded stream, so running more iterations
/// extends the same trajectory and the result never decreases.
pub fn estimate_constant(
    cfg: &KmsConfig,
    grid: Grid,
    iters: usize,
    seed: u64,
    warning: Option<String>,
) -> Result<ConstantEstimate, HarnessError> {
    cfg.validate()?;
    if grid.n != cfg.n {
        return Err(HarnessError::FieldMismatch(format!(
            "grid is {}-dimensional but n = {}",
            grid.n, cfg.n
        )));
    }
    let sampler = Sampler::new(cfg, grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = sampler.matrix(&mut rng)?;
    let grad = sampler.gradient_field(&mut rng)?;
    let (qr, qg) = (value(&random, cfg), value(&grad, cfg));
    let (mut current, mut best, mut argmax_id) = if qg >= qr {
        (grad, qg, format!("gradient/seed{seed}"))
    } else {
        (random, qr, format!("random/seed{seed}"))
    };
    let mut history = vec![best];
    for it in 0..iters {
        let scale = rms(&current);
        let dirs: Vec<PeriodicField> = (0..SUBSPACE_DIM)
            .map(|_| {
                sampler.matrix(&mut rng).map(|d| {
                    let s = rms(&d);
                    d.scale(scale / s)
                })
            })
            .collect::<Result<_, _>>()?;
        let grads: Vec<f64> = dirs
            .iter()
            .map(|d| (value(&axpy(&current, FD_STEP, d), cfg) - best) / FD_STEP)
            .collect();
        let gnorm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm > 0.0 && gnorm.is_finite() {
            let mut direction = PeriodicField::zeros(grid, current.shape());
            for (d, g) in dirs.iter().zip(&grads) {
                direction = axpy(&direction, g / gnorm, d);
            }
            for t in [0.5, 0.1, 0.02, 0.004] {
                let cand = axpy(&current, t, &direction);
                let v = value(&cand, cfg);
                if v > best {
                    let s = rms(&cand);
                    current = cand.scale(1.0 / s);
                    best = v;
                    argmax_id = format!("ascent/seed{seed}/iter{}", it + 1);
                    break;
                }
            }
        }
        history.push(best);
    }
    Ok(ConstantEstimate {
        best,
        argmax_id,
        iterations: iters,
        history,
        warning,
    })
}
