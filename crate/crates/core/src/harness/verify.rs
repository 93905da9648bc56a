use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate_constant, ConstantEstimate, Sampler};
use super::families::{Family, OSCILLATION_HEADROOM, FamilyGeometry, FamilyInputs};
use super::predict::{classify, predict, AlgebraSummary, Classification, Prediction, Verdict};
use super::probe::{blowup_probe, BlowupSeries, ProbeSettings, ProbeVerdict, DEFAULT_FAIL_RATIO};
use super::{quotient, HarnessError, KmsConfig, Mode};
use crate::algebra::{ComplexWitness, PartMap};
use crate::spectral::{Grid, DEFAULT_MAX_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub trials: usize,
    pub seed: u64,
    /// Points per axis of the family grid; `None` uses [`default_grid_size`].
    pub grid_size: Option<usize>,
    /// Upper bound on the total number of grid points.
    pub max_points: usize,
    pub steps: usize,
    pub fail_ratio: f64,
    /// Ascent iterations for the constant estimate; `0` skips it.
    pub estimate_iters: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            trials: 4,
            seed: 0,
            grid_size: None,
            max_points: DEFAULT_MAX_POINTS,
            steps: 6,
            fail_ratio: DEFAULT_FAIL_RATIO,
            estimate_iters: 0,
        }
    }
}

/// Quotients above this are read as a denominator at discretization-error
/// level, i.e. a field in the joint kernel of `𝒜` and `Curl`.
pub const NUMERICAL_KERNEL_QUOTIENT: f64 = 1e3;

/// Points per axis for the random trials, which are band-limited and
/// resolved on coarse grids.
pub fn trial_grid_size(n: usize) -> usize {
    match n {
        2 => 128,
        3 => 32,
        _ => 16,
    }
}

/// Points per axis for the blow-up family. Detecting the logarithmic
/// growth of a failing two-dimensional inequality needs the finest `ε` to
/// span a few grid cells; bounded families are cheap to confirm coarsely.
pub fn default_grid_size(n: usize, verdict: Verdict) -> usize {
    match (n, verdict) {
        (2, Verdict::Fails) => 1024,
        (2, Verdict::Holds) => 256,
        (3, _) => 64,
        _ => 16,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientEntry {
    pub id: String,
    /// `None` when the field lies in the joint kernel.
    pub value: Option<f64>,
    pub zero_denominator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsReport {
    pub config: KmsConfig,
    pub grid: Grid,
    pub algebra: AlgebraSummary,
    pub prediction: Prediction,
    pub quotients: Vec<QuotientEntry>,
    pub blowup: Option<BlowupSeries>,
    pub blowup_slope: Option<f64>,
    pub best_constant_estimate: Option<f64>,
    pub constant_estimate: Option<ConstantEstimate>,
    pub verdict_consistent: bool,
    pub notes: Vec<String>,
}

/// Probe geometry for a configuration: the whole-space torus in critical
/// mode, and a torus scaled so that every family member lives in `B_r` in
/// subcritical mode.
pub fn family_geometry(cfg: &KmsConfig, size: usize) -> Result<FamilyGeometry, HarnessError> {
    let s = match cfg.mode {
        Mode::Critical => 1.0,
        Mode::Subcritical { r } => r / 3.0,
    };
    let mut geo = FamilyGeometry::scaled(cfg.n, size, s)?;
    geo.truncate = matches!(cfg.mode, Mode::Subcritical { .. });
    Ok(geo)
}

/// First `ε` of a probe: the family default, raised for the oscillation
/// family so that the last step is still resolved.
pub fn probe_eps0(family: Family, geo: &FamilyGeometry, steps: usize) -> f64 {
    match family {
        Family::Oscillation => {
            let nyquist = std::f64::consts::PI / geo.grid.spacing();
            geo.eps0.max(2f64.powi(steps as i32 - 1) / (OSCILLATION_HEADROOM * nyquist))
        }
        _ => geo.eps0,
    }
}

/// The family used to test a prediction, with its inputs.
fn choose_family(cfg: &KmsConfig, prediction: &Prediction, cls: &Classification) -> Option<(Family, FamilyInputs)> {
    let alg = &cls.summary;
    match prediction.verdict {
        Verdict::Fails if !alg.elliptic => Some((
            Family::Oscillation,
            FamilyInputs {
                real_witness: cls.ellipticity.witness.clone(),
                ..Default::default()
            },
        )),
        Verdict::Fails if cfg.n == 2 && cfg.mode == Mode::Critical => {
            let w = cls.c_ellipticity.nullvector_witness.clone().filter(non_degenerate);
            match w {
                Some(w) => Some((
                    Family::Nullvector,
                    FamilyInputs {
                        complex_witness: Some(w),
                        ..Default::default()
                    },
                )),
                None => Some((Family::MollifiedLog, FamilyInputs::default())),
            }
        }
        Verdict::Fails => None,
        Verdict::Holds => match cfg.n {
            2 => Some((Family::MollifiedLog, FamilyInputs::default())),
            3 => Some((Family::Blowup3d, FamilyInputs::default())),
            _ => None,
        },
    }
}

fn non_degenerate(w: &ComplexWitness) -> bool {
    let det = w.re_xi[0] * w.im_xi[1] - w.re_xi[1] * w.im_xi[0];
    det.abs() > 1e-8
}

/// Runs the prediction, random trials and the matching blow-up family and
/// checks that the evidence does not contradict the prediction.
///
/// Evidence for `Holds`: every trial quotient is finite (and below
/// [`NUMERICAL_KERNEL_QUOTIENT`]) and the family does not blow up. Evidence
/// for `Fails`: a field in the joint kernel, or a family whose quotient
/// crosses the failure ratio or increases at every step with positive slope.
/// When no family applies, a `Fails` prediction is recorded as consistent
/// with a note.
pub fn verify(cfg: &KmsConfig, settings: &VerifySettings) -> Result<KmsReport, HarnessError> {
    cfg.validate()?;
    let cls = classify(&cfg.part_map);
    let prediction = predict(cfg, &cls.summary)?;
    let size = settings
        .grid_size
        .unwrap_or_else(|| default_grid_size(cfg.n, prediction.verdict));
    let geo = family_geometry(cfg, size)?;
    if geo.grid.points() > settings.max_points {
        return Err(HarnessError::Unsupported(format!(
            "grid of {} points exceeds the budget of {}",
            geo.grid.points(),
            settings.max_points
        )));
    }
    let mut notes = Vec::new();

    let mut quotients = Vec::with_capacity(settings.trials);
    let trial_geo = family_geometry(cfg, size.min(trial_grid_size(cfg.n)))?;
    let sampler = Sampler::new(cfg, trial_geo.grid);
    for t in 0..settings.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(t as u64));
        let (id, field) = if t % 2 == 0 {
            (format!("random/{t}"), sampler.matrix(&mut rng)?)
        } else {
            (format!("gradient/{t}"), sampler.gradient_field(&mut rng)?)
        };
        let entry = match quotient(&field, cfg) {
            Ok(q) => QuotientEntry {
                id,
                value: Some(q.value),
                zero_denominator: false,
            },
            Err(HarnessError::ZeroDenominator { .. }) => QuotientEntry {
                id,
                value: None,
                zero_denominator: true,
            },
            Err(e) => return Err(e),
        };
        quotients.push(entry);
    }
    let kernel_hit = quotients
        .iter()
        .any(|q| q.zero_denominator || q.value.is_some_and(|v| v >= NUMERICAL_KERNEL_QUOTIENT));

    let mut family_in_kernel = false;
    let blowup = if settings.trials == 0 {
        None
    } else {
        match choose_family(cfg, &prediction, &cls) {
            Some((family, inputs)) => {
                let probe = ProbeSettings {
                    steps: settings.steps,
                    eps0: probe_eps0(family, &geo, settings.steps),
                    fail_ratio: settings.fail_ratio,
                };
                match blowup_probe(cfg, family, &geo, &inputs, probe) {
                    Ok(b) => Some(b),
                    Err(HarnessError::ZeroDenominator { .. }) => {
                        family_in_kernel = true;
                        notes.push(format!("a member of the {family} family lies in the joint kernel"));
                        None
                    }
                    Err(e) => return Err(e),
                }
            }
            None => {
                notes.push("no blow-up family is available for this constellation; only random trials were run".into());
                None
            }
        }
    };

    let verdict_consistent = match prediction.verdict {
        Verdict::Holds => {
            if kernel_hit {
                notes.push("a trial field annihilated both terms of the denominator".into());
            }
            let bounded = blowup.as_ref().map_or(true, |b| b.verdict == ProbeVerdict::BoundedSoFar);
            if !bounded {
                notes.push("the blow-up family diverged although the inequality is predicted to hold".into());
            }
            !kernel_hit && !family_in_kernel && bounded
        }
        Verdict::Fails => match &blowup {
            _ if kernel_hit || family_in_kernel => true,
            Some(b) => {
                let in_kernel = b.quotients.iter().any(|&q| q >= NUMERICAL_KERNEL_QUOTIENT);
                let grows = b.verdict == ProbeVerdict::Fails || (b.slope > 0.0 && b.monotone());
                if in_kernel && !grows {
                    notes.push("family members lie in the joint kernel up to discretization error".into());
                }
                let grows = grows || in_kernel;
                if b.verdict != ProbeVerdict::Fails && grows {
                    notes.push(format!(
                        "quotient grows monotonically (ratio {:.3}) but stays below the failure threshold {}",
                        b.ratio, settings.fail_ratio
                    ));
                }
                grows
            }
            None => true,
        },
    };

    let constant_estimate = if settings.estimate_iters > 0 {
        let warning = (prediction.verdict == Verdict::Fails)
            .then(|| "the inequality is predicted to fail; the estimate is not a constant".to_string());
        Some(estimate_constant(cfg, geo.grid, settings.estimate_iters, settings.seed, warning)?)
    } else {
        None
    };
    let best_constant_estimate = quotients
        .iter()
        .filter_map(|q| q.value)
        .chain(constant_estimate.as_ref().map(|c| c.best))
        .reduce(f64::max);

    Ok(KmsReport {
        config: cfg.clone(),
        grid: geo.grid,
        algebra: cls.summary,
        prediction,
        blowup_slope: blowup.as_ref().map(|b| b.slope),
        quotients,
        blowup,
        best_constant_estimate,
        constant_estimate,
        verdict_consistent,
        notes,
    })
}

/// The constellations of the two decision tables for dimension `n`:
/// critical `p ∈ {1, (1+n)/2}` and subcritical `(p, q)` with `q = 1` and
/// `1 < q < p*`, on the unit ball.
pub fn standard_constellations(part_map: &PartMap) -> Vec<KmsConfig> {
    let n = part_map.n();
    let mid = (1.0 + n as f64) / 2.0;
    let mut out = vec![
        KmsConfig::critical(part_map.clone(), 1.0),
        KmsConfig::critical(part_map.clone(), mid),
        KmsConfig::subcritical(part_map.clone(), 1.0, 1.0, 1.0),
    ];
    let p_star = super::sobolev_conjugate(1.0, n);
    out.push(KmsConfig::subcritical(part_map.clone(), 1.0, (1.0 + p_star) / 2.0, 1.0));
    out
}
