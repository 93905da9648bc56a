//! Parametrized matrix fields used by the blow-up probe.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algebra::{ComplexWitness, RealWitness};
use crate::spectral::{
    bump, gen_blowup3d, gen_example12_field, gen_mollified_log, gen_nullvector_field, gradient,
    lp_norm, Grid, PeriodicField, Shape,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `P_f` built from the mollified logarithm (`n = 2`).
    MollifiedLog,
    /// Hessian of the mollified Newtonian potential (`n = 3`).
    Blowup3d,
    /// `P_f` resampled along a complex nullvector (`n = 2`).
    Nullvector,
    /// `D(v ε sin(⟨x,ξ⟩/ε) χ)` for a real `𝔸[ξ]v = 0` (any `n`).
    Oscillation,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::MollifiedLog, Family::Blowup3d, Family::Nullvector, Family::Oscillation];

    pub fn name(self) -> &'static str {
        match self {
            Family::MollifiedLog => "mollified-log",
            Family::Blowup3d => "blowup3d",
            Family::Nullvector => "nullvector",
            Family::Oscillation => "oscillation",
        }
    }

    pub fn supports(self, n: usize) -> bool {
        match self {
            Family::MollifiedLog | Family::Nullvector => n == 2,
            Family::Blowup3d => n == 3,
            Family::Oscillation => n >= 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| HarnessError::Family(format!("unknown family `{s}`")))
    }
}

/// Geometry shared by all members of a family.
///
/// The mollified potentials are supported in `B_{2R+ε}`; the oscillation
/// family lives in `B_{2R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyGeometry {
    pub grid: Grid,
    pub big_r: f64,
    pub eps0: f64,
    /// Zero members outside their exact support, removing spectral
    /// round-off there (needed for the support test of the ball quotient).
    pub truncate: bool,
}

impl FamilyGeometry {
    /// Torus `[−π s, π s)ⁿ` with `R = 1.2 s` and `ε₀ = R/2`; the fields are
    /// then supported in `B_{3s}`.
    pub fn scaled(n: usize, size: usize, s: f64) -> Result<Self, HarnessError> {
        let grid = Grid::new(n, size, std::f64::consts::TAU * s)?;
        Ok(Self {
            grid,
            big_r: 1.2 * s,
            eps0: 0.6 * s,
            truncate: false,
        })
    }

    /// Largest support radius of any member.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.big_r + self.eps0
    }
}

/// What a family needs beyond the geometry.
#[derive(Debug, Clone, Default)]
pub struct FamilyInputs {
    pub complex_witness: Option<ComplexWitness>,
    pub real_witness: Option<RealWitness>,
}

/// One member of a family, with auxiliary norms for the record.
#[derive(Debug, Clone)]
pub struct Member {
    pub field: PeriodicField,
    /// Family-specific diagnostics, e.g. `‖Δg‖₁` for the 3D family.
    pub aux: Vec<(&'static str, f64)>,
}

/// Largest wavenumber of the oscillation family as a fraction of Nyquist.
pub const OSCILLATION_HEADROOM: f64 = 0.25;

fn mismatch(family: Family, n: usize) -> HarnessError {
    HarnessError::Family(format!("family `{family}` is not available in {n} dimensions"))
}

/// Builds the member at parameter `eps`.
pub fn member(family: Family, geo: &FamilyGeometry, inputs: &FamilyInputs, eps: f64) -> Result<Member, HarnessError> {
    let n = geo.grid.n;
    if !family.supports(n) {
        return Err(mismatch(family, n));
    }
    match family {
        Family::MollifiedLog => {
            let f = gen_mollified_log(geo.grid, eps, geo.big_r)?;
            Ok(Member {
                field: cut(geo, gen_example12_field(&f)?, eps),
                aux: vec![],
            })
        }
        Family::Nullvector => {
            let w = inputs.complex_witness.as_ref().ok_or_else(|| {
                HarnessError::Family("the operator has no complex nullvector; nullvector family unavailable".into())
            })?;
            let f = gen_mollified_log(geo.grid, eps, geo.big_r)?;
            let nf = gen_nullvector_field(w, &f)?;
            Ok(Member {
                field: nf.field,
                aux: vec![("alpha", nf.alpha)],
            })
        }
        Family::Blowup3d => {
            let b = gen_blowup3d(geo.grid, eps, geo.big_r)?;
            let hess = cut(geo, gradient(&b.f)?, eps);
            Ok(Member {
                aux: vec![
                    ("laplacian_l1", lp_norm(&b.laplacian, 1.0)?),
                    ("gradient_l3/2", lp_norm(&b.f, 1.5)?),
                ],
                field: hess,
            })
        }
        Family::Oscillation => {
            let w = inputs.real_witness.as_ref().ok_or_else(|| {
                HarnessError::Family("the operator is elliptic; oscillation family needs a real witness".into())
            })?;
            Ok(Member {
                field: oscillation(geo, w, eps)?,
                aux: vec![],
            })
        }
    }
}

fn cut(geo: &FamilyGeometry, f: PeriodicField, eps: f64) -> PeriodicField {
    if geo.truncate {
        truncate(f, 2.0 * geo.big_r + eps)
    } else {
        f
    }
}

/// Zeroes the field outside `B_radius`, where it vanishes exactly and only
/// spectral round-off remains.
fn truncate(f: PeriodicField, radius: f64) -> PeriodicField {
    let grid = *f.grid();
    let mut x = vec![0.0; grid.n];
    let outside: Vec<bool> = (0..grid.points())
        .map(|idx| {
            grid.position(idx, &mut x);
            x.iter().map(|a| a * a).sum::<f64>() > radius * radius
        })
        .collect();
    let comps = f.components();
    let mut f = f;
    for c in 0..comps {
        for (v, &o) in f.component_mut(c).iter_mut().zip(&outside) {
            if o {
                *v = 0.0;
            }
        }
    }
    f
}

/// `P = D(v ε sin(⟨x,ξ⟩/ε) χ)` with `χ` a bump of radius `2R`, evaluated
/// analytically. `𝒜[P] = O(ε)` and `Curl P = 0`, while `‖P‖ ≈ const`.
fn oscillation(geo: &FamilyGeometry, w: &RealWitness, eps: f64) -> Result<PeriodicField, HarnessError> {
    let n = geo.grid.n;
    if w.xi.len() != n || w.v.len() != n {
        return Err(HarnessError::Family("witness length does not match the dimension".into()));
    }
    let unit = |x: &[f64]| {
        let s = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter().map(|a| a / s).collect::<Vec<_>>()
    };
    let (xi, v) = (unit(&w.xi), unit(&w.v));
    let kmax = xi.iter().fold(0.0f64, |m, a| m.max(a.abs())) / eps;
    let nyquist = std::f64::consts::PI / geo.grid.spacing();
    if kmax > OSCILLATION_HEADROOM * nyquist {
        return Err(HarnessError::Family(format!(
            "oscillation at eps = {eps} is not resolved by the grid"
        )));
    }
    let rho = 2.0 * geo.big_r;
    Ok(PeriodicField::from_fn(geo.grid, Shape::Matrix(n, n), |x, out| {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let chi = bump(r2.sqrt(), rho);
        if chi == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let q = r2 / (rho * rho);
        // ∂ⱼχ = −χ·2xⱼ/(ρ²(1−q)²)
        let dchi = |j: usize| -chi * 2.0 * x[j] / (rho * rho * (1.0 - q).powi(2));
        let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>() / eps;
        let (s, c) = phase.sin_cos();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = v[i] * (xi[j] * c * chi + eps * s * dchi(j));
            }
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;
    use crate::spectral::curl_matrix_field;

    #[test]
    fn names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn oscillation_is_a_gradient_in_the_kernel_direction() {
        let geo = FamilyGeometry::scaled(2, 128, 1.0).unwrap();
        let inputs = FamilyInputs {
            real_witness: Some(RealWitness {
                xi: vec![1.0, 0.0],
                v: vec![1.0, 0.0],
            }),
            ..Default::default()
        };
        let p = member(Family::Oscillation, &geo, &inputs, 0.25).unwrap().field;
        let curl = lp_norm(&curl_matrix_field(&p).unwrap(), 2.0).unwrap();
        // Spectral differentiation of the analytic field; limited by the bump.
        assert!(curl < 1e-2 * lp_norm(&p, 2.0).unwrap());
        // skew(v⊗ξ) = 0 for v ∥ ξ, so only the O(ε) term survives.
        let skew = parse_operator("skew", 2).unwrap();
        let a = lp_norm(&p.apply_part_map(&skew).unwrap(), 2.0).unwrap();
        assert!(a < 0.5 * lp_norm(&p, 2.0).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let geo = FamilyGeometry::scaled(2, 32, 1.0).unwrap();
        assert!(member(Family::Blowup3d, &geo, &FamilyInputs::default(), 0.5).is_err());
    }
}
