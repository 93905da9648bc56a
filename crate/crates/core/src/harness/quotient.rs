use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HarnessError, KmsConfig, Mode};
use crate::algebra::{AcpDecomposition, PartMap};
use crate::spectral::{
    averaged_lp_norm_on_ball, curl_matrix_field, derivative, lp_norm, sup_outside_ball,
    PeriodicField, Shape,
};

/// Denominators below this fraction of the numerator count as zero.
const ZERO_DENOMINATOR_RTOL: f64 = 1e-12;
/// Support test: sup outside the ball relative to the global sup.
pub const SUPPORT_RTOL: f64 = 1e-10;

/// The three norms entering a quotient and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    pub lhs: f64,
    pub part_term: f64,
    pub curl_term: f64,
    pub value: f64,
}

fn check_field(p: &PeriodicField, cfg: &KmsConfig) -> Result<(), HarnessError> {
    let want = Shape::Matrix(cfg.part_map.m(), cfg.part_map.n());
    if p.shape() != want || p.grid().n != cfg.n {
        return Err(HarnessError::FieldMismatch(format!(
            "expected {want} in {} dimensions, got {} in {}",
            cfg.n,
            p.shape(),
            p.grid().n
        )));
    }
    Ok(())
}

fn finish(lhs: f64, part_term: f64, curl_term: f64) -> Result<Quotient, HarnessError> {
    let denom = part_term + curl_term;
    if denom <= ZERO_DENOMINATOR_RTOL * lhs || denom == 0.0 {
        return Err(HarnessError::ZeroDenominator { numerator: lhs });
    }
    Ok(Quotient {
        lhs,
        part_term,
        curl_term,
        value: lhs / denom,
    })
}

/// `‖P‖_{p*} / (‖𝒜[P]‖_{p*} + ‖Curl P‖_p)`.
pub fn kms_quotient(p: &PeriodicField, cfg: &KmsConfig) -> Result<Quotient, HarnessError> {
    check_field(p, cfg)?;
    let ps = cfg.q;
    let lhs = lp_norm(p, ps)?;
    let part = lp_norm(&p.apply_part_map(&cfg.part_map)?, ps)?;
    let curl = lp_norm(&curl_matrix_field(p)?, cfg.p)?;
    finish(lhs, part, curl)
}

/// `(⨍|P|^q)^{1/q} / ((⨍|𝒜[P]|^q)^{1/q} + r(⨍|Curl P|^p)^{1/p})` over `B_r`.
pub fn subcritical_quotient(p: &PeriodicField, cfg: &KmsConfig) -> Result<Quotient, HarnessError> {
    check_field(p, cfg)?;
    let Mode::Subcritical { r } = cfg.mode else {
        return Err(HarnessError::Unsupported("subcritical quotient needs a ball radius".into()));
    };
    let outside = sup_outside_ball(p, r);
    let sup = p.pointwise_norm().into_iter().fold(0.0, f64::max);
    if outside > SUPPORT_RTOL * sup {
        return Err(HarnessError::SupportViolation {
            outside,
            sup,
            radius: r,
        });
    }
    let lhs = averaged_lp_norm_on_ball(p, cfg.q, r)?;
    let part = averaged_lp_norm_on_ball(&p.apply_part_map(&cfg.part_map)?, cfg.q, r)?;
    let curl = r * averaged_lp_norm_on_ball(&curl_matrix_field(p)?, cfg.p, r)?;
    finish(lhs, part, curl)
}

/// Dispatches on the configuration's mode.
pub fn quotient(p: &PeriodicField, cfg: &KmsConfig) -> Result<Quotient, HarnessError> {
    match cfg.mode {
        Mode::Critical => kms_quotient(p, cfg),
        Mode::Subcritical { .. } => subcritical_quotient(p, cfg),
    }
}

/// Residual of `𝔊⁻¹Curl P − (−∂₂γ(P), ∂₁γ(P))ᵀ = 𝔊⁻¹Curl(𝓛(𝒜[P]))`, as a
/// max-norm relative to `max|𝔊⁻¹Curl P|`.
pub fn acp_pipeline_residual(
    p: &PeriodicField,
    part_map: &PartMap,
    acp: &AcpDecomposition,
) -> Result<f64, HarnessError> {
    let grid = *p.grid();
    let g_inv = acp
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| HarnessError::Unsupported("G is singular".into()))?;
    let pts = grid.points();
    let a = p.apply_part_map(part_map)?;
    // Pointwise 𝓛(𝒜[P]) and γ(P).
    let mut lap = vec![vec![0.0; pts]; 4];
    let mut gamma = vec![0.0; pts];
    let mut y = DVector::zeros(part_map.out_dim());
    for idx in 0..pts {
        for r in 0..part_map.out_dim() {
            y[r] = a.component(r)[idx];
        }
        let l = acp.apply_l(&y);
        let x = DMatrix::from_fn(2, 2, |i, j| p.entry(i, j)[idx]);
        for c in 0..4 {
            lap[c][idx] = l[(c / 2, c % 2)];
        }
        gamma[idx] = acp.gamma_of(&x);
    }
    let lap = PeriodicField::from_components(grid, Shape::Matrix(2, 2), lap)?;
    let gamma = PeriodicField::scalar(grid, gamma)?;
    let curl_p = curl_matrix_field(p)?;
    let curl_l = curl_matrix_field(&lap)?;
    let d1 = derivative(&gamma, 0)?;
    let d2 = derivative(&gamma, 1)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for idx in 0..pts {
        let cp = DVector::from_vec(vec![curl_p.component(0)[idx], curl_p.component(1)[idx]]);
        let cl = DVector::from_vec(vec![curl_l.component(0)[idx], curl_l.component(1)[idx]]);
        let f = &g_inv * cp;
        let rot = DVector::from_vec(vec![-d2.data()[idx], d1.data()[idx]]);
        let res = (&f - rot - &g_inv * cl).amax();
        worst = worst.max(res);
        scale = scale.max(f.amax());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}
