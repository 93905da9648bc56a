use super::{PeriodicField, SpectralError};

fn check_p(p: f64) -> Result<(), SpectralError> {
    if p.is_nan() || p < 1.0 {
        return Err(SpectralError::InvalidParameter(format!("norm exponent must be >= 1, got {p}")));
    }
    Ok(())
}

fn rectangle_rule(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, f64::max);
    }
    let s: f64 = if p == 1.0 {
        values.sum()
    } else if p == 2.0 {
        values.map(|v| v * v).sum()
    } else {
        values.map(|v| v.powf(p)).sum()
    };
    (s * cell).powf(1.0 / p)
}

/// `(Σ|f|ᵖ·hⁿ)^{1/p}` with the pointwise Euclidean/Frobenius norm; `p = ∞`
/// gives the max norm.
pub fn lp_norm(f: &PeriodicField, p: f64) -> Result<f64, SpectralError> {
    check_p(p)?;
    let pw = f.pointwise_norm();
    Ok(rectangle_rule(pw.into_iter(), p, f.grid().cell_volume()))
}

/// Points of the grid inside the closed ball `|x| ≤ r` about the origin.
pub fn ball_mask(f: &PeriodicField, r: f64) -> Vec<bool> {
    let grid = f.grid();
    let mut x = vec![0.0; grid.n];
    (0..grid.points())
        .map(|idx| {
            grid.position(idx, &mut x);
            x.iter().map(|v| v * v).sum::<f64>() <= r * r
        })
        .collect()
}

/// Mean-normalized norm over a ball: `(⨍_{B_r} |f|ᵖ)^{1/p}`.
///
/// The average uses the discrete ball volume (number of interior points
/// times the cell volume), which keeps the quotient scale invariant up to
/// quadrature error.
pub fn averaged_lp_norm_on_ball(f: &PeriodicField, p: f64, r: f64) -> Result<f64, SpectralError> {
    check_p(p)?;
    let mask = ball_mask(f, r);
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(SpectralError::InvalidParameter(format!("ball of radius {r} contains no grid points")));
    }
    let pw = f.pointwise_norm();
    let vals = pw.into_iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v);
    Ok(rectangle_rule(vals, p, 1.0 / count as f64))
}

/// Largest pointwise norm outside the ball `|x| ≤ r`.
pub fn sup_outside_ball(f: &PeriodicField, r: f64) -> f64 {
    let mask = ball_mask(f, r);
    f.pointwise_norm()
        .into_iter()
        .zip(mask)
        .filter(|(_, inside)| !inside)
        .fold(0.0, |m, (v, _)| m.max(v))
}
