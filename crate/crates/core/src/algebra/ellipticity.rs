//! Ellipticity, ℂ-ellipticity and cancellation of induced operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::{column_basis, intersect, min_singular, RANK_RTOL};
use super::operator::{pure_tensor_span_dim, symbol, symbol_complex, DiffOperator};

const CIRCLE_SAMPLES: usize = 720;
const SPHERE_SAMPLES: usize = 10_000;
const COMPLEX_SAMPLES: usize = 20_000;
const SAMPLE_SEED: u64 = 0x4b4d_5331;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ellipticity {
    Elliptic,
    NotElliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CEllipticity {
    CElliptic,
    NotCElliptic,
}

/// A real pair `(ξ, v)` with `𝔸[ξ]v ≈ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealWitness {
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityCertificate {
    pub verdict: Ellipticity,
    pub witness: Option<RealWitness>,
    /// Smallest `σ_min(𝔸[ξ])` found over unit `ξ`.
    pub min_sigma: f64,
    /// The unit direction attaining `min_sigma`.
    pub argmin_xi: Vec<f64>,
    /// Absolute threshold: the relative tolerance times `‖𝒜‖`.
    pub tolerance: f64,
    pub samples: usize,
}

impl EllipticityCertificate {
    pub fn is_elliptic(&self) -> bool {
        self.verdict == Ellipticity::Elliptic
    }

    /// Replays the witness: `‖𝔸[ξ]v‖ / (‖ξ‖‖v‖)`.
    pub fn witness_residual(&self, op: &DiffOperator) -> Option<f64> {
        let w = self.witness.as_ref()?;
        let s = symbol(op, &w.xi).ok()?;
        let r = (&s.matrix * DVector::from_column_slice(&w.v)).norm();
        Some(r / (norm(&w.xi) * norm(&w.v)))
    }
}

/// A complex pair `(ξ, v)` split into real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexWitness {
    pub re_xi: Vec<f64>,
    pub im_xi: Vec<f64>,
    pub re_v: Vec<f64>,
    pub im_v: Vec<f64>,
}

impl ComplexWitness {
    fn from_complex(xi: &[Complex64], v: &[Complex64]) -> Self {
        Self {
            re_xi: xi.iter().map(|z| z.re).collect(),
            im_xi: xi.iter().map(|z| z.im).collect(),
            re_v: v.iter().map(|z| z.re).collect(),
            im_v: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn xi(&self) -> Vec<Complex64> {
        zip_complex(&self.re_xi, &self.im_xi)
    }

    pub fn v(&self) -> Vec<Complex64> {
        zip_complex(&self.re_v, &self.im_v)
    }

    /// Residual of the real system
    /// `𝔸[Re ξ]Re v = 𝔸[Im ξ]Im v`, `𝔸[Im ξ]Re v = −𝔸[Re ξ]Im v`,
    /// normalized by `‖ξ‖‖v‖`.
    pub fn telephone_residual(&self, op: &DiffOperator) -> f64 {
        let (Ok(sr), Ok(si)) = (symbol(op, &self.re_xi), symbol(op, &self.im_xi)) else {
            return f64::INFINITY;
        };
        let rv = DVector::from_column_slice(&self.re_v);
        let iv = DVector::from_column_slice(&self.im_v);
        let first = &sr.matrix * &rv - &si.matrix * &iv;
        let second = &si.matrix * &rv + &sr.matrix * &iv;
        let xi_norm = (norm(&self.re_xi).powi(2) + norm(&self.im_xi).powi(2)).sqrt();
        let v_norm = (norm(&self.re_v).powi(2) + norm(&self.im_v).powi(2)).sqrt();
        (first.norm_squared() + second.norm_squared()).sqrt() / (xi_norm * v_norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEllipticityCertificate {
    pub verdict: CEllipticity,
    pub nullvector_witness: Option<ComplexWitness>,
    pub span_dim: usize,
    pub elliptic: Ellipticity,
    /// Set when the verdict rests on randomized complex sampling (`n ≥ 3`).
    pub heuristic: bool,
    pub tolerance: f64,
}

impl CEllipticityCertificate {
    pub fn is_c_elliptic(&self) -> bool {
        self.verdict == CEllipticity::CElliptic
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn zip_complex(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

fn threshold(op: &DiffOperator, tol: f64) -> f64 {
    let s = op.scale();
    tol * if s > 0.0 { s } else { 1.0 }
}

fn sigma_at(op: &DiffOperator, xi: &[f64]) -> (f64, DVector<f64>) {
    let s = symbol(op, xi).expect("direction has operator dimension");
    min_singular(&s.matrix)
}

fn normalize(x: &mut [f64]) {
    let r = norm(x);
    if r > 0.0 {
        x.iter_mut().for_each(|a| *a /= r);
    }
}

/// Minimizes `f` on `[a, b]` by golden-section search.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Coordinate pattern search on the unit sphere of `ℝ^d`.
fn refine_on_sphere<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut h = step;
    let mut budget = 4000;
    while h > 1e-12 && budget > 0 {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] += sign * h;
                normalize(&mut y);
                let fy = f(&y);
                budget -= 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// Quasi-uniform directions on `S^{n-1}`: a Fibonacci lattice for `n = 3`,
/// seeded Gaussian directions otherwise; coordinate axes are always included.
fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if n == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..count {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        for _ in 0..count {
            let mut d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            normalize(&mut d);
            dirs.push(d);
        }
    }
    dirs
}

/// Decides ellipticity by minimizing `σ_min(𝔸[ξ])` over unit `ξ`.
///
/// `tol` is relative to the spectral norm of the part map. In two dimensions
/// a 720-point grid on the half circle (`±ξ` give the same singular values)
/// is refined by golden-section search; in higher dimensions a sphere
/// sample of at least `10⁴` points is refined by pattern search.
pub fn is_elliptic(op: &DiffOperator, tol: f64) -> EllipticityCertificate {
    let n = op.n();
    let thr = threshold(op, tol);
    let (xi, min_sigma, samples) = if n == 2 {
        let dir = |t: f64| [t.cos(), t.sin()];
        let h = std::f64::consts::PI / CIRCLE_SAMPLES as f64;
        let (k, s0) = (0..CIRCLE_SAMPLES)
            .map(|k| (k, sigma_at(op, &dir(k as f64 * h)).0))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty grid");
        let t0 = k as f64 * h;
        let (t, s) = golden_section(|t| sigma_at(op, &dir(t)).0, t0 - h, t0 + h, 80);
        if s < s0 {
            (dir(t).to_vec(), s, CIRCLE_SAMPLES)
        } else {
            (dir(t0).to_vec(), s0, CIRCLE_SAMPLES)
        }
    } else {
        let dirs = sphere_directions(n, SPHERE_SAMPLES);
        let best = dirs
            .iter()
            .map(|d| (d, sigma_at(op, d).0))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty sample");
        let (x, s) = refine_on_sphere(|d| sigma_at(op, d).0, best.0, 0.05);
        if s < best.1 {
            (x, s, dirs.len())
        } else {
            (best.0.clone(), best.1, dirs.len())
        }
    };
    let elliptic = min_sigma > thr;
    let witness = (!elliptic).then(|| {
        let (_, v) = sigma_at(op, &xi);
        RealWitness {
            xi: xi.clone(),
            v: v.iter().copied().collect(),
        }
    });
    EllipticityCertificate {
        verdict: if elliptic {
            Ellipticity::Elliptic
        } else {
            Ellipticity::NotElliptic
        },
        witness,
        min_sigma,
        argmin_xi: xi,
        tolerance: thr,
        samples,
    }
}

/// Scales `v` so that its largest entry (first one on ties) equals one.
fn normalize_complex(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .copied()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("maximum is attained");
    v.iter_mut().for_each(|z| *z /= pivot);
}

/// Complex roots of `c2 t² + c1 t + c0` (degree taken from the nonzero
/// leading coefficient).
fn quadratic_roots(c2: f64, c1: f64, c0: f64, eps: f64) -> Vec<Complex64> {
    if c2.abs() > eps {
        let disc = Complex64::new(c1 * c1 - 4.0 * c2 * c0, 0.0).sqrt();
        // Numerically stable pairing of the two roots.
        let q = if c1 >= 0.0 {
            -(Complex64::new(c1, 0.0) + disc) / 2.0
        } else {
            -(Complex64::new(c1, 0.0) - disc) / 2.0
        };
        let mut roots = vec![q / c2];
        if q.norm() > 0.0 {
            roots.push(Complex64::new(c0, 0.0) / q);
        } else {
            roots.push(Complex64::new(0.0, 0.0));
        }
        roots
    } else if c1.abs() > eps {
        vec![Complex64::new(-c0 / c1, 0.0)]
    } else {
        Vec::new()
    }
}

/// Matrix-pencil search for `t` with `rank(𝔸₁ + t𝔸₂) < 2` (two unknowns).
///
/// Every `2×2` minor of the pencil is a quadratic in `t`; a common root is a
/// root of the minor with the largest leading coefficient, so only its roots
/// are tested against all minors. The direction `ξ = (0, 1)` (the root at
/// infinity) is tested separately.
fn pencil_witness(op: &DiffOperator, thr: f64) -> Option<ComplexWitness> {
    let (m1, m2) = (&op.coeffs[0], &op.coeffs[1]);
    let rows = m1.nrows();
    let scale = op.scale().max(f64::MIN_POSITIVE);

    let (s_inf, v_inf) = min_singular(m2);
    if s_inf <= thr {
        let v: Vec<Complex64> = v_inf.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let xi = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        return Some(ComplexWitness::from_complex(&xi, &v));
    }

    let mut minors = Vec::new();
    for r in 0..rows {
        for s in r + 1..rows {
            let (a_r, c_r, b_r, d_r) = (m1[(r, 0)], m1[(r, 1)], m2[(r, 0)], m2[(r, 1)]);
            let (a_s, c_s, b_s, d_s) = (m1[(s, 0)], m1[(s, 1)], m2[(s, 0)], m2[(s, 1)]);
            let c0 = a_r * c_s - a_s * c_r;
            let c1 = a_r * d_s + b_r * c_s - a_s * d_r - b_s * c_r;
            let c2 = b_r * d_s - b_s * d_r;
            minors.push([c2, c1, c0]);
        }
    }
    let eps = 1e-12 * scale * scale;
    let chosen = minors
        .iter()
        .max_by(|x, y| {
            (x[0].abs(), x[1].abs())
                .partial_cmp(&(y[0].abs(), y[1].abs()))
                .expect("finite coefficients")
        })?;
    let mut roots = quadratic_roots(chosen[0], chosen[1], chosen[2], eps);
    roots.sort_by(|a, b| b.im.total_cmp(&a.im));
    for t in roots {
        let weight = 1.0 + t.norm_sqr();
        let all_vanish = minors.iter().all(|c| {
            let p = Complex64::new(c[0], 0.0) * t * t + Complex64::new(c[1], 0.0) * t + c[2];
            p.norm() <= thr * scale * weight
        });
        if !all_vanish {
            continue;
        }
        let xi = [Complex64::new(1.0, 0.0), t];
        let s = symbol_complex(op, &xi).ok()?;
        let (sigma, v) = min_singular(&s.matrix);
        if sigma > thr * weight.sqrt() {
            continue;
        }
        let mut v: Vec<Complex64> = v.iter().copied().collect();
        normalize_complex(&mut v);
        return Some(ComplexWitness::from_complex(&xi, &v));
    }
    None
}

fn complex_sigma(op: &DiffOperator, x: &[f64]) -> (f64, DVector<Complex64>) {
    let n = op.n();
    let xi = zip_complex(&x[..n], &x[n..]);
    let s = symbol_complex(op, &xi).expect("direction has operator dimension");
    min_singular(&s.matrix)
}

/// Randomized search for a complex null direction; returns the best point
/// found (as `(Re ξ, Im ξ)` on the unit sphere of `ℝ^{2n}`) and its `σ_min`.
fn complex_search(op: &DiffOperator) -> (Vec<f64>, f64) {
    let d = 2 * op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 0xc0ff_ee);
    let mut best = (Vec::new(), f64::INFINITY);
    for _ in 0..COMPLEX_SAMPLES {
        let mut x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        normalize(&mut x);
        let s = complex_sigma(op, &x).0;
        if s < best.1 {
            best = (x, s);
        }
    }
    refine_on_sphere(|x| complex_sigma(op, x).0, &best.0, 0.05)
}

/// Decides ℂ-ellipticity.
///
/// For `n = 2` with two unknowns the decision is exact: an elliptic operator
/// is ℂ-elliptic iff its pure tensors span a space of dimension 3 or 4; for
/// the remaining cases a complex null pair is produced by the matrix-pencil
/// method. Other shapes fall back to randomized complex sampling and the
/// certificate is marked heuristic.
pub fn is_c_elliptic(op: &DiffOperator, tol: f64) -> CEllipticityCertificate {
    let ell = is_elliptic(op, tol);
    let span_dim = pure_tensor_span_dim(op);
    let thr = ell.tolerance;
    let mut cert = CEllipticityCertificate {
        verdict: CEllipticity::NotCElliptic,
        nullvector_witness: None,
        span_dim,
        elliptic: ell.verdict,
        heuristic: false,
        tolerance: thr,
    };
    if let Some(w) = &ell.witness {
        cert.nullvector_witness = Some(ComplexWitness {
            re_xi: w.xi.clone(),
            im_xi: vec![0.0; w.xi.len()],
            re_v: w.v.clone(),
            im_v: vec![0.0; w.v.len()],
        });
        return cert;
    }
    if op.n() == 2 && op.m() == 2 {
        if (3..=4).contains(&span_dim) {
            cert.verdict = CEllipticity::CElliptic;
        } else {
            cert.nullvector_witness = pencil_witness(op, thr);
            if cert.nullvector_witness.is_none() {
                log::warn!("pencil search found no complex null pair (span dimension {span_dim})");
            }
        }
        return cert;
    }
    cert.heuristic = true;
    let (x, sigma) = complex_search(op);
    if sigma > thr {
        cert.verdict = CEllipticity::CElliptic;
    } else {
        let n = op.n();
        let (_, v) = complex_sigma(op, &x);
        let mut v: Vec<Complex64> = v.iter().copied().collect();
        normalize_complex(&mut v);
        cert.nullvector_witness = Some(ComplexWitness::from_complex(&zip_complex(&x[..n], &x[n..]), &v));
    }
    cert
}

fn sample_directions(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        let h = std::f64::consts::PI / CIRCLE_SAMPLES as f64;
        (0..CIRCLE_SAMPLES)
            .map(|k| {
                let t = k as f64 * h;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        sphere_directions(n, 200)
    }
}

/// Whether `⋂_ξ 𝔸[ξ](V) = {0}`, by intersecting sampled symbol images.
///
/// `tol` is the relative singular-value cutoff for ranks. The zero operator
/// is vacuously cancelling; callers check ellipticity separately.
pub fn is_cancelling(op: &DiffOperator, tol: f64) -> bool {
    let rtol = tol.max(RANK_RTOL);
    let mut basis: Option<DMatrix<f64>> = None;
    for xi in sample_directions(op.n()) {
        let s = symbol(op, &xi).expect("direction has operator dimension");
        let image = column_basis(&s.matrix, rtol);
        let next = match basis {
            None => image,
            Some(b) => intersect(&b, &image, rtol),
        };
        if next.ncols() == 0 {
            return true;
        }
        basis = Some(next);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{induce_operator, parse_operator, DEFAULT_TOL};

    fn op(name: &str, n: usize) -> DiffOperator {
        induce_operator(&parse_operator(name, n).unwrap())
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|t| (t - 0.3).powi(2), 0.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn quadratic_roots_of_t2_plus_1() {
        let r = quadratic_roots(1.0, 0.0, 1.0, 1e-14);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15 && z.re.abs() < 1e-15));
    }

    #[test]
    fn zero_map_is_not_elliptic_but_vacuously_cancelling() {
        let z = op("zero", 2);
        let c = is_elliptic(&z, DEFAULT_TOL);
        assert_eq!(c.verdict, Ellipticity::NotElliptic);
        assert!(c.witness_residual(&z).unwrap() <= c.tolerance);
        assert!(is_cancelling(&z, DEFAULT_TOL));
    }

    #[test]
    fn skew_is_not_elliptic_in_two_dimensions() {
        let s = op("skew", 2);
        let c = is_elliptic(&s, DEFAULT_TOL);
        assert!(!c.is_elliptic());
        assert!(c.witness_residual(&s).unwrap() < 1e-12);
    }

    #[test]
    fn dev_sym_witness_is_one_i() {
        let d = op("dev_sym", 2);
        let c = is_c_elliptic(&d, DEFAULT_TOL);
        assert_eq!(c.verdict, CEllipticity::NotCElliptic);
        let w = c.nullvector_witness.unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&w.re_xi, &[1.0, 0.0]) && close(&w.im_xi, &[0.0, 1.0]));
        assert!(close(&w.re_v, &[1.0, 0.0]) && close(&w.im_v, &[0.0, -1.0]));
        assert!(w.telephone_residual(&d) < 1e-14);
    }

    #[test]
    fn cancelling_matches_c_ellipticity() {
        assert!(is_cancelling(&op("sym", 2), DEFAULT_TOL));
        assert!(!is_cancelling(&op("dev_sym", 2), DEFAULT_TOL));
    }

    #[test]
    fn three_dimensional_dev_sym_is_c_elliptic() {
        let c = is_c_elliptic(&op("dev_sym", 3), DEFAULT_TOL);
        assert!(c.heuristic);
        assert_eq!(c.verdict, CEllipticity::CElliptic);
    }
}
