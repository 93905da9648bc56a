use std::f64::consts::TAU;

use kms_core::spectral::io::{read_field, write_field};
use kms_core::spectral::{
    curl_matrix_field, derivative, divergence, gradient, helmholtz, laplacian, lp_norm, random_field_seeded,
    riesz_potential, Grid, PeriodicField, RandomFieldSpec, Shape,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // ∂ⱼ of a single Fourier mode, against the closed form.
    #[test]
    fn derivative_of_a_mode(k0 in -10i32..10, k1 in -10i32..10, axis in 0usize..2, len in 1.0f64..10.0) {
        let grid = Grid::new(2, 32, len).unwrap();
        let w = TAU / len;
        let f = PeriodicField::scalar_from_fn(grid, |x| (w * (k0 as f64 * x[0] + k1 as f64 * x[1])).sin());
        let k = [k0, k1][axis] as f64 * w;
        let expect = PeriodicField::scalar_from_fn(grid, |x| k * (w * (k0 as f64 * x[0] + k1 as f64 * x[1])).cos());
        let err = derivative(&f, axis).unwrap().sub(&expect).unwrap().max_abs();
        prop_assert!(err < 1e-11 * (1.0 + k.abs()));
    }

    #[test]
    fn helmholtz_parts_are_orthogonal(seed in 0u64..1000, n in 2usize..4) {
        let grid = Grid::periodic(n, if n == 2 { 32 } else { 16 }).unwrap();
        let spec = RandomFieldSpec { kmax: 4, ..Default::default() };
        let a = random_field_seeded(grid, Shape::Vector(n), spec, seed).unwrap();
        let h = helmholtz(&a).unwrap();
        let dot: f64 = h.curl_free.data().iter().zip(h.div_free.data()).map(|(x, y)| x * y).sum();
        let scale: f64 = a.data().iter().map(|x| x * x).sum();
        prop_assert!(dot.abs() < 1e-12 * scale);
        prop_assert!(divergence(&h.div_free).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn lp_norm_is_absolutely_homogeneous(seed in 0u64..1000, p in 1.0f64..6.0, c in -4.0f64..4.0) {
        let grid = Grid::periodic(2, 16).unwrap();
        let f = random_field_seeded(grid, Shape::Matrix(2, 2), RandomFieldSpec { kmax: 3, ..Default::default() }, seed).unwrap();
        let a = lp_norm(&f.scale(c), p).unwrap();
        let b = c.abs() * lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
}

#[test]
fn lp_norm_of_a_constant() {
    let grid = Grid::new(2, 16, 2.0).unwrap();
    let f = PeriodicField::scalar_from_fn(grid, |_| 3.0);
    // ‖3‖_p = 3·|Ω|^{1/p} with |Ω| = 4.
    for p in [1.0, 1.5, 2.0, 4.0] {
        assert!((lp_norm(&f, p).unwrap() - 3.0 * 4f64.powf(1.0 / p)).abs() < 1e-12);
    }
    assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 3.0);
    assert!(lp_norm(&f, 0.5).is_err());
}

#[test]
fn curl_of_gradient_vanishes_in_four_dimensions() {
    let grid = Grid::periodic(4, 8).unwrap();
    let u = random_field_seeded(grid, Shape::Vector(4), RandomFieldSpec { kmax: 2, ..Default::default() }, 1).unwrap();
    let du = gradient(&u).unwrap();
    assert!(curl_matrix_field(&du).unwrap().max_abs() < 1e-10 * du.max_abs());
}

#[test]
fn riesz_potential_inverts_the_laplacian_at_order_two() {
    let grid = Grid::periodic(3, 16).unwrap();
    let f = random_field_seeded(grid, Shape::Scalar, RandomFieldSpec { kmax: 4, ..Default::default() }, 9).unwrap();
    let back = laplacian(&riesz_potential(&f, 2.0).unwrap()).unwrap();
    // Δ I₂ f = −f for zero-mean f.
    assert!(back.add(&f).unwrap().max_abs() < 1e-10 * f.max_abs());
    let shifted = f.map(|v| v + 1.0);
    assert!(riesz_potential(&shifted, 1.0).is_err());
}

#[test]
fn field_files_roundtrip() {
    let grid = Grid::new(3, 8, 1.5).unwrap();
    let f = random_field_seeded(grid, Shape::Matrix(3, 3), RandomFieldSpec { kmax: 2, ..Default::default() }, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.kms");
    write_field(std::fs::File::create(&path).unwrap(), &f).unwrap();
    let back = read_field(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, f);
}

#[test]
fn invalid_grids_are_refused() {
    assert!(Grid::new(2, 0, 1.0).is_err());
    assert!(Grid::new(2, 16, -1.0).is_err());
}
