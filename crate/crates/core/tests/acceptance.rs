//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL criterion k: ...` line with the measured values, then
//! asserts. Run with `--nocapture` to see the lines.

use std::time::{Duration, Instant};

use kms_core::algebra::{
    almost_complementary, catalogue_names, factor_through, induce_operator, is_c_elliptic, is_cancelling,
    is_elliptic, parse_operator, ComplexWitness, DEFAULT_TOL,
};
use kms_core::harness::{
    blowup_probe, classify, predict, standard_constellations, verify, Family, FamilyGeometry, FamilyInputs, KmsConfig,
    ProbeSettings, Verdict, VerifySettings,
};
use kms_core::spectral::{
    curl_matrix_field, gen_blowup3d, gen_example12_field, gen_mollified_log, gen_nullvector_field,
    gradient, helmholtz, helmholtz_residuals, laplacian, laplacian_decomposition_check, lp_norm, random_field_seeded,
    Grid, RandomFieldSpec, Shape,
};
use kms_core::tensor::{area_property_check, cross_matrix, cross_product};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(k: u32, budget: Duration, start: Instant, pass: bool, detail: String) {
    let t = start.elapsed();
    println!(
        "\n{} criterion {k}: {detail} [{:.2?}, budget {:?}]",
        if pass { "PASS" } else { "FAIL" },
        t,
        budget
    );
    assert!(pass, "criterion {k}: {detail}");
}

#[test]
fn criterion_01_classification_truth_table() {
    let start = Instant::now();
    let expected = [
        ("grad", true, true, 4),
        ("dev_grad", true, true, 3),
        ("sym", true, true, 3),
        ("dev_sym", true, false, 2),
        ("skew_plus_trace", true, false, 2),
    ];
    let mut wrong = Vec::new();
    for (name, e, c, span) in expected {
        let s = classify(&parse_operator(name, 2).unwrap()).summary;
        if (s.elliptic, s.c_elliptic, s.span_dim) != (e, c, span) {
            wrong.push(format!("{name}: got ({}, {}, {})", s.elliptic, s.c_elliptic, s.span_dim));
        }
    }
    report(
        1,
        Duration::from_secs(1),
        start,
        wrong.is_empty(),
        format!("5 operators, mismatches {wrong:?}"),
    );
}

#[test]
fn criterion_02_cancelling_matches_c_ellipticity() {
    let start = Instant::now();
    let mut checked = 0;
    let mut violations = Vec::new();
    for name in catalogue_names() {
        let op = induce_operator(&parse_operator(name, 2).unwrap());
        if !is_elliptic(&op, DEFAULT_TOL).is_elliptic() {
            continue;
        }
        checked += 1;
        let c = is_c_elliptic(&op, DEFAULT_TOL);
        let canc = is_cancelling(&op, DEFAULT_TOL);
        if canc != c.is_c_elliptic() || c.is_c_elliptic() != matches!(c.span_dim, 3 | 4) {
            violations.push(*name);
        }
    }
    report(
        2,
        Duration::from_secs(1),
        start,
        checked > 0 && violations.is_empty(),
        format!("{checked} elliptic operators, violations {violations:?}"),
    );
}

#[test]
fn criterion_03_acp_soundness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["sym", "grad", "dev_grad"] {
        let op = induce_operator(&parse_operator(name, 2).unwrap());
        let Ok(acp) = almost_complementary(&op, DEFAULT_TOL) else {
            ok = false;
            parts.push(format!("{name}: refused"));
            continue;
        };
        let worst = (0..1000)
            .map(|_| acp.residual(&op, &DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0))))
            .fold(0.0, f64::max);
        let det = acp.det_g().abs();
        ok &= det >= 1e-8 && worst <= 1e-10;
        if name == "sym" {
            let g = &acp.g;
            let s = g[(1, 0)];
            let rot = g[(0, 0)].abs().max(g[(1, 1)].abs()).max((g[(0, 1)] + s).abs());
            ok &= s.abs() > 1e-8 && rot <= 1e-12 * s.abs();
            parts.push(format!("sym: G = {s:.3}·[[0,-1],[1,0]] (off {rot:.1e})"));
        }
        parts.push(format!("{name}: |det G| {det:.3}, residual {worst:.1e}"));
    }
    let dev_sym = induce_operator(&parse_operator("dev_sym", 2).unwrap());
    let refused = almost_complementary(&dev_sym, DEFAULT_TOL).is_err();
    ok &= refused;
    parts.push(format!("dev_sym refused: {refused}"));
    report(3, Duration::from_secs(1), start, ok, parts.join("; "));
}

#[test]
fn criterion_04_cross_product_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 4];
    for n in 2..=6 {
        for _ in 0..10_000 {
            let mut v = || (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
            let (a, b, c) = (v(), v(), v());
            let (s, t): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let ab = cross_product(&a, &b).unwrap();
            let ba = cross_product(&b, &a).unwrap();
            worst[0] = worst[0].max(ab.iter().zip(&ba).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max));
            let lin: Vec<f64> = a.iter().zip(&c).map(|(x, y)| s * x + t * y).collect();
            let lhs = cross_product(&lin, &b).unwrap();
            let cb = cross_product(&c, &b).unwrap();
            let bil = lhs
                .iter()
                .zip(ab.iter().zip(&cb))
                .map(|(l, (x, y))| (l - s * x - t * y).abs())
                .fold(0.0, f64::max);
            worst[1] = worst[1].max(bil);
            worst[2] = worst[2].max(area_property_check(&a, &b).unwrap());
            let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let frob = cross_matrix(&a).unwrap().matrix.norm();
            worst[3] = worst[3].max((frob - ((n - 1) as f64).sqrt() * norm_a).abs());
        }
    }
    report(
        4,
        Duration::from_secs(1),
        start,
        worst.iter().all(|&w| w <= 1e-12),
        format!(
            "n = 2..6, 10^4 trials each: antisymmetry {:.1e}, bilinearity {:.1e}, area {:.1e}, Frobenius {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}

#[test]
fn criterion_05_spectral_identities() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, size) in [(2, 256), (3, 64)] {
        let grid = Grid::periodic(n, size).unwrap();
        let spec = RandomFieldSpec::default();
        let a = random_field_seeded(grid, Shape::Vector(n), spec, 5).unwrap();
        let scale = a.max_abs();
        let h = helmholtz(&a).unwrap();
        let r = helmholtz_residuals(&a, &h).unwrap();
        let lap = laplacian_decomposition_check(&a).unwrap();
        let u = random_field_seeded(grid, Shape::Vector(n), spec, 6).unwrap();
        let du = gradient(&u).unwrap();
        let curl_du = curl_matrix_field(&du).unwrap().max_abs() / du.max_abs();
        let rel = [r.div_of_div_free / scale, r.curl_of_curl_free / scale, lap / scale];
        ok &= r.reconstruction <= 1e-12 && rel.iter().all(|&x| x <= 1e-10) && curl_du <= 1e-10;
        parts.push(format!(
            "n = {n}, N = {size}: reconstruction {:.1e}, div {:.1e}, curl {:.1e}, Laplacian {:.1e}, Curl Du {:.1e}",
            r.reconstruction, rel[0], rel[1], rel[2], curl_du
        ));
    }
    report(5, Duration::from_secs(30), start, ok, parts.join("; "));
}

#[test]
fn criterion_06_dev_sym_annihilates_the_example_field() {
    let start = Instant::now();
    let grid = Grid::periodic(2, 128).unwrap();
    let dev_sym = parse_operator("dev_sym", 2).unwrap();
    let (mut worst_a, mut worst_curl) = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let f = random_field_seeded(grid, Shape::Scalar, RandomFieldSpec::default(), 100 + seed).unwrap();
        let p = gen_example12_field(&f).unwrap();
        worst_a = worst_a.max(p.apply_part_map(&dev_sym).unwrap().max_abs() / p.max_abs());
        let curl = curl_matrix_field(&p).unwrap();
        let lap = laplacian(&f).unwrap();
        // Curl P_f = (0, Δf)ᵀ
        let first = curl.component(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let second = curl
            .component(1)
            .iter()
            .zip(lap.data())
            .fold(0.0f64, |m, (c, l)| m.max((c - l).abs()));
        worst_curl = worst_curl.max(first.max(second) / lap.max_abs());
    }
    report(
        6,
        Duration::from_secs(5),
        start,
        worst_a <= 4.0 * f64::EPSILON && worst_curl <= 1e-9,
        format!("10 fields: sup|dev sym P|/sup|P| {worst_a:.1e}, Curl residual {worst_curl:.1e}"),
    );
}

#[test]
fn criterion_07_nullvector_construction() {
    let start = Instant::now();
    let grid = Grid::periodic(2, 256).unwrap();
    let dev_sym = parse_operator("dev_sym", 2).unwrap();
    let w = ComplexWitness {
        re_xi: vec![1.0, 0.0],
        im_xi: vec![0.0, 1.0],
        re_v: vec![1.0, 0.0],
        im_v: vec![0.0, -1.0],
    };
    let f = gen_mollified_log(grid, 0.3, 1.2).unwrap();
    let nf = gen_nullvector_field(&w, &f).unwrap();
    // α = det[Re ξ; Im ξ] for the (possibly rescaled) witness.
    let (rx, ix) = (&nf.witness.re_xi, &nf.witness.im_xi);
    let alpha = rx[0] * ix[1] - rx[1] * ix[0];
    let grad_sup = gradient(&f).unwrap().max_abs();
    let a_rel = nf.field.apply_part_map(&dev_sym).unwrap().max_abs() / grad_sup;
    // With ξ = (1, i) the map x ↦ x_ξ is the identity, so (Δf)(x_ξ) = Δf.
    let identity_map = rx == &[1.0, 0.0] && ix == &[0.0, 1.0];
    let lap = laplacian(&f).unwrap();
    let curl = curl_matrix_field(&nf.field).unwrap();
    let im_v = &nf.witness.im_v;
    let mut curl_res = 0.0f64;
    for row in 0..2 {
        for (c, l) in curl.component(row).iter().zip(lap.data()) {
            curl_res = curl_res.max((c + alpha * l * im_v[row]).abs());
        }
    }
    report(
        7,
        Duration::from_secs(10),
        start,
        identity_map && (alpha - nf.alpha).abs() < 1e-15 && a_rel <= 1e-12 && curl_res <= 1e-9,
        format!("α = {alpha}, sup|A[P]|/sup|∇f| {a_rel:.1e}, Curl residual {curl_res:.1e}"),
    );
}

#[test]
fn criterion_08_blowup_discrimination() {
    let start = Instant::now();
    // One geometry for both dimensions: 2R + ε₀ < L/2 keeps every member
    // away from its periodic images, and ε₀/2⁵ stays above the 3D spacing.
    let (big_r, eps0, steps) = (1.05, 1.0, 6);
    let settings = ProbeSettings {
        steps,
        eps0,
        fail_ratio: 3.0,
    };
    let geo = FamilyGeometry {
        grid: Grid::periodic(2, 512).unwrap(),
        big_r,
        eps0,
        truncate: false,
    };
    let probe = |op: &str| {
        let cfg = KmsConfig::critical(parse_operator(op, 2).unwrap(), 1.0);
        blowup_probe(&cfg, Family::MollifiedLog, &geo, &FamilyInputs::default(), settings).unwrap()
    };
    let dev_sym = probe("dev_sym");
    let sym = probe("sym");
    let grid3 = Grid::periodic(3, 256).unwrap();
    let (mut lap, mut grad) = (Vec::new(), Vec::new());
    for k in 0..steps {
        let b = gen_blowup3d(grid3, eps0 / 2f64.powi(k as i32), big_r).unwrap();
        lap.push(lp_norm(&b.laplacian, 1.0).unwrap());
        grad.push(lp_norm(&b.f, 1.5).unwrap());
    }
    let lap_factor = lap.iter().cloned().fold(0.0, f64::max) / lap.iter().cloned().fold(f64::INFINITY, f64::min);
    let grad_increasing = grad.windows(2).all(|w| w[1] > w[0]);
    let checks = [
        dev_sym.ratio >= 3.0 && dev_sym.slope > 0.0,
        sym.ratio <= 2.0,
        lap_factor <= 4.0,
        grad_increasing,
    ];
    report(
        8,
        Duration::from_secs(300),
        start,
        checks.iter().all(|&c| c),
        format!(
            "dev_sym ratio {:.3} (slope {:.4}, need >= 3) [{}]; sym ratio {:.3} [{}]; 3D ‖Δg‖₁ factor {:.2} [{}]; ‖∇g‖_3/2 {:?} increasing [{}]",
            dev_sym.ratio,
            dev_sym.slope,
            ok(checks[0]),
            sym.ratio,
            ok(checks[1]),
            lap_factor,
            ok(checks[2]),
            grad.iter().map(|g| (g * 1e3).round() / 1e3).collect::<Vec<_>>(),
            ok(checks[3])
        ),
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "not met"
    }
}

#[test]
fn criterion_09_factorization_drives_the_q1_prediction() {
    let start = Instant::now();
    let id = parse_operator("identity", 2).unwrap();
    let sym = parse_operator("sym", 2).unwrap();
    let f_id = factor_through(&induce_operator(&id), DEFAULT_TOL);
    let f_sym = factor_through(&induce_operator(&sym), DEFAULT_TOL);
    let verdict = |pm: &kms_core::PartMap| {
        let cfg = KmsConfig::subcritical(pm.clone(), 1.0, 1.0, 1.0);
        predict(&cfg, &classify(pm).summary).unwrap().verdict
    };
    let (v_id, v_sym) = (verdict(&id), verdict(&sym));
    report(
        9,
        Duration::from_secs(1),
        start,
        f_id.residual <= 1e-12 && f_sym.residual >= 0.1 && v_id == Verdict::Holds && v_sym == Verdict::Fails,
        format!(
            "identity residual {:.1e} -> {v_id:?}; sym residual {:.3} -> {v_sym:?}",
            f_id.residual, f_sym.residual
        ),
    );
}

#[test]
fn criterion_10_end_to_end_sweep() {
    let start = Instant::now();
    let settings = VerifySettings::default();
    let mut runs = 0;
    let mut bad = Vec::new();
    for n in [2, 3] {
        for name in catalogue_names() {
            let pm = parse_operator(name, n).unwrap();
            for cfg in standard_constellations(&pm) {
                runs += 1;
                match verify(&cfg, &settings) {
                    Ok(r) if r.verdict_consistent => {}
                    Ok(r) => bad.push(format!("{name} n={n} {:?} p={}: {:?}", cfg.mode, cfg.p, r.notes)),
                    Err(e) => bad.push(format!("{name} n={n} {:?} p={}: error {e}", cfg.mode, cfg.p)),
                }
            }
        }
    }
    report(
        10,
        Duration::from_secs(600),
        start,
        bad.is_empty(),
        format!("{runs} runs, inconsistent {bad:?}"),
    );
}
