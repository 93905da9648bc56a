use std::path::Path;
use std::process::{Command, Output};

use kms_core::spectral::io::read_field;
use serde_json::Value;

fn kms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kms"))
        .args(args)
        .env_remove("KMS_GRID_MAX")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn classify_reports_the_known_verdicts() {
    let out = kms(&["classify", "--op", "dev_sym", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["elliptic"], true);
    assert_eq!(v["c_elliptic"], false);
    assert_eq!(v["span_dim"], 2);
    let v = json(&kms(&["classify", "--op", "sym", "--n", "2"]));
    assert_eq!((v["elliptic"].as_bool(), v["c_elliptic"].as_bool(), v["span_dim"].as_u64()), (Some(true), Some(true), Some(3)));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(code(&kms(&["classify", "--op", "nosuch", "--n", "2"])), 2);
    assert_eq!(code(&kms(&["verify", "--op", "sym", "--n", "2", "--p", "2.5"])), 2);
    assert_eq!(code(&kms(&["verify", "--op", "sym", "--n", "2"])), 2);
    assert_eq!(code(&kms(&["acp", "--op", "sym", "--n", "3"])), 2);
    assert_eq!(code(&kms(&["probe", "--family", "nope", "--op", "sym", "--p", "1"])), 2);
    let out = kms(&["acp", "--op", "dev_sym", "--n", "2"]);
    assert_eq!(code(&out), 2);
    assert!(json(&out)["error"].as_str().unwrap().contains("not C-elliptic"));
}

#[test]
fn acp_matrices() {
    let v = json(&kms(&["acp", "--op", "sym", "--n", "2"]));
    let g: Vec<Vec<f64>> = serde_json::from_value(v["G"].clone()).unwrap();
    let s = g[1][0];
    assert!(s.abs() > 1e-8);
    assert!(g[0][0].abs() < 1e-12 && g[1][1].abs() < 1e-12 && (g[0][1] + s).abs() < 1e-12);
    assert!(v["sample_residual"].as_f64().unwrap() < 1e-10);
    let v = json(&kms(&["acp", "--op", "grad", "--n", "2"]));
    let g: Vec<Vec<f64>> = serde_json::from_value(v["G"].clone()).unwrap();
    assert_eq!(g, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(v["gamma"], serde_json::json!([1.0, 1.0, 1.0, 1.0]));
}

#[test]
fn verify_dev_sym_is_consistent() {
    let out = kms(&["verify", "--op", "dev_sym", "--n", "2", "--p", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["prediction"]["verdict"], "Fails");
    assert_eq!(v["verdict_consistent"], true);
}

#[test]
fn verify_sym_in_three_dimensions_holds() {
    let out = kms(&["verify", "--op", "sym", "--n", "3", "--p", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["prediction"]["verdict"], "Holds");
    assert!(v["quotients"].as_array().unwrap().iter().all(|q| q["value"].is_number()));
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--op", "skew", "--n", "2", "--p", "1.5", "--grid", "64", "--estimate-iters", "2"];
    let a = kms(&args);
    let b = kms(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn catalog_lists_operators() {
    let v = json(&kms(&["catalog", "--n", "2"]));
    let ops = v["operators"].as_array().unwrap();
    assert!(ops.len() >= 8);
    let find = |name: &str| ops.iter().find(|o| o["name"] == name).unwrap();
    assert_eq!(find("dev_sym")["c_elliptic"], false);
    assert_eq!(find("sym")["span_dim"], 3);
    assert_eq!(find("skew")["elliptic"], false);
}

#[test]
fn probe_emits_one_row_per_step() {
    let out = kms(&["probe", "--family", "mollified-log", "--op", "dev_sym", "--p", "1", "--steps", "6"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,quotient"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| (w[1][0] - w[0][0] / 2.0).abs() < 1e-15));
}

#[test]
fn field_dump_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.kmsfield");
    let out = kms(&["field-dump", "--gen", "example12", "--grid", "128", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let f = read_field(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(f.grid().size, 128);
    assert_eq!(f.max_abs(), v["max_abs"].as_f64().unwrap());
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.cfg");
    std::fs::write(&cfg, "# defaults\ntrials = 2\ngrid = 64\nseed = 5\n").unwrap();
    let out_path = dir.path().join("r.json");
    let out = kms(&[
        "verify", "--op", "sym", "--n", "2", "--p", "1", "--trials", "1",
        "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    // the command line wins over the file
    assert_eq!(v["quotients"].as_array().unwrap().len(), 1);
    assert_eq!(v["grid"]["N"], 64);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(code(&kms(&["catalog", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn matrix_files_and_grid_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    // trace part only: 𝒜[X] = tr X
    std::fs::write(&path, r#"{"m":2,"n":2,"N":1,"matrix":[[1,0,0,1]]}"#).unwrap();
    let v = json(&kms(&["classify", "--matrix", path.to_str().unwrap()]));
    assert_eq!(v["elliptic"], false);
    assert_eq!(code(&kms(&["classify", "--matrix", path.to_str().unwrap(), "--n", "3"])), 2);
    assert_eq!(code(&kms(&["classify", "--matrix", Path::new("/nonexistent").to_str().unwrap()])), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_kms"))
        .args(["verify", "--op", "sym", "--n", "2", "--p", "1"])
        .env("KMS_GRID_MAX", "1000")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
