//! `kms`: classify part maps, build almost complementary parts and test
//! Korn–Maxwell–Sobolev inequalities numerically.
//!
//! Every run writes one JSON document to stdout (or `--out`); `probe`
//! writes CSV unless `--format json`. Logs go to stderr.
//!
//! Exit codes: 0 success, 2 bad arguments or unsupported constellation,
//! 3 prediction contradicted by the numerical evidence, 1 internal error.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use kms_core::algebra::{
    almost_complementary, catalogue_names, factor_through, induce_operator, is_c_elliptic, is_cancelling,
    is_elliptic, parse_operator, pure_tensor_span_dim, AlgebraError, PartMap, DEFAULT_TOL,
};
use kms_core::harness::{
    blowup_probe, classify, default_grid_size, family_geometry, predict, probe_eps0, standard_constellations,
    verify, Family, FamilyInputs, HarnessError, KmsConfig, ProbeSettings, VerifySettings,
    DEFAULT_FAIL_RATIO,
};
use kms_core::spectral::io::write_field;
use kms_core::spectral::{
    gen_blowup3d, gen_example12_field, gen_mollified_log, gen_nullvector_field, random_field_seeded, Grid,
    PeriodicField, RandomFieldSpec, Shape, SpectralError, DEFAULT_MAX_POINTS,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "kms", version, about = "Korn–Maxwell–Sobolev inequalities: classification and numerical probes")]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file with flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Clone)]
struct OperatorArgs {
    /// Catalogue name, e.g. `sym`, `dev_sym`, `skew_plus_trace(1,2)`.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    op: Option<String>,
    /// JSON part-map file `{m, n, N, matrix: [[...]], name}`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Dimension.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(clap::Args, Clone)]
struct ConstellationArgs {
    #[arg(long)]
    p: f64,
    /// Left-hand exponent on a ball; requires `--r`.
    #[arg(long, requires = "r")]
    q: Option<f64>,
    /// Ball radius; switches to the subcritical inequality.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ellipticity, C-ellipticity, cancellation and factorization.
    Classify {
        #[command(flatten)]
        operator: OperatorArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Almost complementary part `X = 𝓛(𝒜[X]) + γ(X)𝔊` (2x2 only).
    Acp {
        #[command(flatten)]
        operator: OperatorArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Random matrices for the residual check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prediction plus numerical evidence for one constellation.
    Verify {
        #[command(flatten)]
        operator: OperatorArgs,
        #[command(flatten)]
        constellation: ConstellationArgs,
        /// Points per axis of the family grid.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_FAIL_RATIO)]
        fail_ratio: f64,
        /// Ascent iterations for a constant estimate (0 = skip).
        #[arg(long, default_value_t = 0)]
        estimate_iters: usize,
    },
    /// Runs one blow-up family and reports `(ε, quotient)`.
    Probe {
        #[arg(long)]
        family: Family,
        #[command(flatten)]
        operator: OperatorArgs,
        #[command(flatten)]
        constellation: ConstellationArgs,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long)]
        eps0: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_FAIL_RATIO)]
        fail_ratio: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Built-in operators with their classification and predictions.
    Catalog {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Writes a generated field as a KMSFIELD file.
    FieldDump {
        #[arg(long, value_enum)]
        gen: Generator,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Dimension for `random`.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long, default_value_t = 1.2)]
        big_r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Operator whose complex nullvector drives `nullvector`.
        #[arg(long, default_value = "dev_sym")]
        op: String,
        /// Field file; defaults to `<gen>.kmsfield`.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    MollifiedLog,
    Example12,
    Blowup3d,
    Nullvector,
    Random,
}

impl Generator {
    fn name(self) -> &'static str {
        match self {
            Generator::MollifiedLog => "mollified-log",
            Generator::Example12 => "example12",
            Generator::Blowup3d => "blowup3d",
            Generator::Nullvector => "nullvector",
            Generator::Random => "random",
        }
    }
}

/// Error classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Internal(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        if is_usage(&e) {
            Failure::Usage(e)
        } else {
            Failure::Internal(e)
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    if let Some(h) = e.downcast_ref::<HarnessError>() {
        return matches!(
            h,
            HarnessError::Unsupported(_)
                | HarnessError::Family(_)
                | HarnessError::FieldMismatch(_)
                | HarnessError::Algebra(_)
                | HarnessError::Spectral(SpectralError::InvalidGrid(_) | SpectralError::InvalidParameter(_))
        );
    }
    if let Some(s) = e.downcast_ref::<SpectralError>() {
        return matches!(s, SpectralError::InvalidGrid(_) | SpectralError::InvalidParameter(_));
    }
    e.downcast_ref::<AlgebraError>().is_some() || e.downcast_ref::<UsageError>().is_some()
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(UsageError(msg.into()).into())
}

type Out<T> = Result<T, Failure>;

/// Upper bound on grid points, from `KMS_GRID_MAX`.
fn max_points() -> Out<usize> {
    match std::env::var("KMS_GRID_MAX") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("KMS_GRID_MAX must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_POINTS),
    }
}

fn part_map(args: &OperatorArgs) -> Out<PartMap> {
    match (&args.op, &args.matrix) {
        (Some(name), None) => Ok(parse_operator(name, args.n.unwrap_or(2))?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let pm: PartMap = serde_json::from_str(&text)
                .map_err(|e| usage(format!("bad part-map file {}: {e}", path.display())))?;
            if pm.m() != pm.n() {
                return Err(usage("part maps must act on square matrices"));
            }
            if let Some(n) = args.n.filter(|&n| n != pm.n()) {
                return Err(usage(format!("--n {n} does not match the {}x{} part map", pm.m(), pm.n())));
            }
            Ok(pm)
        }
        _ => Err(usage("give exactly one of --op and --matrix")),
    }
}

fn constellation(pm: PartMap, c: &ConstellationArgs) -> Out<KmsConfig> {
    let cfg = match c.r {
        Some(r) => KmsConfig::subcritical(pm, c.p, c.q.unwrap_or(c.p), r),
        None => KmsConfig::critical(pm, c.p),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// What a subcommand produced.
enum Output {
    Json(Value),
    Text(String),
}

fn run(cli: &Cli) -> Out<(Output, u8)> {
    match &cli.command {
        Cmd::Classify { operator, tol } => {
            let pm = part_map(operator)?;
            let op = induce_operator(&pm);
            let ell = is_elliptic(&op, *tol);
            let cell = is_c_elliptic(&op, *tol);
            let fac = factor_through(&op, *tol);
            Ok((
                Output::Json(json!({
                    "operator": pm.label(),
                    "n": pm.n(),
                    "elliptic": ell.is_elliptic(),
                    "c_elliptic": cell.is_c_elliptic(),
                    "cancelling": is_cancelling(&op, *tol),
                    "span_dim": pure_tensor_span_dim(&op),
                    "factors": fac.exists(),
                    "heuristic": cell.heuristic,
                    "ellipticity": ell,
                    "c_ellipticity": cell,
                    "factorization": {
                        "residual": fac.residual,
                        "tolerance": fac.tolerance,
                        "map": fac.map.as_ref().map(rows),
                    },
                })),
                0,
            ))
        }
        Cmd::Acp {
            operator,
            tol,
            samples,
            seed,
        } => {
            let pm = part_map(operator)?;
            let op = induce_operator(&pm);
            let acp = almost_complementary(&op, *tol)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let sample_residual = (0..*samples)
                .map(|_| acp.residual(&op, &DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0))))
                .fold(0.0, f64::max);
            Ok((
                Output::Json(json!({
                    "operator": pm.label(),
                    "span_dim": acp.span_dim,
                    "G": rows(&acp.g),
                    "det_G": acp.det_g(),
                    "L": rows(&acp.l),
                    "gamma": acp.gamma,
                    "dependent_index": acp.dependent_index,
                    "verification_residual": acp.verification_residual,
                    "samples": samples,
                    "sample_residual": sample_residual,
                })),
                0,
            ))
        }
        Cmd::Verify {
            operator,
            constellation: c,
            grid,
            trials,
            seed,
            steps,
            fail_ratio,
            estimate_iters,
        } => {
            let cfg = constellation(part_map(operator)?, c)?;
            let settings = VerifySettings {
                trials: *trials,
                seed: *seed,
                grid_size: *grid,
                max_points: max_points()?,
                steps: *steps,
                fail_ratio: *fail_ratio,
                estimate_iters: *estimate_iters,
            };
            let report = verify(&cfg, &settings)?;
            let code = if report.verdict_consistent { 0 } else { 3 };
            if code == 3 {
                log::error!("prediction contradicted by the evidence: {:?}", report.notes);
            }
            Ok((Output::Json(serde_json::to_value(&report).context("serializing report")?), code))
        }
        Cmd::Probe {
            family,
            operator,
            constellation: c,
            grid,
            steps,
            eps0,
            fail_ratio,
            format,
        } => {
            let mut operator = operator.clone();
            if operator.n.is_none() && *family == Family::Blowup3d {
                operator.n = Some(3);
            }
            let cfg = constellation(part_map(&operator)?, c)?;
            let cls = classify(&cfg.part_map);
            let verdict = predict(&cfg, &cls.summary)?.verdict;
            let size = grid.unwrap_or_else(|| default_grid_size(cfg.n, verdict));
            let geo = family_geometry(&cfg, size)?;
            if geo.grid.points() > max_points()? {
                return Err(usage(format!("{size}^{} points exceed the grid budget", cfg.n)));
            }
            let inputs = FamilyInputs {
                complex_witness: cls.c_ellipticity.nullvector_witness.clone(),
                real_witness: cls.ellipticity.witness.clone(),
            };
            let settings = ProbeSettings {
                steps: *steps,
                eps0: eps0.unwrap_or_else(|| probe_eps0(*family, &geo, *steps)),
                fail_ratio: *fail_ratio,
            };
            let series = blowup_probe(&cfg, *family, &geo, &inputs, settings)?;
            let out = match format {
                Format::Json => Output::Json(serde_json::to_value(&series).context("serializing series")?),
                Format::Csv => {
                    let mut buf = Vec::new();
                    series.write_csv(&mut buf).context("writing CSV")?;
                    Output::Text(String::from_utf8(buf).context("CSV is UTF-8")?)
                }
            };
            Ok((out, 0))
        }
        Cmd::Catalog { n } => {
            let mut entries = Vec::new();
            for name in catalogue_names() {
                let pm = parse_operator(name, *n)?;
                let s = classify(&pm).summary;
                let predictions = standard_constellations(&pm)
                    .iter()
                    .map(|cfg| {
                        let p = predict(cfg, &s)?;
                        Ok(json!({
                            "mode": cfg.mode,
                            "p": cfg.p,
                            "q": cfg.q,
                            "verdict": p.verdict,
                            "criterion": p.criterion,
                        }))
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                entries.push(json!({
                    "name": name,
                    "elliptic": s.elliptic,
                    "c_elliptic": s.c_elliptic,
                    "cancelling": s.cancelling,
                    "span_dim": s.span_dim,
                    "factors": s.factors,
                    "predictions": predictions,
                }));
            }
            Ok((Output::Json(json!({ "n": n, "operators": entries })), 0))
        }
        Cmd::FieldDump {
            gen,
            grid,
            n,
            eps,
            big_r,
            seed,
            op,
            file,
        } => {
            let dim = match gen {
                Generator::Blowup3d => 3,
                Generator::Random => *n,
                _ => 2,
            };
            let g = Grid::with_budget(dim, *grid, std::f64::consts::TAU, max_points()?)?;
            let field: PeriodicField = match gen {
                Generator::MollifiedLog => gen_mollified_log(g, *eps, *big_r)?,
                Generator::Example12 => gen_example12_field(&gen_mollified_log(g, *eps, *big_r)?)?,
                Generator::Blowup3d => gen_blowup3d(g, *eps, *big_r)?.f,
                Generator::Nullvector => {
                    let pm = parse_operator(op, 2)?;
                    let w = classify(&pm)
                        .c_ellipticity
                        .nullvector_witness
                        .ok_or_else(|| usage(format!("`{op}` is C-elliptic; it has no complex nullvector")))?;
                    gen_nullvector_field(&w, &gen_mollified_log(g, *eps, *big_r)?)?.field
                }
                Generator::Random => random_field_seeded(
                    g,
                    Shape::Matrix(dim, dim),
                    RandomFieldSpec {
                        kmax: (grid / 8).clamp(1, 6),
                        ..Default::default()
                    },
                    *seed,
                )?,
            };
            let path = file.clone().unwrap_or_else(|| PathBuf::from(format!("{}.kmsfield", gen.name())));
            let f = File::create(&path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write_field(&mut w, &field)?;
            w.flush().context("flushing field file")?;
            Ok((
                Output::Json(json!({
                    "generator": gen.name(),
                    "path": path,
                    "grid": g,
                    "shape": field.shape().to_string(),
                    "max_abs": field.max_abs(),
                })),
                0,
            ))
        }
    }
}

fn emit(out: Option<&PathBuf>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(body.as_bytes())?;
            s.flush()?;
            Ok(())
        }
    }
}

fn render(out: &Output) -> anyhow::Result<String> {
    Ok(match out {
        Output::Json(v) => serde_json::to_string_pretty(v)? + "\n",
        Output::Text(t) => t.clone(),
    })
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    cmd.build();
    let args = match config::expand(std::env::args_os().collect(), &cmd) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    let (code, body) = match run(&cli) {
        Ok((out, code)) => match render(&out) {
            Ok(b) => (code, b),
            Err(e) => (1, error_doc(&e, 1)),
        },
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            (2, error_doc(&e, 2))
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            (1, error_doc(&e, 1))
        }
    };
    if let Err(e) = emit(cli.out.as_ref(), &body) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn error_doc(e: &anyhow::Error, code: u8) -> String {
    let v = json!({ "error": format!("{e:#}"), "exit_code": code });
    serde_json::to_string_pretty(&v).expect("plain JSON") + "\n"
}

