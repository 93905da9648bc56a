//! Built-in part maps `ℝ^{n×n} → ℝ^{n×n}`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{AlgebraError, PartMap};

/// A catalogue entry, possibly carrying parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSpec {
    Grad,
    DevGrad,
    Sym,
    DevSym,
    Skew,
    Trace,
    SkewPlusTrace { mu_c: f64, kappa: f64 },
    Identity,
    Dev,
    Zero,
}

/// Names accepted by [`catalogue`]; `skew_plus_trace` defaults to `μ_c = κ = 1`.
pub fn catalogue_names() -> &'static [&'static str] {
    &[
        "grad",
        "dev_grad",
        "sym",
        "dev_sym",
        "skew",
        "trace",
        "skew_plus_trace",
        "identity",
        "dev",
        "zero",
    ]
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Grad => f.write_str("grad"),
            Self::DevGrad => f.write_str("dev_grad"),
            Self::Sym => f.write_str("sym"),
            Self::DevSym => f.write_str("dev_sym"),
            Self::Skew => f.write_str("skew"),
            Self::Trace => f.write_str("trace"),
            Self::SkewPlusTrace { mu_c, kappa } => write!(f, "skew_plus_trace({mu_c},{kappa})"),
            Self::Identity => f.write_str("identity"),
            Self::Dev => f.write_str("dev"),
            Self::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = AlgebraError;

    /// Accepts a bare name or `skew_plus_trace(mu_c,kappa)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(args) = s
            .strip_prefix("skew_plus_trace(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            let parse = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| AlgebraError::InvalidParameter(format!("not a number: `{t}`")))
            };
            if parts.len() != 2 {
                return Err(AlgebraError::InvalidParameter(
                    "skew_plus_trace takes two parameters (mu_c, kappa)".into(),
                ));
            }
            return Ok(Self::SkewPlusTrace {
                mu_c: parse(parts[0])?,
                kappa: parse(parts[1])?,
            });
        }
        Ok(match s {
            "grad" => Self::Grad,
            "dev_grad" => Self::DevGrad,
            "sym" => Self::Sym,
            "dev_sym" => Self::DevSym,
            "skew" => Self::Skew,
            "trace" => Self::Trace,
            "skew_plus_trace" => Self::SkewPlusTrace { mu_c: 1.0, kappa: 1.0 },
            "identity" => Self::Identity,
            "dev" => Self::Dev,
            "zero" => Self::Zero,
            other => return Err(AlgebraError::UnknownOperator(other.to_string())),
        })
    }
}

/// Parses `name` and builds the part map in dimension `n`.
pub fn parse_operator(name: &str, n: usize) -> Result<PartMap, AlgebraError> {
    catalogue(name.parse()?, n)
}

fn tr(x: &DMatrix<f64>) -> f64 {
    x.trace()
}

fn sym(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

fn skew(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x - x.transpose()) * 0.5
}

fn dev(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    x - DMatrix::identity(n, n) * (tr(x) / n as f64)
}

fn spherical(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::identity(n, n) * (tr(x) / n as f64)
}

/// Returns the catalogue part map on `n×n` matrices.
///
/// `trace` is the spherical part `(tr P / n)·𝟙`, so that `skew_plus_trace`
/// equals `μ_c·skew + κ·trace`. `grad`/`identity` and `dev_grad`/`dev`
/// coincide as maps and differ only in their label.
pub fn catalogue(spec: OperatorSpec, n: usize) -> Result<PartMap, AlgebraError> {
    if n < 2 {
        return Err(AlgebraError::InvalidParameter(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let name = spec.to_string();
    let map = match spec {
        OperatorSpec::Grad | OperatorSpec::Identity => PartMap::from_fn(n, n, &name, |x| x.clone()),
        OperatorSpec::DevGrad | OperatorSpec::Dev => PartMap::from_fn(n, n, &name, dev),
        OperatorSpec::Sym => PartMap::from_fn(n, n, &name, sym),
        OperatorSpec::DevSym => PartMap::from_fn(n, n, &name, |x| dev(&sym(x))),
        OperatorSpec::Skew => PartMap::from_fn(n, n, &name, skew),
        OperatorSpec::Trace => PartMap::from_fn(n, n, &name, spherical),
        OperatorSpec::SkewPlusTrace { mu_c, kappa } => {
            if mu_c == 0.0 || kappa == 0.0 || !mu_c.is_finite() || !kappa.is_finite() {
                return Err(AlgebraError::InvalidParameter(
                    "skew_plus_trace needs finite, non-zero mu_c and kappa".into(),
                ));
            }
            PartMap::from_fn(n, n, &name, |x| skew(x) * mu_c + spherical(x) * kappa)
        }
        OperatorSpec::Zero => PartMap::from_fn(n, n, &name, |x| x * 0.0),
    };
    Ok(map)
}
