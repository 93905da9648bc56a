use serde::{Deserialize, Serialize};

use super::{HarnessError, KmsConfig, Mode};
use crate::algebra::{
    factor_through, induce_operator, is_c_elliptic, is_cancelling, is_elliptic, pure_tensor_span_dim,
    CEllipticityCertificate, EllipticityCertificate, PartMap, DEFAULT_TOL,
};

/// Everything [`predict`] needs to know about the part map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSummary {
    pub elliptic: bool,
    pub c_elliptic: bool,
    pub cancelling: bool,
    pub span_dim: usize,
    pub factors: bool,
    pub factor_residual: f64,
    /// Set when the ℂ-ellipticity verdict comes from random sampling.
    pub heuristic: bool,
}

/// Summary plus the certificates, which carry the witnesses.
#[derive(Debug, Clone)]
pub struct Classification {
    pub summary: AlgebraSummary,
    pub ellipticity: EllipticityCertificate,
    pub c_ellipticity: CEllipticityCertificate,
}

pub fn classify(part_map: &PartMap) -> Classification {
    let op = induce_operator(part_map);
    let ellipticity = is_elliptic(&op, DEFAULT_TOL);
    let c_ellipticity = is_c_elliptic(&op, DEFAULT_TOL);
    let factor = factor_through(&op, DEFAULT_TOL);
    let summary = AlgebraSummary {
        elliptic: ellipticity.is_elliptic(),
        c_elliptic: c_ellipticity.is_c_elliptic(),
        cancelling: is_cancelling(&op, DEFAULT_TOL),
        span_dim: pure_tensor_span_dim(&op),
        factors: factor.exists(),
        factor_residual: factor.residual,
        heuristic: c_ellipticity.heuristic,
    };
    Classification {
        summary,
        ellipticity,
        c_ellipticity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
}

/// Which condition decides a constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Ellipticity,
    CEllipticity,
    Factorization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub verdict: Verdict,
    pub criterion: Criterion,
    pub reason: String,
}

/// The decision table.
///
/// | mode | constellation | holds iff |
/// |---|---|---|
/// | critical | `n ≥ 3`, `1 ≤ p < n` | elliptic |
/// | critical | `n = 2`, `1 < p < 2` | elliptic |
/// | critical | `n = 2`, `p = 1` | ℂ-elliptic |
/// | subcritical | `q = 1` | `𝔼ᵢ = L∘𝔸ᵢ` for some linear `L` |
/// | subcritical | `1 < q < p*` | elliptic |
pub fn predict(cfg: &KmsConfig, alg: &AlgebraSummary) -> Result<Prediction, HarnessError> {
    cfg.validate()?;
    let label = cfg.part_map.label();
    let (criterion, holds, row) = match cfg.mode {
        Mode::Critical if cfg.n == 2 && cfg.p == 1.0 => (
            Criterion::CEllipticity,
            alg.c_elliptic,
            "critical, n = 2, p = 1: holds exactly when the induced operator is C-elliptic",
        ),
        Mode::Critical if cfg.n == 2 => (
            Criterion::Ellipticity,
            alg.elliptic,
            "critical, n = 2, 1 < p < 2: holds exactly when the induced operator is elliptic",
        ),
        Mode::Critical => (
            Criterion::Ellipticity,
            alg.elliptic,
            "critical, n >= 3, 1 <= p < n: holds exactly when the induced operator is elliptic",
        ),
        Mode::Subcritical { .. } if cfg.q == 1.0 => (
            Criterion::Factorization,
            alg.factors,
            "subcritical, q = 1: holds exactly when every partial derivative factors as E_i = L o A_i",
        ),
        Mode::Subcritical { .. } => (
            Criterion::Ellipticity,
            alg.elliptic,
            "subcritical, 1 < q < p*: holds exactly when the induced operator is elliptic",
        ),
    };
    let status = match criterion {
        Criterion::Ellipticity => if alg.elliptic { "elliptic" } else { "not elliptic" },
        Criterion::CEllipticity => {
            if alg.c_elliptic {
                "C-elliptic"
            } else if alg.elliptic {
                "elliptic but not C-elliptic"
            } else {
                "not elliptic"
            }
        }
        Criterion::Factorization => if alg.factors { "factorization exists" } else { "no factorization" },
    };
    Ok(Prediction {
        verdict: if holds { Verdict::Holds } else { Verdict::Fails },
        criterion,
        reason: format!("{row}; `{label}` is {status}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;

    fn verdict(name: &str, n: usize, cfg: impl Fn(PartMap) -> KmsConfig) -> Verdict {
        let pm = parse_operator(name, n).unwrap();
        let alg = classify(&pm).summary;
        predict(&cfg(pm), &alg).unwrap().verdict
    }

    #[test]
    fn truth_table() {
        use Verdict::*;
        let crit = |p| move |pm| KmsConfig::critical(pm, p);
        let sub = |p, q| move |pm| KmsConfig::subcritical(pm, p, q, 1.0);
        assert_eq!(verdict("sym", 2, crit(1.0)), Holds);
        assert_eq!(verdict("dev_sym", 2, crit(1.0)), Fails);
        assert_eq!(verdict("dev_sym", 2, crit(1.5)), Holds);
        assert_eq!(verdict("skew_plus_trace", 2, crit(1.0)), Fails);
        assert_eq!(verdict("skew_plus_trace", 3, crit(1.0)), Holds);
        assert_eq!(verdict("skew", 2, crit(1.5)), Fails);
        assert_eq!(verdict("skew", 3, crit(1.0)), Fails);
        assert_eq!(verdict("identity", 2, sub(1.0, 1.0)), Holds);
        assert_eq!(verdict("sym", 2, sub(1.0, 1.0)), Fails);
        assert_eq!(verdict("sym", 2, sub(1.0, 1.5)), Holds);
        assert_eq!(verdict("trace", 2, sub(2.0, 3.0)), Fails);
    }

    #[test]
    fn unsupported_constellations() {
        let pm = parse_operator("sym", 2).unwrap();
        let alg = classify(&pm).summary;
        assert!(matches!(
            predict(&KmsConfig::critical(pm, 2.5), &alg),
            Err(HarnessError::Unsupported(_))
        ));
    }
}
