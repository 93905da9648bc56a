use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::families::{member, Family, FamilyGeometry, FamilyInputs};
use super::{quotient, HarnessError, KmsConfig};

/// Default growth ratio above which a probe reports failure.
pub const DEFAULT_FAIL_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeVerdict {
    Fails,
    BoundedSoFar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupSeries {
    pub family: Family,
    pub epsilons: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Least-squares slope of the quotient against `log(1/ε)`.
    pub slope: f64,
    /// Last quotient over the first.
    pub ratio: f64,
    pub verdict: ProbeVerdict,
    /// Family diagnostics per step, e.g. `laplacian_l1`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub aux: BTreeMap<String, Vec<f64>>,
}

impl BlowupSeries {
    /// Strictly increasing quotients.
    pub fn monotone(&self) -> bool {
        self.quotients.windows(2).all(|w| w[1] > w[0])
    }

    pub fn aux_series(&self, name: &str) -> Option<&[f64]> {
        self.aux.get(name).map(Vec::as_slice)
    }

    /// `eps,quotient[,aux...]` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "eps,quotient")?;
        for (k, _) in &self.aux {
            write!(w, ",{k}")?;
        }
        writeln!(w)?;
        for (i, (e, q)) in self.epsilons.iter().zip(&self.quotients).enumerate() {
            write!(w, "{e},{q}")?;
            for (_, v) in &self.aux {
                write!(w, ",{}", v[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub steps: usize,
    pub eps0: f64,
    pub fail_ratio: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Evaluates the configuration's quotient along `ε_k = ε₀·2^{−k}`.
pub fn blowup_probe(
    cfg: &KmsConfig,
    family: Family,
    geo: &FamilyGeometry,
    inputs: &FamilyInputs,
    settings: ProbeSettings,
) -> Result<BlowupSeries, HarnessError> {
    cfg.validate()?;
    if !family.supports(cfg.n) || geo.grid.n != cfg.n {
        return Err(HarnessError::Family(format!(
            "family `{family}` is not available in {} dimensions",
            cfg.n
        )));
    }
    if settings.steps < 2 {
        return Err(HarnessError::Unsupported("a probe needs at least two steps".into()));
    }
    let mut epsilons = Vec::with_capacity(settings.steps);
    let mut quotients = Vec::with_capacity(settings.steps);
    let mut aux: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for k in 0..settings.steps {
        let eps = settings.eps0 / 2f64.powi(k as i32);
        let m = member(family, geo, inputs, eps)?;
        let q = quotient(&m.field, cfg)?;
        log::debug!("{family} eps = {eps:.4e}: quotient {:.6e}", q.value);
        for (name, v) in m.aux {
            aux.entry(name.to_string()).or_default().push(v);
        }
        epsilons.push(eps);
        quotients.push(q.value);
    }
    let logs: Vec<f64> = epsilons.iter().map(|e| (1.0 / e).ln()).collect();
    let slope = fit_slope(&logs, &quotients);
    let ratio = quotients[quotients.len() - 1] / quotients[0];
    let verdict = if ratio >= settings.fail_ratio && slope > 0.0 {
        ProbeVerdict::Fails
    } else {
        ProbeVerdict::BoundedSoFar
    };
    Ok(BlowupSeries {
        family,
        epsilons,
        quotients,
        slope,
        ratio,
        verdict,
        aux,
    })
}
