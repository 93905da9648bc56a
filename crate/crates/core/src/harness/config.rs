use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algebra::PartMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// Whole-space inequality with `q = p* = np/(n−p)`.
    Critical,
    /// Ball inequality on `B_r` with `q < p*`.
    Subcritical { r: f64 },
}

/// Exponents and part map of one inequality.
///
/// Configurations are built unchecked so that unsupported constellations can
/// still be reported; [`KmsConfig::validate`] states what is wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsConfig {
    pub part_map: PartMap,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub mode: Mode,
}

/// Sobolev conjugate `np/(n−p)`; infinite for `p ≥ n`.
pub fn sobolev_conjugate(p: f64, n: usize) -> f64 {
    let n = n as f64;
    if p >= n {
        f64::INFINITY
    } else {
        n * p / (n - p)
    }
}

impl KmsConfig {
    pub fn critical(part_map: PartMap, p: f64) -> Self {
        let n = part_map.n();
        Self {
            q: sobolev_conjugate(p, n),
            part_map,
            p,
            n,
            mode: Mode::Critical,
        }
    }

    pub fn subcritical(part_map: PartMap, p: f64, q: f64, r: f64) -> Self {
        let n = part_map.n();
        Self {
            part_map,
            p,
            q,
            n,
            mode: Mode::Subcritical { r },
        }
    }

    pub fn p_star(&self) -> f64 {
        sobolev_conjugate(self.p, self.n)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let unsupported = |m: String| Err(HarnessError::Unsupported(m));
        if self.part_map.m() != self.n {
            return unsupported(format!(
                "part map acts on {}x{} matrices but n = {}",
                self.part_map.m(),
                self.part_map.n(),
                self.n
            ));
        }
        if self.n < 2 {
            return unsupported("dimension must be at least 2".into());
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return unsupported(format!("p must be finite and >= 1, got {}", self.p));
        }
        match self.mode {
            Mode::Critical => {
                if self.p >= self.n as f64 {
                    return unsupported(format!(
                        "critical mode needs p < n (p = {}, n = {})",
                        self.p, self.n
                    ));
                }
                if (self.q - self.p_star()).abs() > 1e-12 * self.p_star() {
                    return unsupported(format!("critical mode needs q = p* = {}", self.p_star()));
                }
            }
            Mode::Subcritical { r } => {
                if !(r > 0.0 && r.is_finite()) {
                    return unsupported(format!("ball radius must be positive, got {r}"));
                }
                if !(self.q >= 1.0 && self.q < self.p_star()) {
                    return unsupported(format!(
                        "subcritical mode needs 1 <= q < p* = {} (q = {})",
                        self.p_star(),
                        self.q
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;

    #[test]
    fn conjugates() {
        assert_eq!(sobolev_conjugate(1.0, 2), 2.0);
        assert_eq!(sobolev_conjugate(1.0, 3), 1.5);
        assert!(sobolev_conjugate(2.0, 2).is_infinite());
    }

    #[test]
    fn validation() {
        let sym2 = parse_operator("sym", 2).unwrap();
        assert!(KmsConfig::critical(sym2.clone(), 1.0).validate().is_ok());
        assert!(KmsConfig::critical(sym2.clone(), 2.5).validate().is_err());
        assert!(KmsConfig::subcritical(sym2.clone(), 2.0, 2.0, 1.0).validate().is_ok());
        assert!(KmsConfig::subcritical(sym2.clone(), 1.0, 2.0, 1.0).validate().is_err());
        assert!(KmsConfig::subcritical(sym2, 1.0, 1.0, 0.0).validate().is_err());
    }
}
