//! Almost complementary part of a ℂ-elliptic part map in two dimensions.
//!
//! For every ℂ-elliptic `𝒜: ℝ^{2×2} → ℝ^N` there are a linear `𝓛: ℝ^N → ℝ^{2×2}`,
//! an invertible `𝔊` and a functional `γ` with `X − 𝓛(𝒜[X]) = γ(X)·𝔊`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{pinv, RANK_RTOL};
use super::operator::DiffOperator;
use super::{is_c_elliptic, AlgebraError};

/// Order in which the dependent pure tensor is looked for; `(2,1)` first,
/// the remaining indices lexicographically. Zero-based.
const CANDIDATES: [(usize, usize); 4] = [(1, 0), (0, 0), (0, 1), (1, 1)];

const VERIFY_SAMPLES: usize = 100;
const VERIFY_TOL: f64 = 1e-9;

/// `𝒜[e_{i₀j₀}] = Σ a_ij 𝒜[e_ij]` over the other three indices (zero-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentIndex {
    pub i0: usize,
    pub j0: usize,
    /// `(i, j, a_ij)` for the three remaining index pairs.
    pub coeffs: Vec<(usize, usize, f64)>,
    /// Relative least-squares residual of the dependency.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcpDecomposition {
    /// `𝓛` as a `4×N` matrix producing row-major flattened `2×2` matrices.
    pub l: DMatrix<f64>,
    pub g: DMatrix<f64>,
    /// `γ` as coefficients on the row-major flattening of `X`.
    pub gamma: [f64; 4],
    pub dependent_index: Option<DependentIndex>,
    pub span_dim: usize,
    /// Largest relative residual seen in the internal verification.
    pub verification_residual: f64,
}

fn flat(x: &DMatrix<f64>) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_fn(4, |k, _| x[(k / 2, k % 2)])
}

fn elementary(i: usize, j: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(2, 2);
    e[(i, j)] = 1.0;
    e
}

impl AcpDecomposition {
    pub fn gamma_of(&self, x: &DMatrix<f64>) -> f64 {
        flat(x).iter().zip(&self.gamma).map(|(a, b)| a * b).sum()
    }

    /// `𝓛(y)` reshaped to `2×2`.
    pub fn apply_l(&self, y: &nalgebra::DVector<f64>) -> DMatrix<f64> {
        let v = &self.l * y;
        DMatrix::from_fn(2, 2, |i, j| v[2 * i + j])
    }

    /// `‖X − 𝓛(𝒜[X]) − γ(X)𝔊‖_F` for a given part map.
    pub fn residual(&self, op: &DiffOperator, x: &DMatrix<f64>) -> f64 {
        let ax = op.source.apply(x);
        (x - self.apply_l(&ax) - &self.g * self.gamma_of(x)).norm()
    }

    pub fn det_g(&self) -> f64 {
        self.g.determinant()
    }
}

/// Builds the decomposition following the two-case construction.
///
/// * span dimension 4: `𝔊 = 𝟙`, `𝓛(𝒜[e_ij]) = e_ij − 𝔊`, `γ(X) = Σ x_ij`.
/// * span dimension 3: one pure tensor `𝒜[e_{i₀j₀}]` depends on the others
///   with coefficients `a_ij`; then `𝔊 = e_{i₀j₀} − Σ a_ij e_ij` lies in the
///   kernel of `𝒜`, `𝓛` inverts `𝒜` on the remaining three pure tensors and
///   vanishes on their orthogonal complement, and `γ(X) = x_{i₀j₀}`.
pub fn almost_complementary(op: &DiffOperator, tol: f64) -> Result<AcpDecomposition, AlgebraError> {
    if op.n() != 2 || op.m() != 2 {
        return Err(AlgebraError::Unsupported(
            "almost complementary parts are constructed for 2x2 matrices only".into(),
        ));
    }
    let cert = is_c_elliptic(op, tol);
    if !cert.is_c_elliptic() {
        return Err(AlgebraError::NotCElliptic {
            span_dim: cert.span_dim,
        });
    }
    let a = op.source.matrix();
    let col = |i: usize, j: usize| a.column(2 * i + j).into_owned();

    let dec = match cert.span_dim {
        4 => {
            let g = DMatrix::identity(2, 2);
            let targets = DMatrix::from_fn(4, 4, |r, c| {
                let (i, j) = (c / 2, c % 2);
                (elementary(i, j) - &g)[(r / 2, r % 2)]
            });
            AcpDecomposition {
                l: targets * pinv(a, RANK_RTOL),
                g,
                gamma: [1.0; 4],
                dependent_index: None,
                span_dim: 4,
                verification_residual: 0.0,
            }
        }
        3 => {
            let dep = find_dependency(a, tol)?;
            let others: Vec<(usize, usize)> = dep.coeffs.iter().map(|&(i, j, _)| (i, j)).collect();
            let mut g = elementary(dep.i0, dep.j0);
            for &(i, j, c) in &dep.coeffs {
                g -= elementary(i, j) * c;
            }
            let basis = DMatrix::from_columns(&others.iter().map(|&(i, j)| col(i, j)).collect::<Vec<_>>());
            let targets = DMatrix::from_columns(
                &others
                    .iter()
                    .map(|&(i, j)| flat(&elementary(i, j)))
                    .collect::<Vec<_>>(),
            );
            let mut gamma = [0.0; 4];
            gamma[2 * dep.i0 + dep.j0] = 1.0;
            AcpDecomposition {
                l: targets * pinv(&basis, RANK_RTOL),
                g,
                gamma,
                dependent_index: Some(dep),
                span_dim: 3,
                verification_residual: 0.0,
            }
        }
        d => {
            return Err(AlgebraError::Construction(format!(
                "unexpected span dimension {d} for a C-elliptic operator"
            )))
        }
    };
    verify(op, dec)
}

fn find_dependency(a: &DMatrix<f64>, tol: f64) -> Result<DependentIndex, AlgebraError> {
    let mut best: Option<DependentIndex> = None;
    for &(i0, j0) in &CANDIDATES {
        let others: Vec<(usize, usize)> = (0..4)
            .map(|k| (k / 2, k % 2))
            .filter(|&p| p != (i0, j0))
            .collect();
        let basis = DMatrix::from_columns(
            &others
                .iter()
                .map(|&(i, j)| a.column(2 * i + j).into_owned())
                .collect::<Vec<_>>(),
        );
        let target = a.column(2 * i0 + j0).into_owned();
        let tnorm = target.norm();
        if tnorm == 0.0 {
            continue;
        }
        let coeffs = pinv(&basis, RANK_RTOL) * &target;
        let residual = (&basis * &coeffs - &target).norm() / tnorm;
        // Residuals below tolerance count as ties; the earlier candidate wins.
        let better = match &best {
            None => true,
            Some(b) => residual < b.residual && !(b.residual <= tol),
        };
        if better {
            best = Some(DependentIndex {
                i0,
                j0,
                coeffs: others.iter().zip(coeffs.iter()).map(|(&(i, j), &c)| (i, j, c)).collect(),
                residual,
            });
        }
    }
    match best {
        Some(d) if d.residual <= tol => Ok(d),
        Some(d) => Err(AlgebraError::Construction(format!(
            "no dependent pure tensor within tolerance (best residual {:.3e})",
            d.residual
        ))),
        None => Err(AlgebraError::Construction("all pure tensors vanish".into())),
    }
}

/// Checks the defining identity on the four elementary matrices and on
/// random samples, and that `𝔊` is invertible.
fn verify(op: &DiffOperator, mut dec: AcpDecomposition) -> Result<AcpDecomposition, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut samples: Vec<DMatrix<f64>> = (0..4).map(|k| elementary(k / 2, k % 2)).collect();
    samples.extend(
        (0..VERIFY_SAMPLES).map(|_| DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0))),
    );
    let worst = samples
        .iter()
        .map(|x| dec.residual(op, x) / x.norm())
        .fold(0.0, f64::max);
    if worst > VERIFY_TOL {
        return Err(AlgebraError::Construction(format!(
            "identity check failed with relative residual {worst:.3e}"
        )));
    }
    if dec.det_g().abs() < 1e-8 {
        return Err(AlgebraError::Construction("G is singular".into()));
    }
    dec.verification_residual = worst;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{induce_operator, parse_operator, DEFAULT_TOL};

    fn acp(name: &str) -> Result<AcpDecomposition, AlgebraError> {
        almost_complementary(&induce_operator(&parse_operator(name, 2).unwrap()), DEFAULT_TOL)
    }

    #[test]
    fn sym_branch_matches_hand_construction() {
        let d = acp("sym").unwrap();
        assert_eq!(d.span_dim, 3);
        let dep = d.dependent_index.as_ref().unwrap();
        assert_eq!((dep.i0, dep.j0), (1, 0));
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((&d.g - expect).norm() < 1e-12);
        assert_eq!(d.gamma, [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn grad_branch() {
        let d = acp("grad").unwrap();
        assert_eq!(d.g, DMatrix::identity(2, 2));
        assert_eq!(d.gamma, [1.0; 4]);
        assert!(d.dependent_index.is_none());
    }

    #[test]
    fn dev_sym_refused() {
        assert_eq!(acp("dev_sym"), Err(AlgebraError::NotCElliptic { span_dim: 2 }));
    }
}
