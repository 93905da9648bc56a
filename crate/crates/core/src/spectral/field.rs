use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Grid, SpectralError};
use crate::algebra::PartMap;

/// Pointwise component shape of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Scalar,
    Vector(usize),
    /// `rows × cols`, components stored row-major.
    Matrix(usize, usize),
}

impl Shape {
    pub fn components(&self) -> usize {
        match *self {
            Shape::Scalar => 1,
            Shape::Vector(k) => k,
            Shape::Matrix(r, c) => r * c,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => f.write_str("scalar"),
            Shape::Vector(k) => write!(f, "vector {k}"),
            Shape::Matrix(r, c) => write!(f, "matrix {r}x{c}"),
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpectralError::Format(format!("bad shape `{s}`"));
        let mut it = s.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some("scalar"), None, None) => Ok(Shape::Scalar),
            (Some("vector"), Some(k), None) => Ok(Shape::Vector(k.parse().map_err(|_| bad())?)),
            (Some("matrix"), Some(rc), None) => {
                let (r, c) = rc.split_once('x').ok_or_else(bad)?;
                Ok(Shape::Matrix(
                    r.parse().map_err(|_| bad())?,
                    c.parse().map_err(|_| bad())?,
                ))
            }
            _ => Err(bad()),
        }
    }
}

/// Samples of a field on a periodic grid.
///
/// Storage is component-major: component `c` occupies
/// `data[c·points .. (c+1)·points]` in the grid's flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: Grid,
    shape: Shape,
    data: Vec<f64>,
}

impl PeriodicField {
    pub fn new(grid: Grid, shape: Shape, data: Vec<f64>) -> Result<Self, SpectralError> {
        let expected = grid.points() * shape.components();
        if data.len() != expected {
            return Err(SpectralError::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self { grid, shape, data })
    }

    pub fn zeros(grid: Grid, shape: Shape) -> Self {
        Self {
            grid,
            shape,
            data: vec![0.0; grid.points() * shape.components()],
        }
    }

    /// Samples `f(x, out)` where `out` receives the components at `x`.
    pub fn from_fn<F>(grid: Grid, shape: Shape, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let pts = grid.points();
        let nc = shape.components();
        let mut data = vec![0.0; pts * nc];
        let mut x = vec![0.0; grid.n];
        let mut vals = vec![0.0; nc];
        for idx in 0..pts {
            grid.position(idx, &mut x);
            f(&x, &mut vals);
            for (c, v) in vals.iter().enumerate() {
                data[c * pts + idx] = *v;
            }
        }
        Self { grid, shape, data }
    }

    pub fn scalar_from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_fn(grid, Shape::Scalar, |x, out| out[0] = f(x))
    }

    pub fn from_components(grid: Grid, shape: Shape, comps: Vec<Vec<f64>>) -> Result<Self, SpectralError> {
        if comps.len() != shape.components() {
            return Err(SpectralError::ShapeMismatch {
                expected: shape.to_string(),
                got: format!("{} components", comps.len()),
            });
        }
        Self::new(grid, shape, comps.into_iter().flatten().collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn components(&self) -> usize {
        self.shape.components()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Component `(i, j)` of a matrix field.
    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        match self.shape {
            Shape::Matrix(_, c) => self.component(i * c + j),
            _ => panic!("entry() on a non-matrix field"),
        }
    }

    pub fn scalar(grid: Grid, data: Vec<f64>) -> Result<Self, SpectralError> {
        Self::new(grid, Shape::Scalar, data)
    }

    /// Reinterprets the component layout (same component count).
    pub fn reshape(mut self, shape: Shape) -> Result<Self, SpectralError> {
        if shape.components() != self.components() {
            return Err(SpectralError::ShapeMismatch {
                expected: self.shape.to_string(),
                got: shape.to_string(),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    fn check_same(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid || self.shape != other.shape {
            return Err(SpectralError::ShapeMismatch {
                expected: format!("{} on {:?}", self.shape, self.grid),
                got: format!("{} on {:?}", other.shape, other.grid),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            shape: self.shape,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|x| alpha * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            shape: self.shape,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Pointwise Euclidean (Frobenius for matrices) norm of the components.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let p = self.grid.points();
        let mut out = vec![0.0; p];
        for c in 0..self.components() {
            for (o, v) in out.iter_mut().zip(self.component(c)) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Grid-space mean of each component.
    pub fn means(&self) -> Vec<f64> {
        let p = self.grid.points() as f64;
        (0..self.components())
            .map(|c| self.component(c).iter().sum::<f64>() / p)
            .collect()
    }

    /// Applies a part map pointwise to a matrix field, giving a vector field
    /// with `N` components.
    pub fn apply_part_map(&self, a: &PartMap) -> Result<Self, SpectralError> {
        match self.shape {
            Shape::Matrix(r, c) if r == a.m() && c == a.n() => {}
            _ => {
                return Err(SpectralError::ShapeMismatch {
                    expected: format!("matrix {}x{}", a.m(), a.n()),
                    got: self.shape.to_string(),
                })
            }
        }
        let p = self.grid.points();
        let mut data = vec![0.0; p * a.out_dim()];
        for (r, out) in data.chunks_mut(p).enumerate() {
            for col in 0..self.components() {
                let w = a.matrix()[(r, col)];
                if w != 0.0 {
                    for (o, v) in out.iter_mut().zip(self.component(col)) {
                        *o += w * v;
                    }
                }
            }
        }
        Ok(Self {
            grid: self.grid,
            shape: Shape::Vector(a.out_dim()),
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_text_roundtrip() {
        for s in [Shape::Scalar, Shape::Vector(3), Shape::Matrix(2, 3)] {
            assert_eq!(s.to_string().parse::<Shape>().unwrap(), s);
        }
        assert!("tensor 3".parse::<Shape>().is_err());
    }

    #[test]
    fn rejects_bad_data() {
        let g = Grid::periodic(2, 8).unwrap();
        assert!(PeriodicField::new(g, Shape::Scalar, vec![0.0; 63]).is_err());
        let mut d = vec![0.0; 64];
        d[3] = f64::NAN;
        assert!(PeriodicField::new(g, Shape::Scalar, d).is_err());
    }

    #[test]
    fn pointwise_frobenius() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = PeriodicField::from_fn(g, Shape::Matrix(2, 2), |_, o| o.copy_from_slice(&[1.0, 2.0, 2.0, 4.0]));
        assert!(f.pointwise_norm().iter().all(|&v| (v - 5.0).abs() < 1e-15));
    }
}
