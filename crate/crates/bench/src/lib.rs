//! Fixed inputs shared by the benchmarks.

use kms_core::spectral::{random_field_seeded, Grid, PeriodicField, RandomFieldSpec, Shape};
use kms_core::{parse_operator, KmsConfig};

/// Seeded band-limited `n×n` matrix field on the `2π`-torus.
pub fn matrix_field(n: usize, size: usize, seed: u64) -> PeriodicField {
    let grid = Grid::periodic(n, size).expect("benchmark grid");
    random_field_seeded(grid, Shape::Matrix(n, n), RandomFieldSpec::default(), seed).expect("random field")
}

/// Seeded vector field.
pub fn vector_field(n: usize, size: usize, seed: u64) -> PeriodicField {
    let grid = Grid::periodic(n, size).expect("benchmark grid");
    random_field_seeded(grid, Shape::Vector(n), RandomFieldSpec::default(), seed).expect("random field")
}

/// Critical configuration for a catalogue operator.
pub fn critical(name: &str, n: usize, p: f64) -> KmsConfig {
    KmsConfig::critical(parse_operator(name, n).expect("catalogue name"), p)
}
