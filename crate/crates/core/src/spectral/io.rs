//! `KMSFIELD v1` binary field files and CSV slices.
//!
//! A field file is one ASCII header line
//!
//! ```text
//! KMSFIELD v1; <n>; <N>; <L>; <shape>;
//! ```
//!
//! followed by the samples as little-endian `f64`, component-major (all
//! samples of component 0, then component 1, ...), each component in the
//! grid's row-major order.

use std::io::{BufRead, Write};

use super::{Grid, PeriodicField, Shape, SpectralError};

pub const MAGIC: &str = "KMSFIELD v1";

pub fn write_field<W: Write>(mut w: W, f: &PeriodicField) -> Result<(), SpectralError> {
    let g = f.grid();
    writeln!(w, "{MAGIC}; {}; {}; {}; {};", g.n, g.size, g.length, f.shape())?;
    let mut buf = Vec::with_capacity(f.data().len() * 8);
    for v in f.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: BufRead>(mut r: R) -> Result<PeriodicField, SpectralError> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let fields: Vec<&str> = header.trim_end().split(';').map(str::trim).collect();
    let bad = |what: &str| SpectralError::Format(format!("{what} in header `{}`", header.trim_end()));
    if fields.len() != 6 || fields[0] != MAGIC || !fields[5].is_empty() {
        return Err(bad("malformed header"));
    }
    let n: usize = fields[1].parse().map_err(|_| bad("bad dimension"))?;
    let size: usize = fields[2].parse().map_err(|_| bad("bad grid size"))?;
    let length: f64 = fields[3].parse().map_err(|_| bad("bad edge length"))?;
    let shape: Shape = fields[4].parse()?;
    let grid = Grid::new(n, size, length)?;
    let count = grid.points() * shape.components();
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| SpectralError::Format(format!("expected {count} samples")))?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(SpectralError::Format("trailing bytes after samples".into()));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    PeriodicField::new(grid, shape, data)
}

/// Writes `x,y,value` rows for one component of a two-dimensional field,
/// or of the `x₃ = 0` plane of a three-dimensional one.
pub fn write_csv_slice<W: Write>(mut w: W, f: &PeriodicField, component: usize) -> Result<(), SpectralError> {
    let g = f.grid();
    if !(2..=3).contains(&g.n) || component >= f.components() {
        return Err(SpectralError::InvalidParameter(format!(
            "cannot slice component {component} of a {}-dimensional {} field",
            g.n,
            f.shape()
        )));
    }
    let data = f.component(component);
    writeln!(w, "x,y,value")?;
    let mid = g.size / 2;
    for i in 0..g.size {
        for j in 0..g.size {
            let idx = if g.n == 2 { g.flatten(&[i, j]) } else { g.flatten(&[i, j, mid]) };
            writeln!(w, "{},{},{}", g.coordinate(i), g.coordinate(j), data[idx])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = PeriodicField::from_fn(g, Shape::Matrix(2, 2), |x, o| {
            o.iter_mut().enumerate().for_each(|(c, v)| *v = x[0] * c as f64 - x[1]);
        });
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert!(buf.starts_with(b"KMSFIELD v1; 2; 8; 6.283185307179586; matrix 2x2;\n"));
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_or_padded_files_fail() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = PeriodicField::zeros(g, Shape::Scalar);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert!(read_field(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_field(&buf[..]).is_err());
        assert!(read_field(&b"KMSFIELD v2; 2; 8; 1; scalar;\n"[..]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = PeriodicField::zeros(g, Shape::Scalar);
        let mut buf = Vec::new();
        write_csv_slice(&mut buf, &f, 0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(write_csv_slice(Vec::new(), &f, 1).is_err());
    }
}
