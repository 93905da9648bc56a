//! n-dimensional FFTs over the grid's flat (row-major) layout.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::Grid;

/// Lines per batch handed to one `process_with_scratch` call.
const BATCH_LINES: usize = 64;

fn run_lines(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    data.par_chunks_mut(n * BATCH_LINES).for_each(|batch| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(batch, &mut scratch);
    });
}

/// Tiled transpose of a row-major `rows×cols` matrix into `cols×rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 32;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

fn transform(grid: &Grid, buf: &mut [Complex64], inverse: bool) {
    let n = grid.size;
    let mut planner = FftPlanner::<f64>::new();
    let plan: Arc<dyn Fft<f64>> = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); buf.len()];
    for axis in 0..grid.n {
        let stride = n.pow((grid.n - 1 - axis) as u32);
        if stride == 1 {
            run_lines(&plan, buf, n);
            continue;
        }
        // Gather every line of this axis into contiguous storage.
        let block = n * stride;
        scratch
            .par_chunks_mut(block)
            .zip(buf.par_chunks(block))
            .for_each(|(dst, src)| transpose(src, dst, n, stride));
        run_lines(&plan, &mut scratch, n);
        buf.par_chunks_mut(block)
            .zip(scratch.par_chunks(block))
            .for_each(|(dst, src)| transpose(src, dst, stride, n));
    }
}

/// Unnormalized forward DFT of real samples.
pub fn forward(grid: &Grid, data: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(grid, &mut buf, false);
    buf
}

/// Inverse DFT (normalized by `1/Nⁿ`), keeping the real part.
pub fn inverse_real(grid: &Grid, spec: &[Complex64]) -> Vec<f64> {
    let mut buf = spec.to_vec();
    transform(grid, &mut buf, true);
    let scale = 1.0 / grid.points() as f64;
    buf.iter().map(|z| z.re * scale).collect()
}

/// Calls `f(flat_index, multi_index)` for every mode.
pub fn for_each_mode(grid: &Grid, mut f: impl FnMut(usize, &[usize])) {
    let mut multi = vec![0usize; grid.n];
    for idx in 0..grid.points() {
        f(idx, &multi);
        for a in (0..grid.n).rev() {
            multi[a] += 1;
            if multi[a] < grid.size {
                break;
            }
            multi[a] = 0;
        }
    }
}

/// Multiplies a spectrum in place by `m(k)` with `k` the derivative wavenumbers.
pub fn apply_multiplier(grid: &Grid, spec: &mut [Complex64], m: impl Fn(&[f64], &[usize]) -> Complex64) {
    let mut k = vec![0.0; grid.n];
    for_each_mode(grid, |idx, multi| {
        for (ka, &j) in k.iter_mut().zip(multi) {
            *ka = grid.wavenumber(j);
        }
        spec[idx] *= m(&k, multi);
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let g = Grid::periodic(3, 8).unwrap();
        let data: Vec<f64> = (0..g.points()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = inverse_real(&g, &forward(&g, &data));
        let err = data.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let g = Grid::periodic(2, 16).unwrap();
        let data: Vec<f64> = (0..g.points())
            .map(|i| {
                let (r, c) = (i / 16, i % 16);
                (std::f64::consts::TAU * (2.0 * r as f64 + 3.0 * c as f64) / 16.0).cos()
            })
            .collect();
        let s = forward(&g, &data);
        let peak = s[g.flatten(&[2, 3])].norm();
        assert!((peak - 128.0).abs() < 1e-9);
    }

    #[test]
    fn mode_iteration_matches_unflatten() {
        let g = Grid::periodic(3, 8).unwrap();
        let mut m = [0; 3];
        for_each_mode(&g, |idx, multi| {
            g.unflatten(idx, &mut m);
            assert_eq!(&m[..], multi);
        });
    }
}
