//! The lattice transforms against rustfft, axis by axis.

use geoptics_core::{Complex64, Field, Grid};
use rustfft::num_complex::Complex as RComplex;
use rustfft::FftPlanner;

fn sample(grid: &Grid) -> Field {
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::from_polar((-r2 / 3.0).exp(), 0.7 * x[0] - 0.3 * x.iter().sum::<f64>()) + Complex64::new(0.01 * x[0].sin(), 0.0)
    })
}

/// Full n-dimensional forward DFT built from rustfft line transforms.
fn reference(grid: &Grid, values: &[Complex64]) -> Vec<RComplex<f64>> {
    let m = grid.points();
    let n = grid.dim();
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut data: Vec<RComplex<f64>> = values.iter().map(|c| RComplex::new(c.re, c.im)).collect();
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let mut line = vec![RComplex::new(0.0, 0.0); m];
        for start in 0..data.len() {
            // first element of each line along `axis`
            if (start / stride) % m != 0 {
                continue;
            }
            for k in 0..m {
                line[k] = data[start + k * stride];
            }
            fft.process(&mut line);
            for k in 0..m {
                data[start + k * stride] = line[k];
            }
        }
    }
    data
}

#[test]
fn forward_transform_matches_rustfft() {
    for (dim, m) in [(1, 8), (1, 256), (1, 2048), (2, 16), (2, 64), (3, 8), (3, 16)] {
        let grid = Grid::new(dim, m, 5.0).unwrap();
        let f = sample(&grid);
        let ours = grid.forward(f.values());
        let theirs = reference(&grid, f.values());
        let scale = theirs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a.re - b.re).abs() <= 1e-12 * scale && (a.im - b.im).abs() <= 1e-12 * scale, "dim {dim}, M {m}");
        }
    }
}

#[test]
fn inverse_transform_matches_rustfft() {
    let grid = Grid::new(2, 32, 4.0).unwrap();
    let spectrum = sample(&grid).into_values();
    let ours = grid.inverse(spectrum.clone());
    let m = grid.points();
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let mut data: Vec<RComplex<f64>> = spectrum.iter().map(|c| RComplex::new(c.re, c.im)).collect();
    for row in data.chunks_exact_mut(m) {
        ifft.process(row);
    }
    for col in 0..m {
        let mut line: Vec<_> = (0..m).map(|r| data[r * m + col]).collect();
        ifft.process(&mut line);
        for r in 0..m {
            data[r * m + col] = line[r] / (m * m) as f64;
        }
    }
    for (a, b) in ours.iter().zip(&data) {
        assert!((a.re - b.re).abs() < 1e-14 && (a.im - b.im).abs() < 1e-14);
    }
}
