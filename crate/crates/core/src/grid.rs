//! Periodic box discretization and Fourier calculus.
//!
//! Conventions, fixed once so that dumped fields stay comparable:
//!
//! - Nodes per axis: `x_i = -L + 2L·i/M`, `i = 0..M`.
//! - Storage is row-major over axes (the last axis varies fastest).
//! - Spectra are kept in FFT order: index `i` carries the integer frequency
//!   `i` for `i < M/2` and `i - M` otherwise, i.e. `m ∈ [-M/2, M/2)`, with
//!   wavenumber `ξ = (π/L)·m`.
//! - The forward transform is unnormalized and the inverse divides by `Mⁿ`,
//!   so `Σ|f|²·dxⁿ = Σ|f̂|²·dxⁿ/Mⁿ` (discrete Parseval). `dxⁿ/Mⁿ` is the
//!   spectral cell measure used by the Sobolev norms.
//! - Odd-order derivative multipliers vanish on the Nyquist mode `m = -M/2`
//!   so that derivatives of real fields stay real.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{config, Error, Result};
use crate::fft::FftPlan;

/// Maximum number of nodes per field; 3-D runs at `M = 256` stay below it.
pub const MAX_NODES: usize = 1 << 24;

#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
    plan: Arc<FftPlan>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points == other.points
            && self.half_width.to_bits() == other.half_width.to_bits()
    }
}

impl Grid {
    /// `dim ∈ {1,2,3}`, `points` a power of two ≥ 8, `half_width > 0`.
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(config(alloc::format!("dimension must be 1, 2 or 3 (got {dim})")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(config(alloc::format!(
                "points per axis must be a power of two >= 8 (got {points})"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(config(alloc::format!("half-width must be positive (got {half_width})")));
        }
        if points.checked_pow(dim as u32).map_or(true, |n| n > MAX_NODES) {
            return Err(config("grid exceeds the node cap"));
        }
        Ok(Self {
            dim,
            points,
            half_width,
            plan: Arc::new(FftPlan::new(points)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of nodes, `Mⁿ`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Integer frequency of FFT slot `i`, in `[-M/2, M/2)`.
    pub fn frequency(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        PI / self.half_width * self.frequency(i) as f64
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.wavenumber(i)).collect()
    }

    pub fn max_wavenumber(&self) -> f64 {
        PI / self.half_width * (self.points / 2) as f64
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.points / 2
    }

    /// Per-axis indices of a flat index; unused axes are zero.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.points + idx[axis])
    }

    /// Node coordinates of a flat index; unused axes are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.node(idx[axis]);
        }
        x
    }

    pub fn radius_squared(&self, flat: usize) -> f64 {
        self.position(flat).iter().map(|x| x * x).sum()
    }

    /// Same number of nodes, half-width multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(config("rescale factor must be positive"));
        }
        Ok(Self {
            dim: self.dim,
            points: self.points,
            half_width: self.half_width * factor,
            plan: Arc::clone(&self.plan),
        })
    }

    /// Unnormalized forward DFT over all axes.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform(&mut data, false);
        data
    }

    /// Inverse DFT including the `1/Mⁿ` normalization.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spectrum, true);
        let scale = 1.0 / self.len() as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);
        spectrum
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        let m = self.points;
        let total = data.len();
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..self.dim {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(m) {
                    self.plan.process(chunk, inverse);
                }
                continue;
            }
            let block = stride * m;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    self.plan.process(&mut line, inverse);
                    for (k, value) in line.iter().enumerate() {
                        data[base + k * stride] = *value;
                    }
                }
            }
        }
        debug_assert_eq!(self.plan.len(), m);
    }

    /// `|ξ|²` for every spectral slot, in storage order.
    pub fn xi_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        (0..self.len())
            .map(|flat| {
                let idx = self.unravel(flat);
                (0..self.dim).map(|a| k[idx[a]] * k[idx[a]]).sum()
            })
            .collect()
    }
}

/// Complex lattice function on a [`Grid`].
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl core::fmt::Debug for Field {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("l2", &self.norm_l2())
            .field("max_abs", &self.max_abs())
            .finish_non_exhaustive()
    }
}

impl Field {
    /// Rejects wrong lengths and non-finite samples.
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(config(alloc::format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: &Grid, value: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every node; the closure receives the `dim` coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|flat| {
                let x = grid.position(flat);
                f(&x[..dim])
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Trapezoidal `∫|f|²`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|Im f|`; phases and velocities should keep this at roundoff.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&c| f(c)).collect())
    }

    /// Pointwise map with the node coordinates.
    pub fn map_with_position(&self, f: impl Fn(&[f64], Complex64) -> Complex64) -> Field {
        let dim = self.grid.dim();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &c)| {
                let x = self.grid.position(flat);
                f(&x[..dim], c)
            })
            .collect();
        Self::from_raw(self.grid.clone(), values)
    }

    pub fn zip_map(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Field> {
        self.ensure_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: Complex64) -> Field {
        self.map(|c| c * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Field {
        self.map(|c| c * factor)
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Field {
        self.map(|c| Complex64::new(c.re, 0.0))
    }

    /// `|f|` as a real field.
    pub fn modulus(&self) -> Field {
        self.map(|c| Complex64::new(c.norm(), 0.0))
    }

    /// `‖f - g‖_{L²}`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.cell_volume()).sqrt())
    }

    /// Unnormalized spectrum in FFT order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn from_spectrum(grid: &Grid, spectrum: Vec<Complex64>) -> Field {
        Self::from_raw(grid.clone(), grid.inverse(spectrum))
    }

    /// Largest `|f|` on the box faces relative to `max|f|` (0 for a zero field).
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let m = self.grid.points();
        let dim = self.grid.dim();
        let edge = self
            .values
            .iter()
            .enumerate()
            .filter(|(flat, _)| {
                let idx = self.grid.unravel(*flat);
                idx[..dim].iter().any(|&i| i == 0 || i == m - 1)
            })
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        edge / max
    }

    /// Errors unless the field has decayed to `tol·max|f|` on the box faces.
    pub fn ensure_decayed(&self, tol: f64) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio <= tol {
            Ok(())
        } else {
            Err(config(alloc::format!(
                "field is not negligible on the box boundary (ratio {ratio:e} > {tol:e}); enlarge the box"
            )))
        }
    }
}

fn apply_multiplier(f: &Field, multiplier: impl Fn(usize, [usize; 3]) -> Complex64) -> Field {
    let grid = f.grid();
    let mut spec = f.spectrum();
    for (flat, c) in spec.iter_mut().enumerate() {
        *c *= multiplier(flat, grid.unravel(flat));
    }
    Field::from_spectrum(grid, spec)
}

/// `∂_axis f` by the Fourier multiplier `iξ_axis`.
pub fn spectral_derivative(f: &Field, axis: usize) -> Field {
    let grid = f.grid().clone();
    let k = grid.wavenumbers();
    apply_multiplier(f, |_, idx| {
        if grid.is_nyquist(idx[axis]) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k[idx[axis]])
        }
    })
}

/// Mixed derivative `∂^α f` for a multi-index `α` (entries past `dim` ignored).
pub fn spectral_partial(f: &Field, alpha: &[u32]) -> Field {
    let grid = f.grid().clone();
    let dim = grid.dim();
    let k = grid.wavenumbers();
    apply_multiplier(f, |_, idx| {
        let mut factor = Complex64::new(1.0, 0.0);
        for axis in 0..dim.min(alpha.len()) {
            let order = alpha[axis];
            if order == 0 {
                continue;
            }
            if order % 2 == 1 && grid.is_nyquist(idx[axis]) {
                return Complex64::new(0.0, 0.0);
            }
            factor *= Complex64::new(0.0, k[idx[axis]]).powu(order);
        }
        factor
    })
}

/// Componentwise gradient, one field per axis.
pub fn spectral_gradient(f: &Field) -> Vec<Field> {
    let spec = f.spectrum();
    let grid = f.grid();
    let k = grid.wavenumbers();
    (0..grid.dim())
        .map(|axis| {
            let mut s = spec.clone();
            for (flat, c) in s.iter_mut().enumerate() {
                let i = grid.unravel(flat)[axis];
                *c *= if grid.is_nyquist(i) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k[i])
                };
            }
            Field::from_spectrum(grid, s)
        })
        .collect()
}

pub fn spectral_laplacian(f: &Field) -> Field {
    let xi2 = f.grid().xi_squared();
    apply_multiplier(f, |flat, _| Complex64::new(-xi2[flat], 0.0))
}

/// `Σ_k ∂_k v_k`.
pub fn spectral_divergence(v: &[Field]) -> Result<Field> {
    let first = v.first().ok_or_else(|| config("empty vector field"))?;
    let grid = first.grid().clone();
    if v.len() != grid.dim() {
        return Err(config("vector field must have one component per axis"));
    }
    let k = grid.wavenumbers();
    let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, component) in v.iter().enumerate() {
        component.ensure_same_grid(first)?;
        let spec = component.spectrum();
        for (flat, c) in spec.iter().enumerate() {
            let i = grid.unravel(flat)[axis];
            if !grid.is_nyquist(i) {
                total[flat] += c * Complex64::new(0.0, k[i]);
            }
        }
    }
    Ok(Field::from_spectrum(&grid, total))
}

fn weighted_spectral_norm(f: &Field, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let xi2 = grid.xi_squared();
    let measure = grid.cell_volume() / grid.len() as f64;
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(&xi2)
        .map(|(c, &x)| weight(x) * c.norm_sqr())
        .sum();
    (sum * measure).sqrt()
}

/// `‖f‖_{H^s} = (Σ (1+|ξ|²)^s |f̂|² · dxⁿ/Mⁿ)^{1/2}`; at `s = 0` this is the
/// trapezoidal L² norm.
pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(config(alloc::format!("Sobolev index must be >= 0 (got {s})")));
    }
    Ok(weighted_spectral_norm(f, |x| (1.0 + x).powf(s)))
}

/// `‖f‖_{Ḣ^s} = (Σ |ξ|^{2s} |f̂|² · dxⁿ/Mⁿ)^{1/2}`.
pub fn homogeneous_sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(config(alloc::format!("Sobolev index must be >= 0 (got {s})")));
    }
    Ok(weighted_spectral_norm(f, |x| if x == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { x.powf(s) }))
}

/// Trapezoidal `⟨f, g⟩ = ∫ f ḡ`.
pub fn l2_inner(f: &Field, g: &Field) -> Result<Complex64> {
    f.ensure_same_grid(g)?;
    let sum: Complex64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum * f.grid().cell_volume())
}

/// 2/3 rule: zeroes every mode with `|m| > M/3` on some axis.
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid().clone();
    let cutoff = grid.points() as i64 / 3;
    let dim = grid.dim();
    apply_multiplier(f, |_, idx| {
        if idx[..dim].iter().any(|&i| grid.frequency(i).abs() > cutoff) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Exact translation of the trigonometric interpolant: `g(x) = f(x - offset)`.
pub fn spectral_shift(f: &Field, offset: &[f64]) -> Result<Field> {
    let grid = f.grid().clone();
    if offset.len() != grid.dim() {
        return Err(config("shift must have one component per axis"));
    }
    let k = grid.wavenumbers();
    Ok(apply_multiplier(f, |_, idx| {
        offset
            .iter()
            .enumerate()
            .map(|(axis, &d)| {
                let kd = k[idx[axis]] * d;
                if grid.is_nyquist(idx[axis]) {
                    // the Nyquist mode interpolates as a real cosine
                    Complex64::new(kd.cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, -kd)
                }
            })
            .product()
    }))
}

/// `Σ|ξ||f̂|² / Σ|f̂|²`; zero for a zero field.
pub fn spectral_centroid(f: &Field) -> f64 {
    let xi2 = f.grid().xi_squared();
    let spec = f.spectrum();
    let (num, den) = spec
        .iter()
        .zip(&xi2)
        .fold((0.0, 0.0), |(n, d), (c, x)| (n + x.sqrt() * c.norm_sqr(), d + c.norm_sqr()));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Fraction of spectral energy carried by modes with `|ξ| > fraction·ξ_max`.
pub fn spectral_tail(f: &Field, fraction: f64) -> f64 {
    let grid = f.grid();
    let cutoff = fraction * grid.max_wavenumber();
    let k = grid.wavenumbers();
    let dim = grid.dim();
    let spec = f.spectrum();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (flat, c) in spec.iter().enumerate() {
        let idx = grid.unravel(flat);
        let e = c.norm_sqr();
        total += e;
        if idx[..dim].iter().any(|&i| k[i].abs() > cutoff) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}
