//! Exact changes of variables: lens transform (removes an isotropic
//! harmonic trap), semiclassical conformal transform (compactifies the
//! focusing time of the weakly nonlinear problem) and parabolic rescaling.
//!
//! Each transform is a dilation composed with a pointwise prefactor and a
//! quadratic chirp. Chirps are always applied analytically at nodes, on the
//! side where the field carries them, and the dilation only ever acts on the
//! de-chirped (slowly varying) field. Dilations use the trigonometric
//! interpolant of the source, so they are exact for band-limited data.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{config, Error, Result};
use crate::grid::{spectral_tail, Field, Grid, MAX_NODES};

/// Tolerances checked by every dilation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformChecks {
    /// Largest admissible fraction of the source mass that falls outside the
    /// region mapped onto the target box.
    pub boundary_tol: f64,
    /// Largest admissible energy fraction of the result above 90% of the
    /// target Nyquist wavenumber.
    pub tail_tol: f64,
}

impl Default for TransformChecks {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-12,
            tail_tol: 1e-8,
        }
    }
}

/// Where the transformed field is sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetGrid {
    /// The source grid.
    Same,
    /// Same `M`, half-width scaled so that target nodes map exactly onto
    /// source nodes (no interpolation).
    Rescaled,
    /// Any grid of the same dimension.
    Custom(Grid),
}

/// A transformed field and the time it belongs to in the target frame.
#[derive(Clone, Debug)]
pub struct Mapped {
    pub field: Field,
    pub time: f64,
}

fn axis_matrix(source: &Grid, points: &[f64]) -> Vec<Complex64> {
    // row i evaluates the trigonometric interpolant at points[i]
    let m = source.points();
    let l = source.half_width();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); points.len() * m];
    for (i, &p) in points.iter().enumerate() {
        if !(p >= -l && p < l) {
            continue;
        }
        let row = &mut out[i * m..(i + 1) * m];
        for (k, slot) in row.iter_mut().enumerate() {
            let arg = source.wavenumber(k) * (p + l);
            *slot = if source.is_nyquist(k) {
                Complex64::new(arg.cos() / m as f64, 0.0)
            } else {
                Complex64::from_polar(1.0 / m as f64, arg)
            };
        }
    }
    out
}

/// Applies a `rows × M` matrix along one axis of a row-major array whose
/// axis lengths are `shape`; returns the new array and updates `shape`.
fn apply_along_axis(
    data: &[Complex64],
    shape: &mut [usize],
    axis: usize,
    matrix: &[Complex64],
    rows: usize,
) -> Vec<Complex64> {
    let len_in = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for r in 0..rows {
            let mrow = &matrix[r * len_in..(r + 1) * len_in];
            if mrow.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let dst = (o * rows + r) * inner;
            for (k, coef) in mrow.iter().enumerate() {
                let src = (o * len_in + k) * inner;
                for j in 0..inner {
                    out[dst + j] += coef * data[src + j];
                }
            }
        }
    }
    shape[axis] = rows;
    out
}

/// `g(y) = f(c·y)` on the nodes of `target`, via the trigonometric
/// interpolant of `f`. Points `c·y` outside the source box get 0; the
/// source mass that this discards must stay below `checks.boundary_tol`.
pub fn dilate(f: &Field, c: f64, target: &Grid, checks: TransformChecks) -> Result<Field> {
    let source = f.grid();
    if target.dim() != source.dim() {
        return Err(config("dilation target must have the source dimension"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(config("dilation factor must be positive"));
    }
    // source mass outside the image of the target box
    let reach = c * target.half_width();
    let total: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
    if total > 0.0 {
        let lost: f64 = f
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = source.position(*i);
                x[..source.dim()].iter().any(|&xa| xa.abs() > reach)
            })
            .map(|(_, v)| v.norm_sqr())
            .sum();
        let fraction = lost / total;
        if fraction > checks.boundary_tol {
            return Err(Error::BoundaryMass { fraction });
        }
    }

    let points: Vec<f64> = target.nodes().iter().map(|y| c * y).collect();
    let matrix = axis_matrix(source, &points);
    let mut data = f.spectrum();
    let mut shape = alloc::vec![source.points(); source.dim()];
    for axis in 0..source.dim() {
        data = apply_along_axis(&data, &mut shape, axis, &matrix, target.points());
    }
    let out = Field::new(target.clone(), data)?;
    let tail = spectral_tail(&out, 0.9);
    if tail > checks.tail_tol {
        return Err(Error::Resampling { tail });
    }
    Ok(out)
}

fn resolve_target(source: &Grid, target: &TargetGrid, exact_scale: f64) -> Result<Grid> {
    match target {
        TargetGrid::Same => Ok(source.clone()),
        TargetGrid::Rescaled => source.rescaled(exact_scale),
        TargetGrid::Custom(g) => Ok(g.clone()),
    }
}

/// Exact node mapping when the target is the source scaled by `1/c`.
fn dilate_exact_or_interp(f: &Field, c: f64, target: &Grid, checks: TransformChecks) -> Result<Field> {
    let src = f.grid();
    let exact = target.points() == src.points()
        && (target.half_width() * c - src.half_width()).abs() <= 1e-14 * src.half_width();
    if exact {
        Field::new(target.clone(), f.values().to_vec())
    } else {
        dilate(f, c, target, checks)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LensDirection {
    /// Harmonic frame at time `τ` to the trap-free frame at `t = tan τ`.
    ToFree,
    /// Trap-free frame at time `t` back to the harmonic frame at `τ = arctan t`.
    FromFree,
}

/// Lens transform for the unit trap `V = |x|²/2`:
/// `U(t,x) = (1+t²)^{−n/4} e^{i t|x|²/(2h(1+t²))} u(arctan t, x/√(1+t²))`.
pub fn lens_transform(
    field: &Field,
    time: f64,
    h: f64,
    direction: LensDirection,
    target: TargetGrid,
    checks: TransformChecks,
) -> Result<Mapped> {
    if !(h > 0.0) {
        return Err(config("h must be positive"));
    }
    let grid = field.grid();
    let n = grid.dim() as f64;
    match direction {
        LensDirection::ToFree => {
            if !(time.abs() < 0.5 * PI) {
                return Err(config("lens transform needs |τ| < π/2"));
            }
            let t = time.tan();
            let q = 1.0 + t * t;
            let c = 1.0 / q.sqrt();
            let target = resolve_target(grid, &target, q.sqrt())?;
            let g = dilate_exact_or_interp(field, c, &target, checks)?;
            let pref = q.powf(-0.25 * n);
            let out = g.map_with_position(|x, v| {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                v * Complex64::from_polar(pref, t * r2 / (2.0 * h * q))
            });
            Ok(Mapped { field: out, time: t })
        }
        LensDirection::FromFree => {
            let t = time;
            let q = 1.0 + t * t;
            // strip the chirp in x, then u(τ, y) = q^{n/4}·Ũ(√q·y)
            let stripped = field.map_with_position(|x, v| {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                v * Complex64::from_polar(q.powf(0.25 * n), -t * r2 / (2.0 * h * q))
            });
            let target = resolve_target(grid, &target, 1.0 / q.sqrt())?;
            let out = dilate_exact_or_interp(&stripped, q.sqrt(), &target, checks)?;
            Ok(Mapped {
                field: out,
                time: t.atan(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConformalDirection {
    /// Original frame at time `t < 1` to the ψ-frame at `s = ε^γ/(1−t)`.
    ToPsi,
    /// ψ-frame at time `s` back to the original frame at `t = 1 − ε^γ/s`.
    FromPsi,
}

/// Semiclassical parameter of the ψ-frame, `h = ε^{1−γ}`.
pub fn conformal_h(epsilon: f64, gamma: f64) -> f64 {
    epsilon.powf(1.0 - gamma)
}

/// Initial ψ-frame time `t₀ = ε^γ`.
pub fn conformal_t0(epsilon: f64, gamma: f64) -> f64 {
    epsilon.powf(gamma)
}

/// Conformal transform
/// `u(t,x) = (1−t)^{−n/2} ψ(ε^γ/(1−t), x/(1−t)) e^{i|x|²/(2ε(t−1))}`.
pub fn conformal_transform(
    field: &Field,
    time: f64,
    epsilon: f64,
    gamma: f64,
    direction: ConformalDirection,
    target: TargetGrid,
    checks: TransformChecks,
) -> Result<Mapped> {
    if !(epsilon > 0.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(config("conformal transform needs ε > 0 and 0 < γ < 1"));
    }
    let grid = field.grid();
    let n = grid.dim() as f64;
    let t0 = conformal_t0(epsilon, gamma);
    match direction {
        ConformalDirection::ToPsi => {
            if !(time < 1.0) {
                return Err(config("conformal transform needs t < 1"));
            }
            let r = 1.0 - time;
            // ũ(x) = u·e^{−i|x|²/(2ε(t−1))} = r^{−n/2}·ψ(s, x/r)
            let stripped = field.map_with_position(|x, v| {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                v * Complex64::from_polar(r.powf(0.5 * n), r2 / (2.0 * epsilon * r))
            });
            let target = resolve_target(grid, &target, 1.0 / r)?;
            let out = dilate_exact_or_interp(&stripped, r, &target, checks)?;
            Ok(Mapped {
                field: out,
                time: t0 / r,
            })
        }
        ConformalDirection::FromPsi => {
            if !(time > 0.0) {
                return Err(config("ψ-frame time must be positive"));
            }
            let r = t0 / time;
            let t = 1.0 - r;
            let target = resolve_target(grid, &target, r)?;
            let g = dilate_exact_or_interp(field, 1.0 / r, &target, checks)?;
            let out = g.map_with_position(|x, v| {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                v * Complex64::from_polar(r.powf(-0.5 * n), -r2 / (2.0 * epsilon * r))
            });
            Ok(Mapped { field: out, time: t })
        }
    }
}

/// Result of [`parabolic_rescale`].
#[derive(Clone, Debug)]
pub struct ParabolicScaling {
    /// `u₀(x) = λ^{−n/2+s}·a₀(x/λ)` on the refined grid.
    pub u0: Field,
    /// `h = λ^{nσ/2−1−sσ}`.
    pub h: f64,
    pub lambda: f64,
    /// `u(t, x) = λ^{−n/2+s}·ψ(t/λ^e, x/λ)` with `e = nσ/2 + 1 − sσ`.
    pub time_exponent: f64,
}

impl ParabolicScaling {
    /// Time in the `u`-frame matching `ψ`-frame time `τ`.
    pub fn u_time(&self, tau: f64) -> f64 {
        self.lambda.powf(self.time_exponent) * tau
    }
}

/// Parabolic rescaling for `i∂ₜu + ½Δu = ω|u|^{2σ}u`, which maps it to the
/// semiclassical equation for `ψ` with the returned `h`. The grid keeps its
/// half-width and gains a factor `2^⌈log₂(1/λ)⌉` in points per axis.
pub fn parabolic_rescale(a0: &Field, lambda: f64, s: f64, sigma: u32) -> Result<ParabolicScaling> {
    let grid = a0.grid();
    let n = grid.dim() as f64;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(config("λ must lie in (0, 1]"));
    }
    if sigma == 0 {
        return Err(config("σ must be >= 1"));
    }
    let sig = sigma as f64;
    let s_max = 0.5 * n - 1.0 / sig;
    if !(s >= 0.0 && s < s_max) {
        return Err(config(alloc::format!(
            "s = {s} is outside the admissible range [0, {s_max}) for n = {n}, σ = {sigma}"
        )));
    }
    let factor = ((1.0 / lambda) - 1e-12).ceil().max(1.0) as usize;
    let factor = factor.next_power_of_two();
    let points = grid.points() * factor;
    if points.checked_pow(grid.dim() as u32).map_or(true, |v| v > MAX_NODES) {
        return Err(config("refined grid exceeds the node cap"));
    }
    let fine = Grid::new(grid.dim(), points, grid.half_width())?;
    let amp = lambda.powf(-0.5 * n + s);
    let u0 = if factor == 1 && lambda == 1.0 {
        a0.scale_real(amp)
    } else {
        dilate(a0, 1.0 / lambda, &fine, TransformChecks::default())?
            .scale_real(amp)
    };
    Ok(ParabolicScaling {
        u0,
        h: lambda.powf(0.5 * n * sig - 1.0 - s * sig),
        lambda,
        time_exponent: 0.5 * n * sig + 1.0 - s * sig,
    })
}
