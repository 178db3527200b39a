//! Amplitude/velocity formulation of the exact equation. Writing
//! `u = α·e^{iφ/h}` with `v = ∇φ` gives
//!
//! ```text
//! ∂ₜv + v·∇v + 2W w f′(w|α|²)·Re(ᾱ∇α) = 0
//! ∂ₜα + v·∇α + ½α·div v = i(h/2)Δα
//! ```
//!
//! With `α = α₁ + iα₂` the first-order part is symmetrized by
//! `S = diag(I₂, I/(4W w f′))`; the `i(h/2)Δ` term is skew-adjoint, which is
//! why energy bounds hold uniformly in `h`.
//!
//! The phase itself is not part of the system. We carry its value at one
//! anchor node (the maximum of `|α(0)|`) via `∂ₜφ = −½|v|² − W f(w|α|²)`
//! and recover the rest of `φ` from `v` in [`phase_from_velocity`].

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::dynamics::ensure_real;
use crate::error::{config, Error, Result};
use crate::grid::{
    dealias, spectral_derivative, spectral_gradient, spectral_laplacian, spectral_partial, Field,
};
use crate::nonlinearity::{Nonlinearity, TimeWeight};

use super::{check_dt, dot, make_real, rk4, OdeState};

#[derive(Clone, Debug)]
pub struct HyperbolicState {
    /// `α = α₁ + iα₂`.
    pub alpha: Field,
    /// Real velocity components.
    pub v: Vec<Field>,
    pub t: f64,
    /// `h ≥ 0`; `h = 0` is the limit system in these variables.
    pub h: f64,
    /// Node at which the phase constant is tracked.
    pub anchor: usize,
    /// `φ(t, x_anchor)`.
    pub anchor_phase: f64,
}

impl HyperbolicState {
    /// `α(0) = a₀`, `v(0) = ∇φ₀`, anchor at the maximum of `|a₀|`.
    pub fn from_initial(a0: &Field, phi0: &Field, h: f64, t0: f64) -> Result<Self> {
        a0.ensure_same_grid(phi0)?;
        ensure_real(phi0, "initial phase")?;
        if !(h.is_finite() && h >= 0.0) {
            return Err(config("h must be >= 0"));
        }
        let anchor = a0
            .values()
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, c)| {
                if c.norm() > bv {
                    (i, c.norm())
                } else {
                    (bi, bv)
                }
            })
            .0;
        let mut v = spectral_gradient(phi0);
        v.iter_mut().for_each(make_real);
        Ok(Self {
            alpha: a0.clone(),
            v,
            t: t0,
            h,
            anchor,
            anchor_phase: phi0.values()[anchor].re,
        })
    }

    pub fn alpha1(&self) -> Field {
        self.alpha.real_part()
    }

    pub fn alpha2(&self) -> Field {
        self.alpha.map(|c| c.im.into())
    }

    /// `φ` from the velocity with the tracked anchor constant.
    pub fn phase(&self, curl_tol: f64) -> Result<Field> {
        phase_from_velocity(&self.v, self.anchor, self.anchor_phase, curl_tol)
    }

    /// `α·e^{iφ/h}`; requires `h > 0`.
    pub fn reconstruct(&self, curl_tol: f64) -> Result<Field> {
        if self.h <= 0.0 {
            return Err(config("reconstruction needs h > 0"));
        }
        let phi = self.phase(curl_tol)?;
        let h = self.h;
        self.alpha
            .zip_map(&phi, |a, p| a * Complex64::from_polar(1.0, p.re / h))
    }
}

/// Pointwise lower-block weight `W w f′(w|α|²)`; errors if it is not positive.
fn symmetrizer_weights(alpha: &Field, t: f64, nl: &Nonlinearity, weight: &TimeWeight) -> Result<Vec<f64>> {
    let k: Vec<f64> = alpha
        .values()
        .iter()
        .map(|a| weight.coupling_slope(nl, t, a.norm_sqr()))
        .collect();
    let min = k.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 && min.is_finite() {
        Ok(k)
    } else {
        Err(Error::Symmetrizer { min_fprime: min })
    }
}

fn grenier_rhs(
    s: &OdeState,
    t: f64,
    h: f64,
    anchor: usize,
    nl: &Nonlinearity,
    weight: &TimeWeight,
) -> Result<OdeState> {
    let alpha = &s.fields[0];
    let v = &s.fields[1..];
    let grid = alpha.grid().clone();
    let k = symmetrizer_weights(alpha, t, nl, weight)?;

    let grad_alpha = spectral_gradient(alpha);
    let div_v = spectral_divergence_real(v);
    let lap_alpha = spectral_laplacian(alpha);
    let transport = dot(v, &grad_alpha);
    let half_ih = Complex64::new(0.0, 0.5 * h);
    let dalpha: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            -transport.values()[i] - 0.5 * alpha.values()[i] * div_v[i]
                + half_ih * lap_alpha.values()[i]
        })
        .collect();

    let mut out = Vec::with_capacity(1 + v.len());
    out.push(dealias(&Field::from_raw(grid.clone(), dalpha)));
    for (axis, _) in v.iter().enumerate() {
        // (v·∇)v_axis
        let grad_v = spectral_gradient(&v[axis]);
        let adv = dot(v, &grad_v);
        let values: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let a = alpha.values()[i];
                let ga = grad_alpha[axis].values()[i];
                let pressure = 2.0 * k[i] * (a.conj() * ga).re;
                Complex64::new(-adv.values()[i].re - pressure, 0.0)
            })
            .collect();
        let mut dv = dealias(&Field::from_raw(grid.clone(), values));
        make_real(&mut dv);
        out.push(dv);
    }

    let a_anchor = alpha.values()[anchor];
    let speed2: f64 = v.iter().map(|vk| vk.values()[anchor].re.powi(2)).sum();
    let dphase = -0.5 * speed2 - weight.coupling(nl, t, a_anchor.norm_sqr());
    Ok(OdeState {
        fields: out,
        scalars: alloc::vec![dphase],
    })
}

fn spectral_divergence_real(v: &[Field]) -> Vec<f64> {
    let mut total = alloc::vec![0.0; v[0].len()];
    for (axis, vk) in v.iter().enumerate() {
        let d = spectral_derivative(vk, axis);
        total.iter_mut().zip(d.values()).for_each(|(t, c)| *t += c.re);
    }
    total
}

/// One RK4 step of the amplitude/velocity system.
pub fn grenier_step(
    state: &HyperbolicState,
    dt: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<HyperbolicState> {
    check_dt(dt)?;
    weight.validate()?;
    let mut fields = Vec::with_capacity(1 + state.v.len());
    fields.push(state.alpha.clone());
    fields.extend(state.v.iter().cloned());
    let y = OdeState {
        fields,
        scalars: alloc::vec![state.anchor_phase],
    };
    let (h, anchor) = (state.h, state.anchor);
    let next = rk4(&y, state.t, dt, |s, t| grenier_rhs(s, t, h, anchor, nl, &weight))?;
    let mut fields = next.fields.into_iter();
    let alpha = fields.next().expect("amplitude field");
    Ok(HyperbolicState {
        alpha,
        v: fields.collect(),
        t: state.t + dt,
        h,
        anchor,
        anchor_phase: next.scalars[0],
    })
}

/// Integrates to `t_final` with steps no larger than `dt`, landing exactly.
pub fn grenier_evolve(
    state: &HyperbolicState,
    dt: f64,
    t_final: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<HyperbolicState> {
    check_dt(dt)?;
    let span = t_final - state.t;
    if span <= 0.0 {
        return Ok(state.clone());
    }
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let step = span / steps as f64;
    let mut s = state.clone();
    for _ in 0..steps {
        s = grenier_step(&s, step, nl, weight)?;
    }
    s.t = t_final;
    Ok(s)
}

/// RK4 stability bound for the dispersive term, `dt ≤ 2.5 / ((h/2)·ξ²_max)`,
/// combined with a transport CFL bound from the current velocity and sound speed.
pub fn grenier_stable_dt(state: &HyperbolicState, nl: &Nonlinearity, weight: TimeWeight) -> f64 {
    let grid = state.alpha.grid();
    let kmax = grid.max_wavenumber();
    let disp = if state.h > 0.0 {
        2.5 / (0.5 * state.h * kmax * kmax * grid.dim() as f64)
    } else {
        f64::INFINITY
    };
    let vmax = state
        .v
        .iter()
        .flat_map(|vk| vk.values().iter().map(|c| c.re.abs()))
        .fold(0.0, f64::max);
    let cmax = state
        .alpha
        .values()
        .iter()
        .map(|a| {
            let y = a.norm_sqr();
            (weight.coupling_slope(nl, state.t, y).max(0.0) * y).sqrt()
        })
        .fold(0.0, f64::max);
    let speed = (vmax + 2.0 * cmax) * kmax * grid.dim() as f64;
    let transport = if speed > 0.0 { 2.0 / speed } else { f64::INFINITY };
    disp.min(transport)
}

/// `Σ_{|β|≤s} ( ‖∂^β α‖² + Σ_k ∫ |∂^β v_k|² / (4 W w f′(w|α|²)) )`.
pub fn grenier_energy(
    state: &HyperbolicState,
    s: u32,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<f64> {
    let grid = state.alpha.grid();
    let dim = grid.dim();
    let dv = grid.cell_volume();
    let k = symmetrizer_weights(&state.alpha, state.t, nl, &weight)?;
    let mut total = 0.0;
    for beta in multi_indices(dim, s) {
        let da = spectral_partial(&state.alpha, &beta);
        total += da.mass();
        for vk in &state.v {
            let d = spectral_partial(vk, &beta);
            total += d
                .values()
                .iter()
                .zip(&k)
                .map(|(c, w)| c.norm_sqr() / (4.0 * w))
                .sum::<f64>()
                * dv;
        }
    }
    Ok(total)
}

/// All multi-indices of length `dim` with total order `≤ s`.
pub fn multi_indices(dim: usize, s: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for order in 0..=s {
        for i in 0..=order {
            for j in 0..=(order - i) {
                let k = order - i - j;
                let beta = [i, j, k];
                if beta[dim..].iter().all(|&b| b == 0) {
                    out.push(beta);
                }
            }
        }
    }
    out
}

/// `φ` with `∇φ = v`: zero-mean spectral inverse of the gradient, then shifted
/// so that `φ(anchor) = anchor_value`. The zero mode of `v` (a uniform drift,
/// not a periodic gradient) is discarded.
pub fn phase_from_velocity(v: &[Field], anchor: usize, anchor_value: f64, curl_tol: f64) -> Result<Field> {
    let first = v.first().ok_or_else(|| config("empty velocity"))?;
    let grid = first.grid().clone();
    if v.len() != grid.dim() {
        return Err(config("velocity needs one component per axis"));
    }
    if anchor >= grid.len() {
        return Err(config("anchor node outside the grid"));
    }
    let scale = v.iter().map(|f| f.norm_l2()).fold(0.0, f64::max);
    for j in 0..v.len() {
        v[j].ensure_same_grid(first)?;
        for k in (j + 1)..v.len() {
            let curl = spectral_derivative(&v[j], k)
                .sub(&spectral_derivative(&v[k], j))?
                .norm_l2();
            if curl > curl_tol * scale.max(1.0) {
                return Err(Error::Curl { curl, tol: curl_tol });
            }
        }
    }

    let k = grid.wavenumbers();
    let xi2 = grid.xi_squared();
    let spectra: Vec<Vec<Complex64>> = v.iter().map(|f| f.spectrum()).collect();
    let mut phi_hat = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    for (flat, slot) in phi_hat.iter_mut().enumerate() {
        if xi2[flat] == 0.0 {
            continue;
        }
        let idx = grid.unravel(flat);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for axis in 0..grid.dim() {
            if grid.is_nyquist(idx[axis]) {
                continue;
            }
            let ka = k[idx[axis]];
            num += Complex64::new(0.0, -ka) * spectra[axis][flat];
            den += ka * ka;
        }
        if den > 0.0 {
            *slot = num / den;
        }
    }
    let mut phi = Field::from_spectrum(&grid, phi_hat);
    make_real(&mut phi);
    let shift = anchor_value - phi.values()[anchor].re;
    phi.values_mut().iter_mut().for_each(|c| c.re += shift);
    Ok(phi)
}
