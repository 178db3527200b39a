//! First corrector `(a⁽¹⁾, φ⁽¹⁾)`: the linearization of the limit system
//! around a base solution `(a, φ)`, forced by the dispersive term,
//!
//! ```text
//! ∂ₜφ⁽¹⁾ + ∇φ·∇φ⁽¹⁾ + 2Re(ā a⁽¹⁾)·W w f′(w|a|²) = 0,                 φ⁽¹⁾(0) = 0
//! ∂ₜa⁽¹⁾ + ∇φ·∇a⁽¹⁾ + ∇φ⁽¹⁾·∇a + ½a⁽¹⁾Δφ + ½aΔφ⁽¹⁾ = (i/2)Δa,       a⁽¹⁾(0) = a₁
//! ```
//!
//! RK4 needs the base state at `t`, `t + dt/2` and `t + dt`, so the base
//! trajectory is stored on a half-step grid and must match the corrector
//! step exactly. There is no interpolation in time.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{dealias, spectral_gradient, spectral_laplacian, Field};
use crate::nonlinearity::{Nonlinearity, TimeWeight};

use super::limit::{limit_system_step, LimitPair};
use super::{check_dt, dot, make_real, rk4, OdeState};

#[derive(Clone, Debug)]
pub struct CorrectorPair {
    /// `a⁽¹⁾`.
    pub a1c: Field,
    /// `φ⁽¹⁾` (real).
    pub phi1c: Field,
    pub t: f64,
}

impl CorrectorPair {
    /// Leading WKB amplitude `a·e^{iφ⁽¹⁾}` for a base amplitude `a` at the same time.
    pub fn leading_amplitude(&self, a: &Field) -> Result<Field> {
        a.zip_map(&self.phi1c, |x, p| x * Complex64::from_polar(1.0, p.re))
    }
}

/// Limit-system states at `t₀ + j·dt/2`.
#[derive(Clone, Debug)]
pub struct LimitTrajectory {
    pub dt: f64,
    pub states: Vec<LimitPair>,
}

impl LimitTrajectory {
    /// Integrates the limit system from `initial` to `t_final` on the
    /// half-step grid of a corrector step close to `dt`.
    pub fn record(
        initial: &LimitPair,
        dt: f64,
        t_final: f64,
        nl: &Nonlinearity,
        weight: TimeWeight,
    ) -> Result<Self> {
        check_dt(dt)?;
        let span = t_final - initial.t;
        let steps = if span > 0.0 {
            ((span / dt) - 1e-9).ceil().max(1.0) as usize
        } else {
            0
        };
        let dt = if steps > 0 { span / steps as f64 } else { dt };
        let mut states = Vec::with_capacity(2 * steps + 1);
        states.push(initial.clone());
        for j in 1..=2 * steps {
            let mut next = limit_system_step(&states[j - 1], 0.5 * dt, nl, weight)?;
            next.t = initial.t + j as f64 * 0.5 * dt;
            states.push(next);
        }
        Ok(Self { dt, states })
    }

    pub fn start(&self) -> f64 {
        self.states[0].t
    }

    pub fn end(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.t)
    }

    /// Base state at full step `k`.
    pub fn at_step(&self, k: usize) -> Option<&LimitPair> {
        self.states.get(2 * k)
    }
}

struct BaseTerms {
    grad_phi: Vec<Field>,
    lap_phi: Field,
    a: Field,
    grad_a: Vec<Field>,
    lap_a: Field,
    /// `W w f′(w|a|²)`.
    k: Vec<f64>,
}

fn base_terms(base: &LimitPair, nl: &Nonlinearity, weight: &TimeWeight) -> BaseTerms {
    let mut grad_phi = spectral_gradient(&base.phi);
    grad_phi.iter_mut().for_each(make_real);
    BaseTerms {
        grad_phi,
        lap_phi: spectral_laplacian(&base.phi),
        a: base.a.clone(),
        grad_a: spectral_gradient(&base.a),
        lap_a: spectral_laplacian(&base.a),
        k: base
            .a
            .values()
            .iter()
            .map(|a| weight.coupling_slope(nl, base.t, a.norm_sqr()))
            .collect(),
    }
}

fn corrector_rhs(s: &OdeState, b: &BaseTerms) -> OdeState {
    let a1 = &s.fields[0];
    let p1 = &s.fields[1];
    let grid = a1.grid().clone();
    let grad_a1 = spectral_gradient(a1);
    let mut grad_p1 = spectral_gradient(p1);
    grad_p1.iter_mut().for_each(make_real);
    let lap_p1 = spectral_laplacian(p1);

    let adv_p1 = dot(&b.grad_phi, &grad_p1);
    let adv_a1 = dot(&b.grad_phi, &grad_a1);
    let cross = dot(&grad_p1, &b.grad_a);

    let nodes = grid.len();
    let mut dp = Vec::with_capacity(nodes);
    let mut da = Vec::with_capacity(nodes);
    let half_i = Complex64::new(0.0, 0.5);
    for i in 0..nodes {
        let a = b.a.values()[i];
        let x = a1.values()[i];
        dp.push(Complex64::new(
            -adv_p1.values()[i].re - 2.0 * (a.conj() * x).re * b.k[i],
            0.0,
        ));
        da.push(
            -adv_a1.values()[i] - cross.values()[i] - 0.5 * x * b.lap_phi.values()[i].re
                - 0.5 * a * lap_p1.values()[i].re
                + half_i * b.lap_a.values()[i],
        );
    }
    let mut dp = dealias(&Field::from_raw(grid.clone(), dp));
    make_real(&mut dp);
    OdeState {
        fields: alloc::vec![dealias(&Field::from_raw(grid, da)), dp],
        scalars: Vec::new(),
    }
}

/// Integrates the corrector with step `dt` up to `t_final`, calling
/// `observer` after every step (and once at the start).
pub fn corrector_evolve_with(
    trajectory: &LimitTrajectory,
    a1: &Field,
    dt: f64,
    t_final: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
    mut observer: impl FnMut(&CorrectorPair),
) -> Result<CorrectorPair> {
    check_dt(dt)?;
    let t0 = trajectory.start();
    if (dt - trajectory.dt).abs() > 1e-12 * dt {
        return Err(Error::TrajectoryMismatch);
    }
    let span = t_final - t0;
    let steps = (span / dt).round();
    if steps < 0.0 || (steps * dt - span).abs() > 1e-9 * dt.max(span.abs()) {
        return Err(Error::TrajectoryMismatch);
    }
    let steps = steps as usize;
    if 2 * steps + 1 > trajectory.states.len() {
        return Err(Error::TrajectoryMismatch);
    }
    for (j, s) in trajectory.states.iter().enumerate().take(2 * steps + 1) {
        if (s.t - (t0 + j as f64 * 0.5 * dt)).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::TrajectoryMismatch);
        }
    }
    let base0 = &trajectory.states[0];
    a1.ensure_same_grid(&base0.a)?;

    let mut state = CorrectorPair {
        a1c: a1.clone(),
        phi1c: Field::zeros(a1.grid()),
        t: t0,
    };
    observer(&state);
    let mut terms_start = base_terms(base0, nl, &weight);
    for k in 0..steps {
        let mid = base_terms(&trajectory.states[2 * k + 1], nl, &weight);
        let end = base_terms(&trajectory.states[2 * k + 2], nl, &weight);
        let y = OdeState {
            fields: alloc::vec![state.a1c.clone(), state.phi1c.clone()],
            scalars: Vec::new(),
        };
        let t = state.t;
        let next = rk4(&y, t, dt, |s, tau| {
            let b = if tau == t {
                &terms_start
            } else if tau == t + dt {
                &end
            } else {
                &mid
            };
            Ok(corrector_rhs(s, b))
        })?;
        let mut fields = next.fields.into_iter();
        let a1c = fields.next().expect("two fields");
        let mut phi1c = fields.next().expect("two fields");
        make_real(&mut phi1c);
        state = CorrectorPair {
            a1c,
            phi1c,
            t: t0 + (k + 1) as f64 * dt,
        };
        observer(&state);
        terms_start = end;
    }
    Ok(state)
}

pub fn corrector_evolve(
    trajectory: &LimitTrajectory,
    a1: &Field,
    dt: f64,
    t_final: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<CorrectorPair> {
    corrector_evolve_with(trajectory, a1, dt, t_final, nl, weight, |_| {})
}

/// `∂ₜφ⁽¹⁾` at `t = 0`: `−2Re(ā₀a₁)·f′(|a₀|²)` (with the time weight folded in).
pub fn initial_phase_rate(a0: &Field, a1: &Field, nl: &Nonlinearity, weight: TimeWeight, t0: f64) -> Result<Field> {
    a0.zip_map(a1, |a, b| {
        Complex64::new(-2.0 * (a.conj() * b).re * weight.coupling_slope(nl, t0, a.norm_sqr()), 0.0)
    })
}
