//! Eikonal/transport limit system
//!
//! ```text
//! ∂ₜφ + ½|∇φ|² + W(t)·f(w(t)|a|²) = 0
//! ∂ₜa + ∇φ·∇a + ½a·Δφ = 0
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::dynamics::ensure_real;
use crate::error::{Error, Result};
use crate::grid::{dealias, spectral_gradient, spectral_laplacian, spectral_partial, Field};
use crate::nonlinearity::{Nonlinearity, TimeWeight};

use super::{check_dt, dot, make_real, rk4, OdeState};

/// Default threshold on `max|∇²φ|` above which a caustic is declared.
pub const DEFAULT_CAUSTIC_TOL: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct LimitPair {
    pub a: Field,
    pub phi: Field,
    pub t: f64,
}

impl LimitPair {
    pub fn new(a: Field, phi: Field, t: f64) -> Result<Self> {
        a.ensure_same_grid(&phi)?;
        a.check_finite()?;
        phi.check_finite()?;
        ensure_real(&phi, "phase")?;
        Ok(Self { a, phi, t })
    }

    pub fn mass(&self) -> f64 {
        self.a.mass()
    }
}

pub(crate) fn limit_rhs(
    a: &Field,
    phi: &Field,
    t: f64,
    nl: &Nonlinearity,
    weight: &TimeWeight,
) -> (Field, Field) {
    let grad_phi = spectral_gradient(phi);
    let grad_a = spectral_gradient(a);
    let lap_phi = spectral_laplacian(phi);

    let speed2 = dot(&grad_phi, &grad_phi);
    let mut dphi = Field::from_raw(
        a.grid().clone(),
        speed2
            .values()
            .iter()
            .zip(a.values())
            .map(|(s, av)| (-0.5 * s.re - weight.coupling(nl, t, av.norm_sqr())).into())
            .collect(),
    );
    let advect = dot(&grad_phi, &grad_a);
    let da = Field::from_raw(
        a.grid().clone(),
        advect
            .values()
            .iter()
            .zip(a.values())
            .zip(lap_phi.values())
            .map(|((adv, av), lp)| -adv - 0.5 * av * lp.re)
            .collect(),
    );
    dphi = dealias(&dphi);
    make_real(&mut dphi);
    (dealias(&da), dphi)
}

/// `max_{i,j,x} |∂ᵢ∂ⱼφ|`.
pub fn max_hessian(phi: &Field) -> f64 {
    let dim = phi.grid().dim();
    let mut max: f64 = 0.0;
    for i in 0..dim {
        for j in i..dim {
            let mut alpha = [0u32; 3];
            alpha[i] += 1;
            alpha[j] += 1;
            let d = spectral_partial(phi, &alpha[..dim]);
            max = max.max(d.values().iter().map(|c| c.re.abs()).fold(0.0, f64::max));
        }
    }
    max
}

/// RK4 step with the default caustic threshold.
pub fn limit_system_step(
    state: &LimitPair,
    dt: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<LimitPair> {
    limit_system_step_with_tol(state, dt, nl, weight, DEFAULT_CAUSTIC_TOL)
}

pub fn limit_system_step_with_tol(
    state: &LimitPair,
    dt: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
    caustic_tol: f64,
) -> Result<LimitPair> {
    check_dt(dt)?;
    weight.validate()?;
    let y = OdeState {
        fields: alloc::vec![state.a.clone(), state.phi.clone()],
        scalars: Vec::new(),
    };
    let next = rk4(&y, state.t, dt, |s, t| {
        let (da, dphi) = limit_rhs(&s.fields[0], &s.fields[1], t, nl, &weight);
        Ok(OdeState {
            fields: alloc::vec![da, dphi],
            scalars: Vec::new(),
        })
    })
    .map_err(|e| match e {
        Error::NumericalInstability { .. } => Error::NumericalInstability {
            step: 1,
            time: state.t + dt,
        },
        other => other,
    })?;
    let mut fields = next.fields.into_iter();
    let a = fields.next().expect("two fields");
    let mut phi = fields.next().expect("two fields");
    make_real(&mut phi);
    let t = state.t + dt;
    let hessian = max_hessian(&phi);
    if hessian > caustic_tol {
        return Err(Error::Caustic { time: t, hessian });
    }
    Ok(LimitPair { a, phi, t })
}

/// Integrates to `t_final` with steps no larger than `dt`, landing exactly.
pub fn limit_evolve(
    state: &LimitPair,
    dt: f64,
    t_final: f64,
    nl: &Nonlinearity,
    weight: TimeWeight,
) -> Result<LimitPair> {
    check_dt(dt)?;
    let span = t_final - state.t;
    if span <= 0.0 {
        return Ok(state.clone());
    }
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut s = state.clone();
    for _ in 0..steps {
        s = limit_system_step(&s, h, nl, weight)?;
    }
    s.t = t_final;
    Ok(s)
}

/// `(ρ, v) = (|a|², ∇φ)`.
pub fn euler_variables(state: &LimitPair) -> (Field, Vec<Field>) {
    let rho = state.a.map(|c| c.norm_sqr().into());
    let mut v = spectral_gradient(&state.phi);
    v.iter_mut().for_each(make_real);
    (rho, v)
}
