//! WKB hierarchy for `ih ∂ₜu + (h²/2)Δu = W(t)·f(w(t)|u|²)u`.
//!
//! - [`limit`]: the eikonal/transport pair `(a, φ)` reached as `h → 0`,
//!   and its Euler form `(ρ, v) = (|a|², ∇φ)`.
//! - [`grenier`]: the exact amplitude/velocity system `(α, v)` with
//!   `u = α·e^{iφ/h}`, `v = ∇φ`, which stays hyperbolic uniformly in `h`.
//! - [`cascade`]: small-time Taylor coefficients of `(a, φ)` and the phase
//!   approximants built from them.
//! - [`corrector`]: the linearized system for the first corrector
//!   `(a⁽¹⁾, φ⁽¹⁾)` along a stored limit trajectory.
//!
//! All integrators are classical RK4 in time with Fourier derivatives in
//! space; the nonlinear right-hand sides are dealiased with the 2/3 rule.

pub mod cascade;
pub mod corrector;
pub mod grenier;
pub mod limit;

pub use cascade::{phase_approximant, taylor_cascade, CascadeVariant, TaylorCascade};
pub use corrector::{corrector_evolve, CorrectorPair, LimitTrajectory};
pub use grenier::{grenier_energy, grenier_step, phase_from_velocity, HyperbolicState};
pub use limit::{euler_variables, limit_system_step, LimitPair, DEFAULT_CAUSTIC_TOL};

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Pointwise `Σ_k a_k·b_k`.
pub(crate) fn dot(a: &[Field], b: &[Field]) -> Field {
    let grid = a[0].grid();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    for (ak, bk) in a.iter().zip(b) {
        for ((o, x), y) in out.iter_mut().zip(ak.values()).zip(bk.values()) {
            *o += x * y;
        }
    }
    Field::from_raw(grid.clone(), out)
}

/// Sets imaginary parts to zero in place (phases and velocities are real;
/// spectral roundoff leaves ~1e-16 imaginary noise).
pub(crate) fn make_real(f: &mut Field) {
    f.values_mut().iter_mut().for_each(|c| c.im = 0.0);
}

/// Snapshot of an ODE system made of lattice fields plus a few scalars.
#[derive(Clone, Debug)]
pub(crate) struct OdeState {
    pub fields: Vec<Field>,
    pub scalars: Vec<f64>,
}

impl OdeState {
    fn axpy(&self, k: &OdeState, c: f64) -> OdeState {
        OdeState {
            fields: self
                .fields
                .iter()
                .zip(&k.fields)
                .map(|(x, y)| {
                    let values = x.values().iter().zip(y.values()).map(|(a, b)| a + b * c).collect();
                    Field::from_raw(x.grid().clone(), values)
                })
                .collect(),
            scalars: self.scalars.iter().zip(&k.scalars).map(|(a, b)| a + b * c).collect(),
        }
    }

    fn check_finite(&self, step_time: f64) -> Result<()> {
        let bad_field = self.fields.iter().any(|f| f.check_finite().is_err());
        let bad_scalar = self.scalars.iter().any(|s| !s.is_finite());
        if bad_field || bad_scalar {
            Err(Error::NumericalInstability {
                step: 1,
                time: step_time,
            })
        } else {
            Ok(())
        }
    }
}

/// One classical RK4 step.
pub(crate) fn rk4(
    y: &OdeState,
    t: f64,
    dt: f64,
    rhs: impl Fn(&OdeState, f64) -> Result<OdeState>,
) -> Result<OdeState> {
    let k1 = rhs(y, t)?;
    let k2 = rhs(&y.axpy(&k1, 0.5 * dt), t + 0.5 * dt)?;
    let k3 = rhs(&y.axpy(&k2, 0.5 * dt), t + 0.5 * dt)?;
    let k4 = rhs(&y.axpy(&k3, dt), t + dt)?;
    let next = y
        .axpy(&k1, dt / 6.0)
        .axpy(&k2, dt / 3.0)
        .axpy(&k3, dt / 3.0)
        .axpy(&k4, dt / 6.0);
    next.check_finite(t + dt)?;
    Ok(next)
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(crate::error::config("time step must be positive"))
    }
}
