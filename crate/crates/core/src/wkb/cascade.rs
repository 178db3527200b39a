//! Small-time Taylor coefficients of the limit system.
//!
//! Plugging `φ = Σ tʲφⱼ`, `a = Σ tʲaⱼ` into the limit system and matching
//! powers of `t` gives
//!
//! ```text
//! (j+1)·φⱼ₊₁ = −½ Σ_{l+m=j} ∇φₗ·∇φₘ − [tʲ] W(t)·f(w(t)·|a|²)
//! (j+1)·aⱼ₊₁ = −Σ_{l+m=j} (∇φₗ·∇aₘ + ½aₘΔφₗ)
//! ```
//!
//! The coefficient of `f∘(series)` is computed per node by truncated power
//! series arithmetic, so only nonlinearities with a closed series rule are
//! accepted. For the weak weight `W = t⁻²`, `w = tⁿ` (and `φ₀ = 0`) only the
//! powers `t^{nj−1}` of `φ` and `t^{nj}` of `a` are nonzero; the cascade then
//! stores that ladder.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::dynamics::ensure_real;
use crate::error::{config, Error, Result};
use crate::grid::{spectral_gradient, spectral_laplacian, Field};
use crate::nonlinearity::Nonlinearity;

use super::{dot, make_real};

/// Largest supported cascade order.
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CascadeVariant {
    /// Powers `tʲ` for both unknowns, no time weight.
    Standard,
    /// Weight `t⁻²f(tⁿ·)`; phase powers `t^{nj−1}`, amplitude powers `t^{nj}`.
    Weak { n: u32 },
}

#[derive(Clone, Debug)]
pub struct TaylorCascade {
    pub order: usize,
    pub variant: CascadeVariant,
    /// `φ₀ … φ_J` (ladder coefficients for the weak variant).
    pub phis: Vec<Field>,
    /// `a₀ … a_J`.
    pub amps: Vec<Field>,
}

impl TaylorCascade {
    /// Exponent of `t` multiplying `φⱼ`.
    pub fn phase_power(&self, j: usize) -> i32 {
        match self.variant {
            CascadeVariant::Standard => j as i32,
            CascadeVariant::Weak { n } => {
                if j == 0 {
                    0
                } else {
                    n as i32 * j as i32 - 1
                }
            }
        }
    }

    pub fn amplitude_power(&self, j: usize) -> i32 {
        match self.variant {
            CascadeVariant::Standard => j as i32,
            CascadeVariant::Weak { n } => n as i32 * j as i32,
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.order {
            Err(config(alloc::format!(
                "partial sum order {k} exceeds the cascade order {}",
                self.order
            )))
        } else {
            Ok(())
        }
    }

    /// `Σ_{j≤K} t^{p(j)} φⱼ`.
    pub fn phase_sum(&self, t: f64, k: usize) -> Result<Field> {
        self.check_order(k)?;
        Ok(partial_sum(&self.phis[..=k], |j| t.powi(self.phase_power(j))))
    }

    pub fn amplitude_sum(&self, t: f64, k: usize) -> Result<Field> {
        self.check_order(k)?;
        Ok(partial_sum(&self.amps[..=k], |j| t.powi(self.amplitude_power(j))))
    }
}

fn partial_sum(terms: &[Field], weight: impl Fn(usize) -> f64) -> Field {
    let grid = terms[0].grid().clone();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    for (j, term) in terms.iter().enumerate() {
        let w = weight(j);
        out.iter_mut().zip(term.values()).for_each(|(o, c)| *o += c * w);
    }
    Field::from_raw(grid, out)
}

/// Truncated power series `f(z(t))` from the coefficients of `z`.
pub(crate) fn compose(nl: &Nonlinearity, z: &[f64]) -> Result<Vec<f64>> {
    let len = z.len();
    match nl {
        Nonlinearity::Zero => Ok(alloc::vec![0.0; len]),
        Nonlinearity::Cubic => Ok(z.to_vec()),
        Nonlinearity::Power { coupling, exponent } => {
            let mut acc = z.to_vec();
            for _ in 1..*exponent {
                acc = series_mul(&acc, z);
            }
            Ok(acc.into_iter().map(|c| c * coupling).collect())
        }
        Nonlinearity::Scaled { base, epsilon, k } => {
            let c = epsilon.powf(*k);
            let scaled: Vec<f64> = z.iter().map(|v| v * c).collect();
            compose(base, &scaled)
        }
        Nonlinearity::Saturating { amplitude, scale } => {
            let u: Vec<f64> = z.iter().map(|v| v / scale).collect();
            Ok(tanh_series(&u).into_iter().map(|g| g * amplitude).collect())
        }
        Nonlinearity::Custom { .. } => Err(Error::Unsupported(
            "the Taylor cascade needs a nonlinearity with a series rule".into(),
        )),
    }
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| (0..=k).map(|l| a[l] * b[k - l]).sum())
        .collect()
}

/// `g = tanh(u)` from `g′ = (1 − g²)u′`: `k·gₖ = Σ_{j=1}^{k} j·uⱼ·(1−g²)_{k−j}`.
fn tanh_series(u: &[f64]) -> Vec<f64> {
    let len = u.len();
    let mut g = alloc::vec![0.0; len];
    let mut s = alloc::vec![0.0; len]; // 1 − g²
    g[0] = u[0].tanh();
    s[0] = 1.0 - g[0] * g[0];
    for k in 1..len {
        g[k] = (1..=k).map(|j| j as f64 * u[j] * s[k - j]).sum::<f64>() / k as f64;
        s[k] = -(0..=k).map(|l| g[l] * g[k - l]).sum::<f64>();
    }
    g
}

/// Taylor coefficients up to order `J` (at most [`MAX_ORDER`]).
pub fn taylor_cascade(
    a0: &Field,
    phi0: &Field,
    order: usize,
    nl: &Nonlinearity,
    variant: CascadeVariant,
) -> Result<TaylorCascade> {
    a0.ensure_same_grid(phi0)?;
    ensure_real(phi0, "initial phase")?;
    if order > MAX_ORDER {
        return Err(config(alloc::format!(
            "cascade order {order} exceeds the cap {MAX_ORDER}"
        )));
    }
    // representative evaluation to reject unsupported laws early
    compose(nl, &[0.0])?;
    let (series_len, shift, n) = match variant {
        CascadeVariant::Standard => (order, 0usize, 0usize),
        CascadeVariant::Weak { n } => {
            if n < 2 {
                return Err(config("the weak cascade needs n >= 2"));
            }
            if phi0.max_abs() > 0.0 {
                return Err(Error::Unsupported(
                    "the weak cascade assumes a zero initial phase".into(),
                ));
            }
            (n as usize * order, 2usize, n as usize)
        }
    };

    let grid = a0.grid().clone();
    let nodes = grid.len();
    let mut phis: Vec<Field> = alloc::vec![phi0.real_part()];
    let mut amps: Vec<Field> = alloc::vec![a0.clone()];
    let mut grad_phi: Vec<Vec<Field>> = alloc::vec![spectral_gradient(&phis[0])];
    let mut lap_phi: Vec<Field> = alloc::vec![spectral_laplacian(&phis[0])];
    let mut grad_a: Vec<Vec<Field>> = alloc::vec![spectral_gradient(&amps[0])];

    for j in 0..series_len {
        // [tʲ] of |∇φ|² and of the transport terms
        let mut speed = alloc::vec![0.0; nodes];
        let mut transport = alloc::vec![Complex64::new(0.0, 0.0); nodes];
        for l in 0..=j {
            let m = j - l;
            let pp = dot(&grad_phi[l], &grad_phi[m]);
            speed.iter_mut().zip(pp.values()).for_each(|(s, c)| *s += c.re);
            let pa = dot(&grad_phi[l], &grad_a[m]);
            for i in 0..nodes {
                transport[i] += pa.values()[i] + 0.5 * amps[m].values()[i] * lap_phi[l].values()[i].re;
            }
        }

        // [tʲ] of W(t)·f(w(t)·|a|²)
        let needed = j + shift; // highest power of z(t) = w(t)·y(t) that enters
        let mut coupling = alloc::vec![0.0; nodes];
        let mut y = alloc::vec![0.0; needed + 1];
        for (i, slot) in coupling.iter_mut().enumerate() {
            y.iter_mut().for_each(|v| *v = 0.0);
            // z_k = y_{k−n} with y_m = Σ_{l+r=m} a_l·conj(a_r)
            for (k, zk) in y.iter_mut().enumerate() {
                if k < n {
                    continue;
                }
                let m = k - n;
                if m >= amps.len() {
                    continue;
                }
                *zk = (0..=m)
                    .map(|l| (amps[l].values()[i] * amps[m - l].values()[i].conj()).re)
                    .sum();
            }
            let f = compose(nl, &y)?;
            *slot = f[needed];
        }

        let inv = 1.0 / (j + 1) as f64;
        let phi_next: Vec<Complex64> = (0..nodes)
            .map(|i| Complex64::new((-0.5 * speed[i] - coupling[i]) * inv, 0.0))
            .collect();
        let a_next: Vec<Complex64> = transport.iter().map(|c| -c * inv).collect();
        let mut phi_next = Field::from_raw(grid.clone(), phi_next);
        make_real(&mut phi_next);
        let a_next = Field::from_raw(grid.clone(), a_next);
        grad_phi.push(spectral_gradient(&phi_next));
        lap_phi.push(spectral_laplacian(&phi_next));
        grad_a.push(spectral_gradient(&a_next));
        phis.push(phi_next);
        amps.push(a_next);
    }

    let (phis, amps) = match variant {
        CascadeVariant::Standard => (phis, amps),
        CascadeVariant::Weak { n } => {
            let n = n as usize;
            let ladder_phi = core::iter::once(phis[0].clone())
                .chain((1..=order).map(|j| phis[n * j - 1].clone()))
                .collect();
            let ladder_amp = (0..=order).map(|j| amps[n * j].clone()).collect();
            (ladder_phi, ladder_amp)
        }
    };
    Ok(TaylorCascade {
        order,
        variant,
        phis,
        amps,
    })
}

/// `a₀·exp((i/h)·Σ_{j≤K} t^{p(j)} φⱼ)`.
pub fn phase_approximant(cascade: &TaylorCascade, a0: &Field, t: f64, h: f64, k: usize) -> Result<Field> {
    let phase = cascade.phase_sum(t, k)?;
    a0.zip_map(&phase, |a, p| a * Complex64::from_polar(1.0, p.re / h))
}
