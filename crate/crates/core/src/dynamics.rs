//! Strang-split pseudo-spectral solver for
//! `ih ∂ₜψ + (h²/2)Δψ = V ψ + W(t)·f(w(t)|ψ|²) ψ`.
//!
//! One step is half-kick, exact Fourier drift, half-kick. The kick is the
//! exact flow of the pointwise part (it leaves `|ψ|` unchanged), so the scheme
//! is unitary up to roundoff.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{config, Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::{Nonlinearity, Potential, TimeWeight};

/// `ψ` together with `h` and its current time.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    pub field: Field,
    pub h: f64,
    pub t: f64,
}

impl WaveFunction {
    pub fn new(field: Field, h: f64, t: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(config(alloc::format!("h must be positive (got {h})")));
        }
        if !t.is_finite() {
            return Err(config("time must be finite"));
        }
        field.check_finite()?;
        Ok(Self { field, h, t })
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }
}

pub const DEFAULT_MASS_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EvolveConfig {
    /// Requested step; `evolve` shrinks it slightly so steps land on `t_final`.
    pub dt: f64,
    /// Absolute final time.
    pub t_final: f64,
    pub nonlinearity: Nonlinearity,
    pub potential: Potential,
    pub time_weight: TimeWeight,
    /// Absolute times; each is recorded at the nearest step.
    pub snapshots: Vec<f64>,
    pub mass_tol: f64,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64, nonlinearity: Nonlinearity) -> Self {
        Self {
            dt,
            t_final,
            nonlinearity,
            potential: Potential::None,
            time_weight: TimeWeight::Identity,
            snapshots: Vec::new(),
            mass_tol: DEFAULT_MASS_TOL,
        }
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_time_weight(mut self, weight: TimeWeight) -> Self {
        self.time_weight = weight;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshots = times;
        self
    }

    pub fn with_mass_tol(mut self, tol: f64) -> Self {
        self.mass_tol = tol;
        self
    }

    /// Checks the step and snapshot window against a start time `t0`.
    pub fn validate(&self, t0: f64) -> Result<()> {
        let span = self.t_final - t0;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(config("dt must be positive"));
        }
        if !(span >= 0.0) {
            return Err(config("final time precedes the start time"));
        }
        if span > 0.0 && self.dt > span * (1.0 + 1e-12) {
            return Err(config("dt exceeds the integration window"));
        }
        if let Some(bad) = self
            .snapshots
            .iter()
            .find(|&&s| !(s >= t0 - 1e-12 && s <= self.t_final + 1e-12))
        {
            return Err(config(alloc::format!("snapshot time {bad} lies outside the run")));
        }
        if !(self.mass_tol > 0.0) {
            return Err(config("mass tolerance must be positive"));
        }
        self.nonlinearity.validate()?;
        self.potential.validate()?;
        self.time_weight.validate()
    }
}

/// `ψ = a₀·exp(iφ₀/h)` at `t = 0`.
pub fn init_data(a0: &Field, phi0: &Field, h: f64) -> Result<WaveFunction> {
    a0.ensure_same_grid(phi0)?;
    ensure_real(phi0, "initial phase")?;
    let field = a0.zip_map(phi0, |a, p| a * Complex64::from_polar(1.0, p.re / h))?;
    WaveFunction::new(field, h, 0.0)
}

pub(crate) fn ensure_real(f: &Field, what: &str) -> Result<()> {
    let tol = 1e-12 * f.max_abs().max(1.0);
    if f.max_imag() > tol {
        Err(Error::Domain(alloc::format!(
            "{what} must be real (max |Im| = {:e})",
            f.max_imag()
        )))
    } else {
        Ok(())
    }
}

/// Per-step diagnostics handed to the observer of [`evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: WaveFunction,
    /// In the order of `EvolveConfig::snapshots`, each stamped with its actual time.
    pub snapshots: Vec<WaveFunction>,
    pub steps: usize,
    pub dt: f64,
    pub max_mass_drift: f64,
}

/// Reusable step kernel: caches the drift multipliers and potential samples.
#[derive(Clone, Debug)]
pub struct Stepper {
    dt: f64,
    h: f64,
    drift: Vec<Complex64>,
    potential: Vec<f64>,
    nonlinearity: Nonlinearity,
    weight: TimeWeight,
}

impl Stepper {
    pub fn new(grid: &Grid, h: f64, dt: f64, cfg: &EvolveConfig) -> Result<Self> {
        let drift = grid
            .xi_squared()
            .iter()
            .map(|x2| Complex64::from_polar(1.0, -0.5 * h * dt * x2))
            .collect();
        Ok(Self {
            dt,
            h,
            drift,
            potential: cfg.potential.sample(grid)?,
            nonlinearity: cfg.nonlinearity.clone(),
            weight: cfg.time_weight,
        })
    }

    fn kick(&self, values: &mut [Complex64], t: f64) {
        let scale = -0.5 * self.dt / self.h;
        for (psi, v) in values.iter_mut().zip(&self.potential) {
            let y = psi.norm_sqr();
            let e = v + self.weight.coupling(&self.nonlinearity, t, y);
            *psi *= Complex64::from_polar(1.0, scale * e);
        }
    }

    /// Advances `ψ` by one step in place.
    pub fn step(&self, psi: &mut WaveFunction) {
        let grid = psi.field.grid().clone();
        let t = psi.t;
        self.kick(psi.field.values_mut(), t);
        let mut spec = grid.forward(psi.field.values());
        spec.iter_mut().zip(&self.drift).for_each(|(c, d)| *c *= d);
        let back = grid.inverse(spec);
        psi.field.values_mut().copy_from_slice(&back);
        self.kick(psi.field.values_mut(), t + self.dt);
        psi.t = t + self.dt;
    }
}

/// One Strang step of size `cfg.dt`.
pub fn strang_step(psi: &WaveFunction, cfg: &EvolveConfig) -> Result<WaveFunction> {
    cfg.nonlinearity.validate()?;
    cfg.potential.validate()?;
    cfg.time_weight.validate()?;
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(config("dt must be positive"));
    }
    psi.field.check_finite()?;
    let stepper = Stepper::new(psi.grid(), psi.h, cfg.dt, cfg)?;
    let mut next = psi.clone();
    stepper.step(&mut next);
    if next.field.check_finite().is_err() {
        return Err(Error::NumericalInstability {
            step: 1,
            time: next.t,
        });
    }
    Ok(next)
}

/// Integrates from `psi0.t` to `cfg.t_final`, reporting every step.
pub fn evolve_with(
    psi0: &WaveFunction,
    cfg: &EvolveConfig,
    mut observer: impl FnMut(&StepRecord),
) -> Result<Evolution> {
    cfg.validate(psi0.t)?;
    psi0.field.check_finite()?;
    let span = cfg.t_final - psi0.t;
    let steps = if span <= 0.0 {
        0
    } else {
        ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 { cfg.dt } else { span / steps as f64 };

    // snapshot targets as step indices
    let targets: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|s| {
            if steps == 0 {
                0
            } else {
                (((s - psi0.t) / dt).round().max(0.0) as usize).min(steps)
            }
        })
        .collect();
    let mut snapshots: Vec<Option<WaveFunction>> = alloc::vec![None; targets.len()];
    let record_snapshots = |step: usize, psi: &WaveFunction, out: &mut Vec<Option<WaveFunction>>| {
        for (slot, &target) in out.iter_mut().zip(&targets) {
            if target == step {
                *slot = Some(psi.clone());
            }
        }
    };

    let mass0 = psi0.field.mass();
    let mut psi = psi0.clone();
    observer(&StepRecord {
        step: 0,
        time: psi.t,
        mass: mass0,
        max_abs: psi.field.max_abs(),
    });
    record_snapshots(0, &psi, &mut snapshots);

    let stepper = Stepper::new(psi.grid(), psi.h, dt, cfg)?;
    let mut max_drift: f64 = 0.0;
    for step in 1..=steps {
        stepper.step(&mut psi);
        if step == steps {
            psi.t = cfg.t_final;
        }
        if psi.field.check_finite().is_err() {
            return Err(Error::NumericalInstability { step, time: psi.t });
        }
        let mass = psi.field.mass();
        if mass0 > 0.0 {
            let drift = ((mass - mass0) / mass0).abs();
            max_drift = max_drift.max(drift);
            if drift > cfg.mass_tol {
                return Err(Error::MassDrift {
                    drift,
                    tol: cfg.mass_tol,
                    time: psi.t,
                });
            }
        }
        observer(&StepRecord {
            step,
            time: psi.t,
            mass,
            max_abs: psi.field.max_abs(),
        });
        record_snapshots(step, &psi, &mut snapshots);
    }

    Ok(Evolution {
        state: psi,
        snapshots: snapshots.into_iter().map(|s| s.expect("every target step is visited")).collect(),
        steps,
        dt,
        max_mass_drift: max_drift,
    })
}

pub fn evolve(psi0: &WaveFunction, cfg: &EvolveConfig) -> Result<Evolution> {
    evolve_with(psi0, cfg, |_| {})
}

/// Pointwise `a₀·exp(−i t f(|a₀|²))`, the weakly nonlinear limit for `φ₀ = 0`.
pub fn weak_transport_reference(a0: &Field, phi0: &Field, t: f64, nl: &Nonlinearity) -> Result<Field> {
    a0.ensure_same_grid(phi0)?;
    if phi0.max_abs() > 0.0 {
        return Err(Error::Unsupported(
            "weak transport reference is only available for zero initial phase".into(),
        ));
    }
    Ok(a0.map(|a| a * Complex64::from_polar(1.0, -t * nl.value(a.norm_sqr()))))
}

/// Knobs of the step-size rule in [`suggest_dt`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtRule {
    pub c_phase: f64,
    pub c_disp: f64,
    pub safety: f64,
}

impl Default for DtRule {
    fn default() -> Self {
        Self {
            c_phase: 0.1,
            c_disp: 1.0,
            safety: 0.9,
        }
    }
}

/// `dt = min(c_phase·h / max|V + f(4 max|a₀|²)|, c_disp·Δx²/h)·safety`.
///
/// The factor 4 leaves room for amplitude growth up to `2 max|a₀|`.
pub fn suggest_dt(
    a0: &Field,
    h: f64,
    nl: &Nonlinearity,
    potential: &Potential,
    rule: DtRule,
) -> Result<f64> {
    let grid = a0.grid();
    let amp2 = a0.values().iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let v = potential.sample(grid)?;
    let fmax = nl.value(4.0 * amp2).abs();
    let energy = v.iter().map(|x| (x + fmax).abs()).fold(fmax, f64::max);
    let dx = grid.spacing();
    let disp = rule.c_disp * dx * dx / h;
    let phase = if energy > 0.0 {
        rule.c_phase * h / energy
    } else {
        f64::INFINITY
    };
    Ok(phase.min(disp) * rule.safety)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn gaussian(grid: &Grid) -> Field {
        Field::from_real_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
    }

    #[test]
    fn init_data_examples() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let a0 = gaussian(&g);
        let psi = init_data(&a0, &Field::zeros(&g), 0.1).unwrap();
        assert!(psi.field.distance(&a0).unwrap() == 0.0);
        let zero = init_data(&Field::zeros(&g), &a0, 0.1).unwrap();
        assert_eq!(zero.field.max_abs(), 0.0);
        let phi = Field::from_real_fn(&g, |x| -0.5 * x[0] * x[0]);
        let psi = init_data(&a0, &phi, 0.1).unwrap();
        for (p, a) in psi.field.values().iter().zip(a0.values()) {
            assert_relative_eq!(p.norm(), a.norm(), max_relative = 1e-14);
        }
        let complex_phase = phi.map(|c| c + Complex64::new(0.0, 0.5));
        assert!(matches!(init_data(&a0, &complex_phase, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn free_single_mode_is_exact() {
        let g = Grid::new(1, 32, PI).unwrap();
        let m = 5.0;
        let psi = WaveFunction::new(Field::from_fn(&g, |x| Complex64::from_polar(1.0, m * x[0])), 0.3, 0.0).unwrap();
        let cfg = EvolveConfig::new(0.01, 0.01, Nonlinearity::Zero);
        let next = strang_step(&psi, &cfg).unwrap();
        let factor = Complex64::from_polar(1.0, -0.3 * 0.01 * m * m / 2.0);
        let expected = psi.field.scale(factor);
        assert!(next.field.distance(&expected).unwrap() < 1e-13);
        assert_relative_eq!(next.t, 0.01);
    }

    #[test]
    fn constant_cubic_data_rotates_exactly() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let c = Complex64::new(0.8, 0.3);
        let h = 0.1;
        let psi0 = WaveFunction::new(Field::constant(&g, c), h, 0.0).unwrap();
        let cfg = EvolveConfig::new(0.01, 1.0, Nonlinearity::Cubic);
        let out = evolve(&psi0, &cfg).unwrap();
        assert_eq!(out.steps, 100);
        let expected = Field::constant(&g, c * Complex64::from_polar(1.0, -c.norm_sqr() / h));
        let rel = out.state.field.distance(&expected).unwrap() / expected.norm_l2();
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn zero_horizon_returns_input() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let psi0 = WaveFunction::new(gaussian(&g), 0.1, 0.0).unwrap();
        let cfg = EvolveConfig::new(0.01, 0.0, Nonlinearity::Cubic).with_snapshots(alloc::vec![0.0]);
        let out = evolve(&psi0, &cfg).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.state.field.distance(&psi0.field).unwrap(), 0.0);
        assert_eq!(out.snapshots.len(), 1);
    }

    #[test]
    fn snapshots_land_on_nearest_step() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let psi0 = WaveFunction::new(gaussian(&g), 0.5, 0.0).unwrap();
        let cfg = EvolveConfig::new(0.1, 1.0, Nonlinearity::Cubic).with_snapshots(alloc::vec![0.33, 0.5]);
        let out = evolve(&psi0, &cfg).unwrap();
        assert_relative_eq!(out.snapshots[0].t, 0.3, epsilon = 1e-12);
        assert_relative_eq!(out.snapshots[1].t, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let psi0 = WaveFunction::new(gaussian(&g), 0.5, 0.0).unwrap();
        let bad_dt = EvolveConfig::new(2.0, 1.0, Nonlinearity::Cubic);
        assert!(matches!(evolve(&psi0, &bad_dt), Err(Error::Config(_))));
        let bad_snap = EvolveConfig::new(0.1, 1.0, Nonlinearity::Cubic).with_snapshots(alloc::vec![1.5]);
        assert!(matches!(evolve(&psi0, &bad_snap), Err(Error::Config(_))));
        assert!(WaveFunction::new(gaussian(&g), 0.0, 0.0).is_err());
    }

    #[test]
    fn mass_drift_is_reported() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let psi0 = WaveFunction::new(gaussian(&g), 0.5, 0.0).unwrap();
        // an absurd tolerance forces the error path
        let cfg = EvolveConfig::new(0.1, 1.0, Nonlinearity::Cubic).with_mass_tol(1e-300);
        match evolve(&psi0, &cfg) {
            Err(Error::MassDrift { tol, .. }) => assert_eq!(tol, 1e-300),
            Ok(out) => assert_eq!(out.max_mass_drift, 0.0),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn weak_reference_examples() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let a0 = gaussian(&g);
        let zero = Field::zeros(&g);
        let r = weak_transport_reference(&a0, &zero, 0.0, &Nonlinearity::Cubic).unwrap();
        assert_eq!(r.distance(&a0).unwrap(), 0.0);
        let c = Complex64::new(0.5, 0.0);
        let r = weak_transport_reference(&Field::constant(&g, c), &zero, 2.0, &Nonlinearity::Cubic).unwrap();
        let expected = c * Complex64::from_polar(1.0, -2.0 * 0.25);
        assert!((r.values()[7] - expected).norm() < 1e-15);
        assert!(matches!(
            weak_transport_reference(&a0, &a0, 1.0, &Nonlinearity::Cubic),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn suggested_dt_follows_phase_rule() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let a0 = gaussian(&g);
        let dt = suggest_dt(&a0, 0.01, &Nonlinearity::Cubic, &Potential::None, DtRule::default()).unwrap();
        assert_relative_eq!(dt, 0.1 * 0.01 / 4.0 * 0.9, max_relative = 1e-12);
    }
}
