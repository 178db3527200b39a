use geoptics_core::dynamics::{evolve, EvolveConfig, WaveFunction};
use geoptics_core::transforms::{
    conformal_h, conformal_t0, conformal_transform, lens_transform, ConformalDirection, LensDirection, TargetGrid,
    TransformChecks,
};
use geoptics_core::{Complex64, Field, Nonlinearity, Potential, TimeWeight};

use super::{build_data, Check, Report};
use crate::config::{ConformalCheck, FramesConfig, LensCheck};
use crate::error::Result;

const UNITARITY_TOL: f64 = 1e-6;
const LENS_TOL: f64 = 1e-4;
const CONFORMAL_TOL: f64 = 1e-3;

fn relative_norm_error(mapped: &Field, source: &Field) -> f64 {
    (mapped.norm_l2() - source.norm_l2()).abs() / source.norm_l2()
}

/// `(norm error, round-trip error, trapped-vs-free gap)`.
fn lens(cfg: &LensCheck, seed: u64) -> Result<(f64, f64, f64, f64)> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let checks = TransformChecks::default();
    let tau = cfg.t.atan();

    let free = lens_transform(&a0, tau, cfg.h, LensDirection::ToFree, TargetGrid::Same, checks)?;
    let norm_err = relative_norm_error(&free.field, &a0);
    let back = lens_transform(&free.field, free.time, cfg.h, LensDirection::FromFree, TargetGrid::Same, checks)?;
    let round_trip = back.field.distance(&a0)? / a0.norm_l2();

    let psi0 = WaveFunction::new(a0.clone(), cfg.h, 0.0)?;
    let trapped = evolve(
        &psi0,
        &EvolveConfig::new(cfg.dt, tau, Nonlinearity::Zero).with_potential(Potential::harmonic(1.0)?),
    )?;
    let untrapped = evolve(&psi0, &EvolveConfig::new(cfg.dt, cfg.t, Nonlinearity::Zero))?;
    let mapped = lens_transform(&trapped.state.field, tau, cfg.h, LensDirection::ToFree, TargetGrid::Same, checks)?;
    let gap = mapped.field.distance(&untrapped.state.field)?;
    Ok((norm_err, round_trip, gap, trapped.max_mass_drift.max(untrapped.max_mass_drift)))
}

/// `(norm error, round-trip error, two-solver gap)`.
fn conformal(cfg: &ConformalCheck, seed: u64) -> Result<(f64, f64, f64, f64)> {
    let gx = cfg.grid.resolve()?;
    let n = gx.dim() as u32;
    let gamma = cfg.k / n as f64;
    let eps = cfg.epsilon;
    let checks = TransformChecks::default();
    let a0 = build_data(&cfg.a0, &gx, seed)?;
    let u0 = a0.map_with_position(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(1.0, -r2 / (2.0 * eps))
    });

    let nl_x = Nonlinearity::scaled(Nonlinearity::Cubic, eps, cfg.k)?;
    let ux = evolve(&WaveFunction::new(u0, eps, 0.0)?, &EvolveConfig::new(cfg.dt, cfg.t_mid, nl_x))?;
    let psi = conformal_transform(
        &ux.state.field,
        cfg.t_mid,
        eps,
        gamma,
        ConformalDirection::ToPsi,
        TargetGrid::Rescaled,
        checks,
    )?;
    let norm_err = relative_norm_error(&psi.field, &ux.state.field);
    let back = conformal_transform(&psi.field, psi.time, eps, gamma, ConformalDirection::FromPsi, TargetGrid::Rescaled, checks)?;
    let back = Field::new(gx.clone(), back.field.into_values())?;
    let round_trip = back.distance(&ux.state.field)? / ux.state.field.norm_l2();

    let gpsi = psi.field.grid().clone();
    let a0p = build_data(&cfg.a0, &gpsi, seed)?;
    let pcfg = EvolveConfig::new(cfg.dt, psi.time, Nonlinearity::Cubic).with_time_weight(TimeWeight::Weak { n });
    let direct = evolve(&WaveFunction::new(a0p, conformal_h(eps, gamma), conformal_t0(eps, gamma))?, &pcfg)?;
    let gap = direct.state.field.distance(&psi.field)?;
    Ok((norm_err, round_trip, gap, ux.max_mass_drift.max(direct.max_mass_drift)))
}

/// Unitarity and two-solver checks of the lens and conformal transforms.
pub fn run_frames(cfg: &FramesConfig, seed: u64) -> Result<Report> {
    let (l_norm, l_trip, l_gap, l_drift) = lens(&cfg.lens, seed)?;
    let (c_norm, c_trip, c_gap, c_drift) = conformal(&cfg.conformal, seed)?;
    let mut report = Report::new(
        "frames",
        &[
            "lens_norm_error", "lens_round_trip", "lens_equivalence_gap", "conformal_norm_error",
            "conformal_round_trip", "conformal_cross_gap",
        ],
    );
    report.rows.push(vec![l_norm, l_trip, l_gap, c_norm, c_trip, c_gap]);
    report.absorb_drift(l_drift.max(c_drift));
    report.checks.push(Check::new(
        "lens_unitary",
        l_norm < UNITARITY_TOL && l_trip < UNITARITY_TOL,
        format!("norm error {l_norm:.3e}, round trip {l_trip:.3e}"),
    ));
    report.checks.push(Check::new(
        "lens_linear_equivalence",
        l_gap < LENS_TOL,
        format!("trapped vs free gap {l_gap:.3e}"),
    ));
    report.checks.push(Check::new(
        "conformal_unitary",
        c_norm < UNITARITY_TOL && c_trip < UNITARITY_TOL,
        format!("norm error {c_norm:.3e}, round trip {c_trip:.3e}"),
    ));
    report.checks.push(Check::new(
        "conformal_cross_validation",
        c_gap < CONFORMAL_TOL,
        format!("direct vs transformed gap {c_gap:.3e}"),
    ));
    Ok(report)
}
