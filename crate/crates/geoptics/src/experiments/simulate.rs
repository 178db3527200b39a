use geoptics_core::approx::ode_solution;
use geoptics_core::dynamics::{evolve_with, init_data, suggest_dt, DtRule, EvolveConfig, Stepper, WaveFunction};
use geoptics_core::grid::sobolev_norm;
use geoptics_core::Potential;

use super::{build_data, build_phase, fmt_list, sweep, Check, Report};
use crate::config::{OdeBoundConfig, SimulateConfig};
use crate::error::Result;
use crate::io::LogLine;

/// Single trajectory with a run log, optional snapshots and an optional
/// comparison with the Laplacian-free solution.
pub fn run_simulate(cfg: &SimulateConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let phi0 = build_phase(&cfg.phi0, &grid, seed)?;
    let nl = cfg.nonlinearity.build()?;
    let potential = cfg.potential.build()?;
    let psi0 = init_data(&a0, &phi0, cfg.h)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => suggest_dt(&a0, cfg.h, &nl, &potential, DtRule::default())?,
    };
    let ecfg = EvolveConfig::new(dt, cfg.t_final, nl.clone())
        .with_potential(potential)
        .with_snapshots(cfg.snapshots.clone());
    let mut log = Vec::new();
    let run = evolve_with(&psi0, &ecfg, |r| log.push(LogLine::from(r)))?;

    let mut report = Report::new("simulate", &["step", "time", "mass", "max_abs"]);
    report.rows = log
        .iter()
        .map(|l| vec![l.step as f64, l.time, l.mass, l.max_abs])
        .collect();
    report.run_log = log;
    report.absorb_drift(run.max_mass_drift);
    report.set("h", cfg.h);
    report.set("dt", run.dt);
    report.set("steps", run.steps);
    report.set("final_mass", run.state.field.mass());
    if cfg.compare_to_ode {
        let ode = ode_solution(&psi0.field, cfg.t_final, cfg.h, &nl);
        let gap = run.state.field.distance(&ode)?;
        let rel = gap / ode.norm_l2().max(f64::MIN_POSITIVE);
        report.set("ode_gap", gap);
        report.set("ode_relative_gap", rel);
    }
    report.checks.push(Check::new(
        "mass_conserved",
        run.max_mass_drift <= 1e-8,
        format!("max relative drift {:.3e}", run.max_mass_drift),
    ));
    report.fields.push(("final".into(), run.state.field.clone()));
    for (i, snap) in run.snapshots.iter().enumerate() {
        report.fields.push((format!("snapshot_{i}"), snap.field.clone()));
    }
    Ok(report)
}

/// `θ = 1/(1 + 2σk)`.
pub fn log_time_exponent(sigma: u32, k: f64) -> f64 {
    1.0 / (1.0 + 2.0 * sigma as f64 * k)
}

/// `E(h) = sup_{[0, c₀h|ln h|^θ]} ‖u − ode‖_{Hᵏ}` over an h-sweep.
pub fn run_ode_bound(cfg: &OdeBoundConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let nl = cfg.nonlinearity.build()?;
    let theta = log_time_exponent(cfg.nonlinearity.power_exponent(), cfg.sobolev_index);
    let k = cfg.sobolev_index;

    let rows = sweep(&cfg.h_list, |h| {
        let lnh = h.ln().abs();
        let horizon = cfg.c0 * h * lnh.powf(theta);
        let dt = suggest_dt(&a0, h, &nl, &Potential::None, DtRule::default())?.min(horizon / 64.0);
        let steps = (horizon / dt).ceil() as usize;
        let dt = horizon / steps as f64;
        let ecfg = EvolveConfig::new(dt, horizon, nl.clone());
        let stepper = Stepper::new(&grid, h, dt, &ecfg)?;
        let mut psi = WaveFunction::new(a0.clone(), h, 0.0)?;
        let m0 = psi.field.mass();
        let mut worst: f64 = 0.0;
        let mut drift: f64 = 0.0;
        for _ in 0..steps {
            stepper.step(&mut psi);
            psi.field.check_finite()?;
            drift = drift.max(((psi.field.mass() - m0) / m0).abs());
            let ode = ode_solution(&a0, psi.t, h, &nl);
            worst = worst.max(sobolev_norm(&psi.field.sub(&ode)?, k)?);
        }
        let norm_cfg = h * lnh.powf(cfg.log_exponent);
        let norm_derived = h * lnh.powf(4.0 * theta);
        Ok((vec![h, horizon, worst, worst / norm_cfg, worst / norm_derived], drift))
    })?;

    let mut report = Report::new(
        "ode_bound",
        &["h", "horizon", "sup_error", "normalized", "normalized_derived"],
    );
    for (row, drift) in rows {
        report.absorb_drift(drift);
        report.rows.push(row);
    }
    let normalized = report.column("normalized").expect("column");
    let derived = report.column("normalized_derived").expect("column");
    let errors = report.column("sup_error").expect("column");
    let first = normalized[0];
    let max = normalized.iter().cloned().fold(0.0, f64::max);
    let min = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    report.set("theta", theta);
    report.set("c0", cfg.c0);
    report.set("log_exponent", cfg.log_exponent);
    report.set("derived_log_exponent", 4.0 * theta);
    report.set("normalized_growth", max / first);
    report.set("normalized_spread", max / min);
    let dmax = derived.iter().cloned().fold(0.0, f64::max);
    report.set("derived_normalized_growth", dmax / derived[0]);
    // fitted E ≈ C·h^p, for the record
    let fit = geoptics_core::fit::power_law_fit(&cfg.h_list, &errors)?;
    report.set("fitted_h_exponent", fit.slope);
    report.set("fitted_constant", fit.intercept.exp());
    report.checks.push(Check::new(
        "normalized_error_bounded",
        max <= 3.0 * first,
        format!(
            "E/(h|ln h|^{}) = {}; must stay below 3x its value at the largest h",
            cfg.log_exponent,
            fmt_list(&normalized)
        ),
    ));
    Ok(report)
}
