//! Weakly nonlinear focusing problem, solved in the rescaled frame.
//!
//! With `γ = k/n` the rescaled unknown ψ obeys a semiclassical equation
//! with `h = ε^{1−γ}`, started at `s = t₀ = ε^γ` from `a₀` itself. The
//! original time is recovered as `t = 1 − t₀/s` (focusing) or
//! `t = arctan(s/t₀ − 1)` (unit harmonic trap), so a divergence at an
//! ε-independent ψ-time lands ever closer to the focal time in the
//! original frame.

use geoptics_core::dynamics::{evolve, suggest_dt, DtRule, EvolveConfig, WaveFunction};
use geoptics_core::transforms::{
    conformal_h, conformal_t0, conformal_transform, ConformalDirection, TargetGrid, TransformChecks,
};
use geoptics_core::{Complex64, Error as CoreError, Field, Nonlinearity, Potential, TimeWeight};

use super::{build_data, fmt_list, run_pair, slope, strictly_decreasing, strictly_increasing, sweep, Check, Report, GAP_FRACTION};
use crate::config::{CorWeakCase, CorWeakConfig, CorWeakPerturbation, FrameCheck};
use crate::error::{HarnessError, Result};

const FRAME_TOL: f64 = 1e-3;

fn weight(case: &CorWeakCase, n: u32, t0: f64) -> Result<TimeWeight> {
    match case {
        CorWeakCase::Focusing => Ok(TimeWeight::Weak { n }),
        CorWeakCase::Harmonic { omega } if (*omega - 1.0).abs() < 1e-14 => Ok(TimeWeight::ShiftedWeak { n, t0 }),
        CorWeakCase::Harmonic { omega } => Err(HarnessError::config(format!(
            "only the unit trap is supported (omega = {omega}); rescale space and time to omega = 1"
        ))),
    }
}

/// Original-frame time of ψ-time `s`.
fn x_time(case: &CorWeakCase, s: f64, t0: f64) -> f64 {
    match case {
        CorWeakCase::Focusing => 1.0 - t0 / s,
        CorWeakCase::Harmonic { .. } => (s / t0 - 1.0).atan(),
    }
}

/// Distance to the focal time: `1 − T` or `cos T`.
fn concentration(case: &CorWeakCase, t: f64) -> f64 {
    match case {
        CorWeakCase::Focusing => 1.0 - t,
        CorWeakCase::Harmonic { .. } => t.cos(),
    }
}

fn box_error(e: CoreError, half_width: f64) -> HarnessError {
    match e {
        CoreError::BoundaryMass { fraction } => HarnessError::config(format!(
            "the rescaled solution leaves the box (boundary mass fraction {fraction:.2e}); \
             increase half_width beyond {half_width}"
        )),
        other => other.into(),
    }
}

pub fn run_cor_weak(cfg: &CorWeakConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let n = grid.dim() as u32;
    let gamma = cfg.k / n as f64;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let a0_norm = a0.norm_l2();
    let (b, exponent) = match &cfg.perturbation {
        CorWeakPerturbation::A1 { a1 } => (build_data(a1, &grid, seed.wrapping_add(1))?, 1.0 - gamma),
        CorWeakPerturbation::Delta { b0, order } => (
            build_data(b0, &grid, seed.wrapping_add(1))?,
            1.0 - gamma - 1.0 / *order as f64,
        ),
    };
    let control = b.max_abs() == 0.0;
    let threshold = GAP_FRACTION * a0_norm;
    let nl = Nonlinearity::Cubic;

    let rows = sweep(&cfg.eps_list, |eps| {
        let h = conformal_h(eps, gamma);
        let t0 = conformal_t0(eps, gamma);
        if cfg.psi_end <= t0 {
            return Err(HarnessError::config(format!("psi_end must exceed the start time {t0:.4}")));
        }
        let w = weight(&cfg.case, n, t0)?;
        let size = eps.powf(exponent);
        let v_data = a0.add(&b.scale_real(size))?;
        let u0 = WaveFunction::new(a0.clone(), h, t0)?;
        let v0 = WaveFunction::new(v_data.clone(), h, t0)?;
        let dt = suggest_dt(&a0, h, &nl, &Potential::None, DtRule::default())?
            .min(suggest_dt(&v_data, h, &nl, &Potential::None, DtRule::default())?);
        let ecfg = EvolveConfig::new(dt, cfg.psi_end, nl.clone()).with_time_weight(w);
        let gap0 = u0.field.distance(&v0.field)?;
        let mut s_div = f64::NAN;
        let run = run_pair(&u0, &v0, &ecfg, &ecfg, |s, u, v| {
            if s_div.is_nan() && u.distance(v).expect("same grid") >= threshold {
                s_div = s;
            }
        })?;
        let gap_end = run.u.field.distance(&run.v.field)?;
        let ratio = if gap0 > 0.0 { gap_end / gap0 } else { 1.0 };
        let (t_stab, tau) = if s_div.is_nan() {
            (f64::NAN, f64::NAN)
        } else {
            let s_stab = t0 + 0.5 * (s_div - t0);
            let t_stab = x_time(&cfg.case, s_stab, t0);
            (t_stab, x_time(&cfg.case, s_div, t0) - t_stab)
        };
        let conc = concentration(&cfg.case, t_stab);
        Ok((
            vec![eps, h, t0, size, gap0, gap_end, ratio, s_div, t_stab, tau, conc],
            run.max_drift,
        ))
    })
    .map_err(|e| match e {
        HarnessError::Core(c) => box_error(c, grid.half_width()),
        other => other,
    })?;

    let mut report = Report::new(
        "cor_weak",
        &[
            "epsilon", "h", "t0", "perturbation_size", "gap_initial", "gap_final", "ratio", "psi_divergence_time",
            "stability_time", "divergence_delay", "concentration_scale",
        ],
    );
    for (row, drift) in rows {
        report.absorb_drift(drift);
        report.rows.push(row);
    }
    report.set("gamma", gamma);
    report.set("threshold", threshold);
    report.set("control", control);
    let gap_end = report.column("gap_final").expect("column");
    let s_div = report.column("psi_divergence_time").expect("column");

    if control {
        report.checks.push(Check::new(
            "control_no_divergence",
            gap_end.iter().all(|g| *g == 0.0) && s_div.iter().all(|s| s.is_nan()),
            format!("final gaps {}", fmt_list(&gap_end)),
        ));
    } else {
        let ratio = report.column("ratio").expect("column");
        let t_stab = report.column("stability_time").expect("column");
        let tau = report.column("divergence_delay").expect("column");
        let conc = report.column("concentration_scale").expect("column");
        let diverged = s_div.iter().all(|s| s.is_finite());
        report.checks.push(Check::new(
            "divergence_observed",
            diverged,
            format!("first ψ-time with gap >= {threshold:.3e}: {}", fmt_list(&s_div)),
        ));
        report.checks.push(Check::new("ratio_increasing", strictly_increasing(&ratio), fmt_list(&ratio)));
        report.checks.push(Check::new(
            "stability_time_approaches_focus",
            diverged && strictly_increasing(&t_stab) && concentration_positive(&conc),
            format!("T = {}", fmt_list(&t_stab)),
        ));
        report.checks.push(Check::new(
            "divergence_delay_shrinks",
            diverged && strictly_decreasing(&tau),
            format!("tau = {}", fmt_list(&tau)),
        ));
        if diverged {
            let fitted = slope(&cfg.eps_list, &conc)?;
            report.set("concentration_exponent", fitted);
            report.set("concentration_exponent_predicted", exponent_prediction(cfg, gamma));
        }
    }

    if let Some(fc) = &cfg.frame_check {
        frame_check(cfg, fc, &b, exponent, &mut report, seed)?;
    }
    Ok(report)
}

fn concentration_positive(conc: &[f64]) -> bool {
    conc.iter().all(|c| *c > 0.0)
}

/// `γ` for the a₁ variant, `γ − 1/N` for the δ variant.
fn exponent_prediction(cfg: &CorWeakConfig, gamma: f64) -> f64 {
    match &cfg.perturbation {
        CorWeakPerturbation::A1 { .. } => gamma,
        CorWeakPerturbation::Delta { order, .. } => gamma - 1.0 / *order as f64,
    }
}

/// Solves the original problem directly at the largest ε and compares it,
/// after the transform, with the ψ-frame solver on the matching grid.
fn frame_check(
    cfg: &CorWeakConfig,
    fc: &FrameCheck,
    b: &Field,
    exponent: f64,
    report: &mut Report,
    seed: u64,
) -> Result<()> {
    if !matches!(cfg.case, CorWeakCase::Focusing) {
        return Err(HarnessError::config("the frame check is implemented for the focusing case only"));
    }
    let gx = cfg.grid.resolve()?;
    let n = gx.dim() as u32;
    let gamma = cfg.k / n as f64;
    let eps = cfg.eps_list[0];
    let h = conformal_h(eps, gamma);
    let t0 = conformal_t0(eps, gamma);
    let a0 = build_data(&cfg.a0, &gx, seed)?;
    let size = eps.powf(exponent);
    let chirp = |f: &Field| {
        f.map_with_position(|x, z| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            z * Complex64::from_polar(1.0, -r2 / (2.0 * eps))
        })
    };
    let ux0 = WaveFunction::new(chirp(&a0), eps, 0.0)?;
    let vx0 = WaveFunction::new(chirp(&a0.add(&b.scale_real(size))?), eps, 0.0)?;
    let nl_x = Nonlinearity::scaled(Nonlinearity::Cubic, eps, cfg.k)?;
    let xcfg = EvolveConfig::new(fc.dt, fc.t_mid, nl_x);
    let xrun = run_pair(&ux0, &vx0, &xcfg, &xcfg, |_, _, _| {})?;
    let to_psi = |f: &Field| {
        conformal_transform(f, fc.t_mid, eps, gamma, ConformalDirection::ToPsi, TargetGrid::Rescaled, TransformChecks::default())
            .map_err(|e| box_error(e, gx.half_width()))
    };
    let mu = to_psi(&xrun.u.field)?;
    let mv = to_psi(&xrun.v.field)?;

    // ψ-frame data on the rescaled grid, where the transform lands
    let gpsi = mu.field.grid().clone();
    let a0p = build_data(&cfg.a0, &gpsi, seed)?;
    let bp = match &cfg.perturbation {
        CorWeakPerturbation::A1 { a1 } => build_data(a1, &gpsi, seed.wrapping_add(1))?,
        CorWeakPerturbation::Delta { b0, .. } => build_data(b0, &gpsi, seed.wrapping_add(1))?,
    };
    let pcfg = EvolveConfig::new(fc.dt, mu.time, Nonlinearity::Cubic).with_time_weight(TimeWeight::Weak { n });
    let pu = evolve(&WaveFunction::new(a0p.clone(), h, t0)?, &pcfg)?;
    let pv = evolve(&WaveFunction::new(a0p.add(&bp.scale_real(size))?, h, t0)?, &pcfg)?;
    report.absorb_drift(xrun.max_drift.max(pu.max_mass_drift).max(pv.max_mass_drift));

    let solver_gap = mu.field.distance(&pu.state.field)?;
    let gap_x = xrun.u.field.distance(&xrun.v.field)?;
    let gap_psi = pu.state.field.distance(&pv.state.field)?;
    let mapped_gap = mu.field.distance(&mv.field)?;
    let frame_gap = (gap_x - gap_psi).abs();
    report.set("frame_check_epsilon", eps);
    report.set("frame_check_psi_time", mu.time);
    report.set("frame_check_solver_gap", solver_gap);
    report.set("frame_check_x_gap", gap_x);
    report.set("frame_check_psi_gap", gap_psi);
    report.set("frame_check_mapped_gap", mapped_gap);
    report.checks.push(Check::new(
        "frames_agree",
        solver_gap < FRAME_TOL && frame_gap < FRAME_TOL,
        format!("solver gap {solver_gap:.3e}, |x-frame gap − ψ-frame gap| {frame_gap:.3e}"),
    ));
    Ok(())
}
