use geoptics_core::dynamics::{evolve, init_data, suggest_dt, DtRule, EvolveConfig};
use geoptics_core::wkb::cascade::{taylor_cascade, CascadeVariant};
use geoptics_core::wkb::corrector::{corrector_evolve, LimitTrajectory};
use geoptics_core::wkb::grenier::{grenier_evolve, grenier_stable_dt, HyperbolicState};
use geoptics_core::wkb::limit::{limit_evolve, LimitPair};
use geoptics_core::{Potential, TimeWeight};

use super::{build_data, build_phase, fmt_list, slope, sweep, Check, Report};
use crate::config::{CascadeConfig, CascadeVariantSpec, GrenierConfig};
use crate::error::Result;

const CURL_TOL: f64 = 1e-8;

/// Exact amplitude/velocity system against the solver, the limit system
/// and the first corrector, over an h-sweep at a fixed time.
pub fn run_grenier(cfg: &GrenierConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let phi0 = build_phase(&cfg.phi0, &grid, seed)?;
    let a1 = build_data(&cfg.a1, &grid, seed.wrapping_add(1))?;
    let nl = cfg.nonlinearity.build()?;
    let id = TimeWeight::Identity;

    // base limit trajectory and corrector, shared by the sweep; the
    // trajectory run also validates that t_final precedes any caustic
    let traj = LimitTrajectory::record(&LimitPair::new(a0.clone(), phi0.clone(), 0.0)?, cfg.dt, cfg.t_final, &nl, id)?;
    let cor = corrector_evolve(&traj, &a1, traj.dt, cfg.t_final, &nl, id)?;
    let base = traj.states.last().expect("trajectory has a final state").clone();

    let rows = sweep(&cfg.h_list, |h| {
        let data = a0.add(&a1.scale_real(h))?;
        let s0 = HyperbolicState::from_initial(&data, &phi0, h, 0.0)?;
        let dt = grenier_stable_dt(&s0, &nl, id).min(cfg.dt);
        let s = grenier_evolve(&s0, dt, cfg.t_final, &nl, id)?;
        let rec = s.reconstruct(CURL_TOL)?;
        let psi0 = init_data(&data, &phi0, h)?;
        let sdt = suggest_dt(&data, h, &nl, &Potential::None, DtRule::default())?;
        let run = evolve(&psi0, &EvolveConfig::new(sdt, cfg.t_final, nl.clone()))?;
        let gap = run.state.field.distance(&rec)?;
        let lead = s.alpha.sub(&base.a)?;
        let rest = lead.sub(&cor.a1c.scale_real(h))?;
        Ok((vec![h, gap, lead.norm_l2(), rest.norm_l2(), sdt], run.max_mass_drift))
    })?;

    let mut report = Report::new(
        "grenier",
        &["h", "reconstruction_gap", "amplitude_gap", "corrected_gap", "solver_dt"],
    );
    for (row, drift) in rows {
        report.absorb_drift(drift);
        report.rows.push(row);
    }
    let hs = &cfg.h_list;
    let gap = report.column("reconstruction_gap").expect("column");
    let lead = report.column("amplitude_gap").expect("column");
    let rest = report.column("corrected_gap").expect("column");
    let p_gap = slope(hs, &gap)?;
    let p_lead = slope(hs, &lead)?;
    let p_rest = slope(hs, &rest)?;
    report.set("t_final", cfg.t_final);
    report.set("reconstruction_slope", p_gap);
    report.set("amplitude_slope", p_lead);
    report.set("corrector_order", p_rest);
    report.set(
        "reconstruction_constant",
        gap.iter().zip(hs).map(|(g, h)| g / h).fold(0.0, f64::max),
    );
    report.checks.push(Check::new(
        "reconstruction_gap_linear_in_h",
        (0.8..=1.2).contains(&p_gap),
        format!("slope {p_gap:.3}, gaps {}", fmt_list(&gap)),
    ));
    report.checks.push(Check::new(
        "amplitude_gap_linear_in_h",
        (0.8..=1.2).contains(&p_lead),
        format!("slope {p_lead:.3}, gaps {}", fmt_list(&lead)),
    ));
    report.checks.push(Check::new(
        "corrector_second_order",
        p_rest >= 1.8,
        format!("order {p_rest:.3}, gaps {}", fmt_list(&rest)),
    ));
    report.fields.push(("limit_amplitude".into(), base.a));
    report.fields.push(("limit_phase".into(), base.phi));
    report.fields.push(("corrector_amplitude".into(), cor.a1c));
    report.fields.push(("corrector_phase".into(), cor.phi1c));
    Ok(report)
}

/// Taylor cascade partial sums against the limit system.
pub fn run_cascade(cfg: &CascadeConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let phi0 = build_phase(&cfg.phi0, &grid, seed)?;
    let nl = cfg.nonlinearity.build()?;
    let (variant, weight, n) = match cfg.variant {
        CascadeVariantSpec::Standard => (CascadeVariant::Standard, TimeWeight::Identity, 1),
        CascadeVariantSpec::Weak { n } => (CascadeVariant::Weak { n }, TimeWeight::Weak { n }, n),
    };
    let max_order = *cfg.orders.iter().max().expect("validated non-empty");
    let cascade = taylor_cascade(&a0, &phi0, max_order, &nl, variant)?;

    // reference states at the comparison times, one continued run
    let mut state = LimitPair::new(a0.clone(), phi0.clone(), 0.0)?;
    let mut refs = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        state = limit_evolve(&state, cfg.dt, t, &nl, weight)?;
        refs.push(state.clone());
    }

    let mut columns = vec!["t".to_string()];
    columns.extend(cfg.orders.iter().map(|j| format!("residual_J{j}")));
    let mut report = Report {
        scenario: "cascade".into(),
        columns,
        ..Report::default()
    };
    let mut residuals = vec![Vec::new(); cfg.orders.len()];
    for (t, s) in cfg.times.iter().zip(&refs) {
        let mut row = vec![*t];
        for (col, &j) in cfg.orders.iter().enumerate() {
            let r = s.phi.distance(&cascade.phase_sum(*t, j)?)? + s.a.distance(&cascade.amplitude_sum(*t, j)?)?;
            residuals[col].push(r);
            row.push(r);
        }
        report.rows.push(row);
    }
    for (col, &j) in cfg.orders.iter().enumerate() {
        let p = slope(&cfg.times, &residuals[col])?;
        // first omitted term: t^{J+1} (standard) or t^{n(J+1)−1} (weak ladder)
        let expected = match variant {
            CascadeVariant::Standard => (j + 1) as f64,
            CascadeVariant::Weak { .. } => (n as usize * (j + 1)) as f64 - 1.0,
        };
        report.set(&format!("slope_J{j}"), p);
        report.checks.push(Check::new(
            &format!("residual_order_J{j}"),
            p > expected - 0.5,
            format!("slope {p:.3} vs leading omitted power {expected}"),
        ));
    }
    if cfg.phi0.is_zero() && variant == CascadeVariant::Standard {
        let minus_f = a0.map(|a| (-nl.value(a.norm_sqr())).into());
        let phi1_err = cascade.phis[1].sub(&minus_f)?.max_abs();
        report.set("phi1_plus_f_max", phi1_err);
        report.checks.push(Check::new(
            "phi1_equals_minus_f",
            phi1_err <= 1e-10,
            format!("max |φ₁ + f(|a₀|²)| = {phi1_err:.3e}"),
        ));
        if max_order >= 2 {
            let phi2 = cascade.phis[2].max_abs();
            report.set("phi2_max", phi2);
            report.checks.push(Check::new(
                "phi2_vanishes",
                phi2 <= 1e-10,
                format!("max |φ₂| = {phi2:.3e}"),
            ));
        }
    }
    if cfg.dump {
        report.cascades.push(("cascade".into(), cascade));
    }
    Ok(report)
}
