use geoptics_core::dynamics::{evolve, evolve_with, suggest_dt, DtRule, EvolveConfig, WaveFunction};
use geoptics_core::grid::{homogeneous_sobolev_norm, sobolev_norm, spectral_centroid};
use geoptics_core::transforms::parabolic_rescale;
use geoptics_core::wkb::limit::{limit_evolve, LimitPair};
use geoptics_core::{Field, Nonlinearity, Potential, TimeWeight};

use super::{build_data, fmt_list, slope, strictly_decreasing, strictly_increasing, sweep, Check, Report};
use crate::config::{FlowScalingConfig, NormInflationConfig};
use crate::error::{HarnessError, Result};

const IDENTITY_TOL: f64 = 1e-6;

/// Parabolic rescaling plus the o.d.e. phase: an `Hˢ`-small datum whose
/// `Hˢ` norm is large after a short time.
pub fn run_norm_inflation(cfg: &NormInflationConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let nl = Nonlinearity::power(cfg.coupling, cfg.sigma)?;
    // The default rule budgets for amplitude growth up to 2·max|a₀|, which
    // the σ-th power turns into a factor 4^σ on the phase rate. The flow is
    // defocusing and the sup norm is monitored, so the data's own rate is used.
    let rule = DtRule {
        c_phase: DtRule::default().c_phase * 4f64.powi(cfg.sigma as i32),
        ..DtRule::default()
    };

    let rows = sweep(&cfg.lambdas, |lambda| {
        let damped = a0.scale_real(lambda.ln().abs().powf(-cfg.theta_prime));
        let scaling = parabolic_rescale(&damped, lambda, cfg.s, cfg.sigma)?;
        let h = scaling.h;
        let t_psi = cfg.c0 * h * h.ln().abs().powf(cfg.theta);
        let dt = suggest_dt(&damped, h, &nl, &Potential::None, rule)?;
        let peak0 = damped.max_abs();
        let mut peak: f64 = 0.0;
        let run = evolve_with(&WaveFunction::new(damped, h, 0.0)?, &EvolveConfig::new(dt, t_psi, nl.clone()), |r| {
            peak = peak.max(r.max_abs)
        })?;
        if peak > peak0 * (1.0 + 1e-6) {
            return Err(HarnessError::config(format!(
                "sup norm grew from {peak0:.4} to {peak:.4}; the step rule assumes it does not"
            )));
        }
        let ut = parabolic_rescale(&run.state.field, lambda, cfg.s, cfg.sigma)?.u0;
        let u0 = &scaling.u0;
        Ok((
            vec![
                lambda,
                h,
                t_psi,
                scaling.u_time(t_psi),
                sobolev_norm(u0, cfg.s)?,
                sobolev_norm(&ut, cfg.s)?,
                homogeneous_sobolev_norm(u0, cfg.s)?,
                homogeneous_sobolev_norm(&ut, cfg.s)?,
                spectral_centroid(u0),
                spectral_centroid(&ut),
            ],
            run.max_mass_drift,
        ))
    })?;

    let mut report = Report::new(
        "norm_inflation",
        &[
            "lambda", "h", "t_psi", "t_u", "hs_initial", "hs_final", "hs_dot_initial", "hs_dot_final",
            "centroid_initial", "centroid_final",
        ],
    );
    for (row, drift) in rows {
        report.absorb_drift(drift);
        report.rows.push(row);
    }
    report.set("s", cfg.s);
    report.set("sigma", cfg.sigma);
    report.set("theta", cfg.theta);
    report.set("theta_prime", cfg.theta_prime);
    report.set("c0", cfg.c0);
    let initial = report.column("hs_initial").expect("column");
    let fin = report.column("hs_final").expect("column");
    let centroid = report.column("centroid_final").expect("column");
    report.set("inflation_factors", fin.iter().zip(&initial).map(|(f, i)| f / i).collect::<Vec<_>>());
    report.checks.push(Check::new(
        "initial_norm_decreasing",
        strictly_decreasing(&initial),
        fmt_list(&initial),
    ));
    report.checks.push(Check::new(
        "final_norm_increasing",
        strictly_increasing(&fin),
        fmt_list(&fin),
    ));
    report.checks.push(Check::new(
        "spectral_centroid_increasing",
        strictly_increasing(&centroid),
        fmt_list(&centroid),
    ));
    Ok(report)
}

/// Cubic scaling identity cross-solve and the `Ḣ¹ ≈ h⁻¹` growth table.
pub fn run_flow_scaling(cfg: &FlowScalingConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let n = grid.dim() as f64;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let nl = Nonlinearity::Cubic;
    let h_exponent = 0.5 * n - 1.0 - cfg.s;
    if h_exponent <= 0.0 {
        return Err(HarnessError::config(format!(
            "s = {} must lie below n/2 - 1 = {} for h = lambda^(n/2 - 1 - s) to vanish",
            cfg.s,
            0.5 * n - 1.0
        )));
    }
    let time_exponent = 0.5 * n + 1.0 - cfg.s;
    let amp = |lambda: f64| lambda.powf(-0.5 * n + cfg.s);

    // (i) u(t,x) = λ^{−n/2+s}ψ(t/λ^a, x/λ): ψ on the base grid with h,
    // u on the λ-scaled grid with unit h and the matching step
    let identity = sweep(&cfg.identity_lambdas, |lambda| {
        let h = lambda.powf(h_exponent);
        let tscale = lambda.powf(time_exponent);
        let psi = evolve(
            &WaveFunction::new(a0.clone(), h, 0.0)?,
            &EvolveConfig::new(cfg.identity_dt, cfg.identity_time, nl.clone()),
        )?;
        let gu = grid.rescaled(lambda)?;
        let u0 = Field::new(gu.clone(), a0.scale_real(amp(lambda)).into_values())?;
        let u = evolve(
            &WaveFunction::new(u0, 1.0, 0.0)?,
            &EvolveConfig::new(cfg.identity_dt * tscale, cfg.identity_time * tscale, nl.clone()),
        )?;
        let back = Field::new(grid.clone(), u.state.field.scale_real(1.0 / amp(lambda)).into_values())?;
        let gap = back.distance(&psi.state.field)?;
        Ok((lambda, h, gap, psi.max_mass_drift.max(u.max_mass_drift)))
    })?;

    // (ii) Ḣ¹ growth of ψʰ at a fixed pre-caustic time
    let start = LimitPair::new(a0.clone(), Field::zeros(&grid), 0.0)?;
    limit_evolve(&start, cfg.growth_time / 256.0, cfg.growth_time, &nl, TimeWeight::Identity)?;
    let growth = sweep(&cfg.growth_h_list, |h| {
        let dt = suggest_dt(&a0, h, &nl, &Potential::None, DtRule::default())?;
        let run = evolve(&WaveFunction::new(a0.clone(), h, 0.0)?, &EvolveConfig::new(dt, cfg.growth_time, nl.clone()))?;
        Ok((homogeneous_sobolev_norm(&run.state.field, 1.0)?, run.max_mass_drift))
    })?;

    let mut report = Report::new("flow_scaling", &["h", "h1_dot_norm"]);
    for (&h, (norm, drift)) in cfg.growth_h_list.iter().zip(&growth) {
        report.rows.push(vec![h, *norm]);
        report.absorb_drift(*drift);
    }
    let mut worst: f64 = 0.0;
    let mut gaps = Vec::new();
    for &(_, _, gap, drift) in &identity {
        report.absorb_drift(drift);
        worst = worst.max(gap);
        gaps.push(gap);
    }
    report.set("s", cfg.s);
    report.set("h_exponent", h_exponent);
    report.set("time_exponent", time_exponent);
    report.set("identity_lambdas", cfg.identity_lambdas.clone());
    report.set("identity_h", identity.iter().map(|r| r.1).collect::<Vec<_>>());
    report.set("identity_gaps", gaps.clone());
    report.set("identity_worst_gap", worst);
    report.set(
        "scope",
        "scaling identity and the semiclassical growth law only; the discontinuity of the flow map in n >= 3 is not reproduced",
    );
    let norms = report.column("h1_dot_norm").expect("column");
    let p = slope(&cfg.growth_h_list, &norms)?;
    report.set("h1_growth_slope", p);
    report.checks.push(Check::new(
        "scaling_identity",
        worst < IDENTITY_TOL,
        format!("gaps {}", fmt_list(&gaps)),
    ));
    report.checks.push(Check::new(
        "h1_growth_slope",
        (p + 1.0).abs() <= 0.15,
        format!("slope {p:.3}, norms {}", fmt_list(&norms)),
    ));
    Ok(report)
}
