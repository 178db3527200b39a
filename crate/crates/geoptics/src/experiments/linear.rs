use geoptics_core::dynamics::{init_data, suggest_dt, DtRule, EvolveConfig};
use geoptics_core::{Complex64, Field, Nonlinearity, Potential};

use super::{build_data, fmt_list, run_pair, sweep, Check, Report, GAP_FRACTION};
use crate::config::LinearConfig;
use crate::error::Result;

const PREDICTION_TOL: f64 = 0.2;

/// Linear equation with potentials `V` and `V + δV₁`, `δ = h^p`, observed
/// at `t = κ·h^q`. With `p + q = 1` the phase `tδV₁/h = κV₁` is O(1) and
/// the solutions separate; otherwise the run is a negative control.
pub fn run_linear(cfg: &LinearConfig, seed: u64) -> Result<Report> {
    let grid = cfg.grid.resolve()?;
    let a0 = build_data(&cfg.a0, &grid, seed)?;
    let v1 = build_data(&cfg.v1, &grid, seed.wrapping_add(1))?.real_part();
    let base = Field::new(
        grid.clone(),
        cfg.potential
            .build()?
            .sample(&grid)?
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    )?;
    let phi0 = Field::zeros(&grid);
    let a0_norm = a0.norm_l2();
    let divergent = (cfg.delta_exponent + cfg.time_exponent - 1.0).abs() < 1e-12;
    let control = v1.max_abs() == 0.0;

    let rows = sweep(&cfg.h_list, |h| {
        let delta = h.powf(cfg.delta_exponent);
        let t = cfg.kappa * h.powf(cfg.time_exponent);
        let pot = |d: f64| Potential::Sampled {
            base: base.clone(),
            perturbation: v1.clone(),
            delta: d,
        };
        let (pu, pv) = (pot(0.0), pot(delta));
        let psi0 = init_data(&a0, &phi0, h)?;
        let dt = suggest_dt(&a0, h, &Nonlinearity::Zero, &pu, DtRule::default())?
            .min(suggest_dt(&a0, h, &Nonlinearity::Zero, &pv, DtRule::default())?)
            .min(t / 16.0);
        let cu = EvolveConfig::new(dt, t, Nonlinearity::Zero).with_potential(pu);
        let cv = EvolveConfig::new(dt, t, Nonlinearity::Zero).with_potential(pv);
        let run = run_pair(&psi0, &psi0, &cu, &cv, |_, _, _| {})?;
        let gap = run.u.field.distance(&run.v.field)?;
        // |a₀|·|e^{itδV₁/h} − 1| = 2|a₀||sin(tδV₁/2h)|
        let prediction = a0
            .zip_map(&v1, |a, v| Complex64::new(2.0 * a.norm() * (0.5 * t * delta * v.re / h).sin().abs(), 0.0))?
            .norm_l2();
        let rel = if prediction > 0.0 {
            (gap - prediction).abs() / prediction
        } else {
            gap
        };
        Ok((vec![h, delta, t, gap, prediction, rel, gap / a0_norm], run.max_drift))
    })?;

    let mut report = Report::new(
        "linear",
        &["h", "delta", "t", "gap", "prediction", "prediction_rel_err", "relative_gap"],
    );
    for (row, drift) in rows {
        report.absorb_drift(drift);
        report.rows.push(row);
    }
    let regime = if control {
        "control"
    } else if divergent {
        "divergent"
    } else {
        "excluded"
    };
    report.set("regime", regime);
    report.set("a0_norm", a0_norm);
    let gap = report.column("gap").expect("column");
    let relative = report.column("relative_gap").expect("column");
    let tripped = gap.iter().any(|g| *g >= GAP_FRACTION * a0_norm);
    match regime {
        "control" => report.checks.push(Check::new(
            "control_gaps_vanish",
            gap.iter().all(|g| *g == 0.0),
            fmt_list(&gap),
        )),
        "divergent" => {
            let rel = report.column("prediction_rel_err").expect("column");
            let worst = rel.iter().cloned().fold(0.0, f64::max);
            report.set("prediction_worst_rel_err", worst);
            report.checks.push(Check::new(
                "gap_reaches_threshold",
                gap.iter().all(|g| *g >= GAP_FRACTION * a0_norm),
                format!("gaps {} vs {:.4e}", fmt_list(&gap), GAP_FRACTION * a0_norm),
            ));
            report.checks.push(Check::new(
                "prediction_agrees",
                worst <= PREDICTION_TOL,
                format!("largest relative error {worst:.3}"),
            ));
        }
        _ => {
            report.checks.push(Check::new(
                "threshold_not_tripped",
                !tripped,
                format!("gaps {} vs {:.4e}", fmt_list(&gap), GAP_FRACTION * a0_norm),
            ));
            report.checks.push(Check::new(
                "relative_gap_non_increasing",
                relative.windows(2).all(|w| w[1] <= w[0]),
                fmt_list(&relative),
            ));
        }
    }
    Ok(report)
}
