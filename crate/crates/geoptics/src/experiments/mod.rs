//! Scenario runners.
//!
//! Each runner takes its config section and returns a [`Report`]: a sweep
//! table (one row per parameter value, in config order), a JSON summary,
//! the trend checks, and the largest relative mass drift seen by any
//! Schrödinger trajectory of the run.
//!
//! Sweeps run their trajectories in parallel on the current rayon pool.
//! Every trajectory is sequential, so results do not depend on the number
//! of threads.

mod flow;
mod frames;
mod instability;
mod linear;
mod semiclassical;
mod simulate;
mod weak;

use geoptics_core::dynamics::{EvolveConfig, Stepper, WaveFunction, DEFAULT_MASS_TOL};
use geoptics_core::fit::power_law_fit;
use geoptics_core::wkb::TaylorCascade;
use geoptics_core::{Error as CoreError, Field};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Profile, Scenario};
use crate::error::{HarnessError, Result};
use crate::io::LogLine;

pub use flow::{run_flow_scaling, run_norm_inflation};
pub use frames::run_frames;
pub use instability::{run_caslim, run_theorem_strong};
pub use linear::run_linear;
pub use semiclassical::{run_cascade, run_grenier};
pub use simulate::{run_ode_bound, run_simulate};
pub use weak::run_cor_weak;

/// Fraction of `‖a₀‖` that counts as an O(1) gap.
pub const GAP_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub scenario: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    pub max_mass_drift: f64,
    /// Named fields to dump next to the table.
    pub fields: Vec<(String, Field)>,
    pub run_log: Vec<LogLine>,
    pub cascades: Vec<(String, TaylorCascade)>,
}

impl Report {
    fn new(scenario: &str, columns: &[&str]) -> Self {
        Self {
            scenario: scenario.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Values of one table column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    fn absorb_drift(&mut self, drift: f64) {
        self.max_mass_drift = self.max_mass_drift.max(drift);
    }

    pub fn summary_json(&self) -> Value {
        let mut out = self.summary.clone();
        out.insert("scenario".into(), self.scenario.clone().into());
        out.insert("max_mass_drift".into(), self.max_mass_drift.into());
        out.insert("passed".into(), self.passed().into());
        out.insert(
            "checks".into(),
            serde_json::to_value(&self.checks).expect("checks serialize"),
        );
        Value::Object(out)
    }
}

/// Runs the scenario on the current rayon pool.
pub fn run(scenario: &Scenario, seed: u64) -> Result<Report> {
    scenario.validate()?;
    match scenario {
        Scenario::Simulate(c) => run_simulate(c, seed),
        Scenario::OdeBound(c) => run_ode_bound(c, seed),
        Scenario::Grenier(c) => run_grenier(c, seed),
        Scenario::Cascade(c) => run_cascade(c, seed),
        Scenario::TheoremStrong(c) => run_theorem_strong(c, seed),
        Scenario::Caslim(c) => run_caslim(c, seed),
        Scenario::CorWeak(c) => run_cor_weak(c, seed),
        Scenario::Linear(c) => run_linear(c, seed),
        Scenario::NormInflation(c) => run_norm_inflation(c, seed),
        Scenario::FlowScaling(c) => run_flow_scaling(c, seed),
        Scenario::Frames(c) => run_frames(c, seed),
    }
}

/// Maps `f` over the sweep in parallel, keeping the input order.
fn sweep<T: Send>(values: &[f64], f: impl Fn(f64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    values.par_iter().map(|&v| f(v)).collect()
}

/// Builds a data field and checks it is negligible on the box boundary.
/// Constant profiles are periodic and exempt.
fn build_data(profile: &Profile, grid: &geoptics_core::Grid, seed: u64) -> Result<Field> {
    let f = profile.build(grid, seed)?;
    if !matches!(profile, Profile::Constant { .. } | Profile::Zero) {
        f.ensure_decayed(1e-12)?;
    }
    Ok(f)
}

/// Same, for phases: only the gradient matters, so no decay check.
fn build_phase(profile: &Profile, grid: &geoptics_core::Grid, seed: u64) -> Result<Field> {
    let f = profile.build(grid, seed)?;
    if f.max_imag() > 0.0 {
        return Err(HarnessError::config("phases must be real"));
    }
    Ok(f)
}

/// Final states of a lockstep pair run.
struct PairRun {
    u: WaveFunction,
    v: WaveFunction,
    max_drift: f64,
}

/// Evolves two states with a common step, calling `observe(t, u, v)` after
/// every step. The step is shrunk so that `t_final` is hit exactly.
fn run_pair(
    u0: &WaveFunction,
    v0: &WaveFunction,
    cfg_u: &EvolveConfig,
    cfg_v: &EvolveConfig,
    mut observe: impl FnMut(f64, &Field, &Field),
) -> Result<PairRun> {
    cfg_u.validate(u0.t)?;
    cfg_v.validate(v0.t)?;
    let span = cfg_u.t_final - u0.t;
    let steps = if span > 0.0 {
        ((span / cfg_u.dt) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let dt = if steps > 0 { span / steps as f64 } else { cfg_u.dt };
    let su = Stepper::new(u0.grid(), u0.h, dt, cfg_u)?;
    let sv = Stepper::new(v0.grid(), v0.h, dt, cfg_v)?;
    let (mut u, mut v) = (u0.clone(), v0.clone());
    let (mu, mv) = (u.field.mass(), v.field.mass());
    let mut max_drift: f64 = 0.0;
    for step in 1..=steps {
        su.step(&mut u);
        sv.step(&mut v);
        if step == steps {
            u.t = cfg_u.t_final;
            v.t = cfg_u.t_final;
        }
        for (psi, m0) in [(&u, mu), (&v, mv)] {
            if psi.field.check_finite().is_err() {
                return Err(CoreError::NumericalInstability { step, time: psi.t }.into());
            }
            if m0 > 0.0 {
                let drift = ((psi.field.mass() - m0) / m0).abs();
                if drift > DEFAULT_MASS_TOL {
                    return Err(CoreError::MassDrift {
                        drift,
                        tol: DEFAULT_MASS_TOL,
                        time: psi.t,
                    }
                    .into());
                }
                max_drift = max_drift.max(drift);
            }
        }
        observe(u.t, &u.field, &v.field);
    }
    Ok(PairRun { u, v, max_drift })
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(power_law_fit(xs, ys)?.slope)
}

fn fmt_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use geoptics_core::{Grid, Nonlinearity};

    #[test]
    fn pair_run_of_identical_states_stays_identical() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let a0 = Field::from_real_fn(&g, |x| (-x[0] * x[0]).exp());
        let psi = WaveFunction::new(a0, 0.1, 0.0).unwrap();
        let cfg = EvolveConfig::new(1e-3, 0.05, Nonlinearity::Cubic);
        let mut seen = 0;
        let run = run_pair(&psi, &psi, &cfg, &cfg, |_, u, v| {
            assert_eq!(u.values(), v.values());
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 50);
        assert_eq!(run.u.t, 0.05);
        assert!(run.max_drift < 1e-12);
    }

    #[test]
    fn trend_helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(strictly_increasing(&[1.0, 2.0, 5.0]));
        assert!((slope(&[1.0, 2.0, 4.0], &[1.0, 4.0, 16.0]).unwrap() - 2.0).abs() < 1e-12);
    }
}
