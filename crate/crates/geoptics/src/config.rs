//! JSON scenario configuration.
//!
//! Every physical parameter must be spelled out; only grid resolution and
//! box size have defaults. All quantities are dimensionless: lengths are in
//! units of the box coordinate, times in units of the evolution variable of
//! the equation being solved.

use std::path::Path;

use geoptics_core::grid::{dealias, Field, Grid};
use geoptics_core::{Complex64, Nonlinearity, Potential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Dimensionless,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    pub units: Units,
    pub scenario: Scenario,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The config with every grid default written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        match &mut out.scenario {
            Scenario::Simulate(c) => c.grid = c.grid.resolved(),
            Scenario::OdeBound(c) => c.grid = c.grid.resolved(),
            Scenario::Grenier(c) => c.grid = c.grid.resolved(),
            Scenario::Cascade(c) => c.grid = c.grid.resolved(),
            Scenario::TheoremStrong(c) => c.grid = c.grid.resolved(),
            Scenario::Caslim(c) => c.grid = c.grid.resolved(),
            Scenario::CorWeak(c) => c.grid = c.grid.resolved(),
            Scenario::Linear(c) => c.grid = c.grid.resolved(),
            Scenario::NormInflation(c) => c.grid = c.grid.resolved(),
            Scenario::FlowScaling(c) => c.grid = c.grid.resolved(),
            Scenario::Frames(c) => {
                c.lens.grid = c.lens.grid.resolved();
                c.conformal.grid = c.conformal.grid.resolved();
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Simulate(SimulateConfig),
    OdeBound(OdeBoundConfig),
    Grenier(GrenierConfig),
    Cascade(CascadeConfig),
    TheoremStrong(TheoremStrongConfig),
    Caslim(CaslimConfig),
    CorWeak(CorWeakConfig),
    Linear(LinearConfig),
    NormInflation(NormInflationConfig),
    FlowScaling(FlowScalingConfig),
    Frames(FramesConfig),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::OdeBound(_) => "ode_bound",
            Self::Grenier(_) => "grenier",
            Self::Cascade(_) => "cascade",
            Self::TheoremStrong(_) => "theorem_strong",
            Self::Caslim(_) => "caslim",
            Self::CorWeak(_) => "cor_weak",
            Self::Linear(_) => "linear",
            Self::NormInflation(_) => "norm_inflation",
            Self::FlowScaling(_) => "flow_scaling",
            Self::Frames(_) => "frames",
        }
    }

    /// CLI subcommand that runs this scenario.
    pub fn subcommand(&self) -> &'static str {
        match self {
            Self::Simulate(_) | Self::OdeBound(_) => "simulate",
            Self::Grenier(_) => "wkb",
            Self::Cascade(_) => "cascade",
            Self::TheoremStrong(_) | Self::Caslim(_) | Self::CorWeak(_) => "instability",
            Self::Linear(_) => "linear",
            Self::NormInflation(_) => "inflate",
            Self::FlowScaling(_) | Self::Frames(_) => "flowmap",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Simulate(c) => {
                c.grid.resolve()?;
                positive("h", c.h)?;
                positive("t_final", c.t_final)?;
                if let Some(dt) = c.dt {
                    positive("dt", dt)?;
                }
                Ok(())
            }
            Self::OdeBound(c) => {
                c.grid.resolve()?;
                sweep("h_list", &c.h_list)?;
                positive("c0", c.c0)?;
                positive("sobolev_index", c.sobolev_index)
            }
            Self::Grenier(c) => {
                c.grid.resolve()?;
                sweep("h_list", &c.h_list)?;
                positive("t_final", c.t_final)?;
                positive("dt", c.dt)
            }
            Self::Cascade(c) => {
                c.grid.resolve()?;
                if c.orders.is_empty() || c.orders.iter().any(|&j| j == 0) {
                    return Err(HarnessError::config("orders must be a non-empty list of J >= 1"));
                }
                if c.times.len() < 3 || c.times.windows(2).any(|w| w[1] <= w[0]) || c.times[0] <= 0.0 {
                    return Err(HarnessError::config("times must be >= 3 increasing positive values"));
                }
                positive("dt", c.dt)
            }
            Self::TheoremStrong(c) => {
                c.grid.resolve()?;
                sweep("h_list", &c.h_list)?;
                if c.order == 0 {
                    return Err(HarnessError::config("order N must be >= 1"));
                }
                c.kappa.validate()
            }
            Self::Caslim(c) => {
                c.grid.resolve()?;
                sweep("h_list", &c.h_list)?;
                positive("t_star", c.t_star)?;
                positive("stability_exponent", c.stability_exponent)?;
                positive("limit_dt", c.limit_dt)
            }
            Self::CorWeak(c) => {
                let g = c.grid.resolve()?;
                if g.dim() < 2 {
                    return Err(HarnessError::config("the weak-nonlinearity scenario needs n >= 2"));
                }
                sweep("eps_list", &c.eps_list)?;
                let n = g.dim() as f64;
                if !(c.k > 1.0 && c.k < n) {
                    return Err(HarnessError::config(format!("k must lie in (1, n) = (1, {n})")));
                }
                if let CorWeakPerturbation::Delta { order, .. } = &c.perturbation {
                    let exponent = 1.0 - c.k / n - 1.0 / *order as f64;
                    if exponent <= 0.0 {
                        return Err(HarnessError::config(format!(
                            "delta = eps^({exponent:.3}) does not vanish; need N > {:.2}",
                            1.0 / (1.0 - c.k / n)
                        )));
                    }
                }
                positive("psi_end", c.psi_end)
            }
            Self::Linear(c) => {
                c.grid.resolve()?;
                sweep("h_list", &c.h_list)?;
                positive("kappa", c.kappa)?;
                positive("delta_exponent", c.delta_exponent)
            }
            Self::NormInflation(c) => {
                c.grid.resolve()?;
                if c.lambdas.len() < 3 || c.lambdas.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(HarnessError::config("lambdas must be >= 3 strictly decreasing values"));
                }
                positive("c0", c.c0)
            }
            Self::FlowScaling(c) => {
                c.grid.resolve()?;
                sweep("growth_h_list", &c.growth_h_list)?;
                positive("identity_time", c.identity_time)?;
                positive("growth_time", c.growth_time)
            }
            Self::Frames(c) => {
                c.lens.grid.resolve()?;
                c.conformal.grid.resolve()?;
                Ok(())
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(HarnessError::config(format!("{name} must be positive (got {v})")))
    }
}

/// At least three strictly decreasing positive values.
fn sweep(name: &str, values: &[f64]) -> Result<()> {
    if values.len() < 3 {
        return Err(HarnessError::config(format!("{name} needs at least 3 entries")));
    }
    if values.windows(2).any(|w| w[1] >= w[0]) || values.iter().any(|v| !(*v > 0.0)) {
        return Err(HarnessError::config(format!("{name} must be strictly decreasing and positive")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Defaults to 1024, 256 and 64 points per axis for n = 1, 2, 3.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_half_width() -> f64 {
    8.0
}

impl GridSpec {
    pub fn resolved_points(&self) -> usize {
        self.points.unwrap_or(match self.dim {
            1 => 1024,
            2 => 256,
            _ => 64,
        })
    }

    pub fn resolve(&self) -> Result<Grid> {
        Ok(Grid::new(self.dim, self.resolved_points(), self.half_width)?)
    }

    /// Same spec with the default filled in, for manifests.
    pub fn resolved(&self) -> Self {
        Self {
            points: Some(self.resolved_points()),
            ..self.clone()
        }
    }
}

/// A lattice function given in closed form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// `amplitude·exp(−|x − center|²/width²)·e^{i momentum·x}`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        momentum: Vec<f64>,
    },
    /// `curvature·|x|²/2`.
    Quadratic { curvature: f64 },
    Sum { terms: Vec<Profile> },
    /// Band-limited complex noise under a Gaussian envelope, drawn from the
    /// run seed.
    Noise { amplitude: f64, envelope_width: f64 },
}

impl Profile {
    pub fn build(&self, grid: &Grid, seed: u64) -> Result<Field> {
        let dim = grid.dim();
        let vector = |v: &Vec<f64>, name: &str| -> Result<Vec<f64>> {
            match v.len() {
                0 => Ok(vec![0.0; dim]),
                l if l == dim => Ok(v.clone()),
                _ => Err(HarnessError::config(format!("{name} needs {dim} components"))),
            }
        };
        Ok(match self {
            Self::Zero => Field::zeros(grid),
            Self::Constant { re, im } => Field::constant(grid, Complex64::new(*re, *im)),
            Self::Gaussian {
                amplitude,
                width,
                center,
                momentum,
            } => {
                positive("gaussian width", *width)?;
                let c = vector(center, "center")?;
                let p = vector(momentum, "momentum")?;
                let (a, w2) = (*amplitude, width * width);
                Field::from_fn(grid, |x| {
                    let r2: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
                    let phase: f64 = x.iter().zip(&p).map(|(xi, pi)| xi * pi).sum();
                    Complex64::from_polar(a * (-r2 / w2).exp(), phase)
                })
            }
            Self::Quadratic { curvature } => {
                let k = *curvature;
                Field::from_real_fn(grid, |x| 0.5 * k * x.iter().map(|v| v * v).sum::<f64>())
            }
            Self::Sum { terms } => {
                let mut acc = Field::zeros(grid);
                for (i, t) in terms.iter().enumerate() {
                    acc = acc.add(&t.build(grid, seed.wrapping_add(i as u64))?)?;
                }
                acc
            }
            Self::Noise {
                amplitude,
                envelope_width,
            } => {
                positive("noise envelope_width", *envelope_width)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<Complex64> = (0..grid.len())
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let smooth = dealias(&dealias(&Field::new(grid.clone(), raw)?));
                let scale = amplitude / smooth.max_abs().max(f64::MIN_POSITIVE);
                let w2 = envelope_width * envelope_width;
                smooth.map_with_position(|x, z| {
                    z * scale * (-x.iter().map(|v| v * v).sum::<f64>() / w2).exp()
                })
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Constant { re, im } => *re == 0.0 && *im == 0.0,
            Self::Gaussian { amplitude, .. } => *amplitude == 0.0,
            Self::Quadratic { curvature } => *curvature == 0.0,
            Self::Sum { terms } => terms.iter().all(Profile::is_zero),
            Self::Noise { amplitude, .. } => *amplitude == 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Zero,
    Cubic,
    Power { coupling: f64, exponent: u32 },
    Saturating { amplitude: f64, scale: f64 },
    Scaled { base: Box<NonlinearitySpec>, epsilon: f64, k: f64 },
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        let nl = match self {
            Self::Zero => Nonlinearity::Zero,
            Self::Cubic => Nonlinearity::Cubic,
            Self::Power { coupling, exponent } => Nonlinearity::power(*coupling, *exponent)?,
            Self::Saturating { amplitude, scale } => Nonlinearity::Saturating {
                amplitude: *amplitude,
                scale: *scale,
            },
            Self::Scaled { base, epsilon, k } => Nonlinearity::scaled(base.build()?, *epsilon, *k)?,
        };
        nl.validate()?;
        Ok(nl)
    }

    /// The exponent `σ` of `f(y) ~ y^σ`.
    pub fn power_exponent(&self) -> u32 {
        match self {
            Self::Power { exponent, .. } => *exponent,
            Self::Scaled { base, .. } => base.power_exponent(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    None,
    Harmonic { omega: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        Ok(match self {
            Self::None => Potential::None,
            Self::Harmonic { omega } => Potential::harmonic(*omega)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid: GridSpec,
    pub h: f64,
    pub t_final: f64,
    /// Step size; the default is the phase/dispersion rule.
    #[serde(default)]
    pub dt: Option<f64>,
    pub a0: Profile,
    pub phi0: Profile,
    pub nonlinearity: NonlinearitySpec,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Also report the gap to the Laplacian-free solution.
    #[serde(default)]
    pub compare_to_ode: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeBoundConfig {
    pub grid: GridSpec,
    pub h_list: Vec<f64>,
    pub a0: Profile,
    pub nonlinearity: NonlinearitySpec,
    /// Sobolev index `k` of the error norm; fixes `θ = 1/(1 + 2σk)`.
    pub sobolev_index: f64,
    /// Horizon `c₀·h|ln h|^θ`.
    pub c0: f64,
    /// Exponent `c₁` in the normalization `h|ln h|^{c₁}`.
    pub log_exponent: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrenierConfig {
    pub grid: GridSpec,
    pub h_list: Vec<f64>,
    pub a0: Profile,
    pub phi0: Profile,
    /// First-order amplitude datum `a₁` for the corrector.
    pub a1: Profile,
    pub nonlinearity: NonlinearitySpec,
    pub t_final: f64,
    /// RK4 step for the hyperbolic, limit and corrector systems.
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CascadeVariantSpec {
    Standard,
    Weak { n: u32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub grid: GridSpec,
    pub a0: Profile,
    pub phi0: Profile,
    pub nonlinearity: NonlinearitySpec,
    pub variant: CascadeVariantSpec,
    pub orders: Vec<usize>,
    /// Times at which partial sums are compared with the limit system.
    pub times: Vec<f64>,
    /// Step of the reference limit-system run.
    pub dt: f64,
    /// Write every coefficient as a binary field.
    #[serde(default)]
    pub dump: bool,
}

/// How `ã₀` is built from `a₀`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    /// `ã₀ = a₀ + δ·b₀`.
    Additive { b0: Profile },
    /// `ã₀(x) = a₀(x − δ·direction)`.
    Translate { direction: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kappa {
    Fixed {
        value: f64,
    },
    /// Smallest ladder entry whose run at the largest `h` reaches
    /// `gap(t*) ≥ target_fraction·‖a₀‖`.
    Pilot {
        ladder: Vec<f64>,
        target_fraction: f64,
    },
}

impl Kappa {
    fn validate(&self) -> Result<()> {
        match self {
            Self::Fixed { value } => positive("kappa", *value),
            Self::Pilot {
                ladder,
                target_fraction,
            } => {
                if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
                    return Err(HarnessError::config("kappa ladder must be increasing and positive"));
                }
                positive("target_fraction", *target_fraction)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremStrongConfig {
    pub grid: GridSpec,
    pub h_list: Vec<f64>,
    pub a0: Profile,
    pub phi0: Profile,
    pub perturbation: Perturbation,
    pub nonlinearity: NonlinearitySpec,
    /// `N` in `δ = h^{1−1/N}`.
    pub order: u32,
    /// `t* = κ·h/δ`.
    pub kappa: Kappa,
    /// Sobolev indices of the gaps reported at `t*`.
    #[serde(default = "default_sobolev")]
    pub sobolev_indices: Vec<f64>,
}

fn default_sobolev() -> Vec<f64> {
    vec![1.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaslimConfig {
    pub grid: GridSpec,
    pub h_list: Vec<f64>,
    pub a0: Profile,
    pub a1: Profile,
    pub phi0: Profile,
    pub nonlinearity: NonlinearitySpec,
    /// `h`-independent observation time.
    pub t_star: f64,
    /// Stability window `[0, h^p]`.
    pub stability_exponent: f64,
    /// RK4 step of the limit and corrector systems.
    pub limit_dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorWeakPerturbation {
    /// `ã₀ = a₀ + ε^{1−k/n}·a₁`.
    A1 { a1: Profile },
    /// `ã₀ = a₀ + δ·b₀` with `δ = ε^{1−k/n−1/N}`.
    Delta { b0: Profile, order: u32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorWeakCase {
    /// `ω = 0`, initial phase `−|x|²/2`.
    Focusing,
    /// `ω > 0`, zero initial phase.
    Harmonic { omega: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameCheck {
    /// Original-frame time at which both solvers are compared.
    pub t_mid: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorWeakConfig {
    /// Grid of the rescaled (ψ) frame; its dimension is `n`.
    pub grid: GridSpec,
    pub eps_list: Vec<f64>,
    pub k: f64,
    pub a0: Profile,
    pub perturbation: CorWeakPerturbation,
    pub case: CorWeakCase,
    /// Final time in the ψ frame.
    pub psi_end: f64,
    /// Two-solver comparison at the largest ε, original frame vs ψ frame.
    #[serde(default)]
    pub frame_check: Option<FrameCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub grid: GridSpec,
    pub h_list: Vec<f64>,
    pub a0: Profile,
    pub potential: PotentialSpec,
    /// Perturbing potential `V₁` (real part is used).
    pub v1: Profile,
    /// `δ = h^p`.
    pub delta_exponent: f64,
    /// `t = κ·h^q`.
    pub kappa: f64,
    pub time_exponent: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormInflationConfig {
    /// Grid of the semiclassical frame; the physical grid is derived from it.
    pub grid: GridSpec,
    pub lambdas: Vec<f64>,
    pub s: f64,
    pub sigma: u32,
    /// `ω` in `f(y) = ω·y^σ`.
    pub coupling: f64,
    pub a0: Profile,
    /// Horizon `c₀·h|ln h|^θ` in the semiclassical frame.
    pub c0: f64,
    pub theta: f64,
    /// Data damping `|ln λ|^{−θ′}`.
    pub theta_prime: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowScalingConfig {
    pub grid: GridSpec,
    pub a0: Profile,
    /// Regularity index `s` of the scaling (below the critical index).
    pub s: f64,
    pub identity_lambdas: Vec<f64>,
    /// Semiclassical-frame time of the scaling-identity cross-solve.
    pub identity_time: f64,
    pub identity_dt: f64,
    pub growth_h_list: Vec<f64>,
    pub growth_time: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensCheck {
    pub grid: GridSpec,
    pub a0: Profile,
    pub h: f64,
    /// Free-frame time `t`; the trapped run goes to `arctan t`.
    pub t: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalCheck {
    pub grid: GridSpec,
    pub a0: Profile,
    pub epsilon: f64,
    pub k: f64,
    pub t_mid: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesConfig {
    pub lens: LensCheck,
    pub conformal: ConformalCheck,
}
