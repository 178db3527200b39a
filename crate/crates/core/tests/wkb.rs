use geoptics_core::dynamics::{evolve, init_data, suggest_dt, DtRule, EvolveConfig};
use geoptics_core::fit::power_law_fit;
use geoptics_core::grid::{sobolev_norm, spectral_divergence, spectral_gradient};
use geoptics_core::wkb::corrector::{corrector_evolve_with, initial_phase_rate};
use geoptics_core::wkb::grenier::{grenier_evolve, grenier_stable_dt};
use geoptics_core::wkb::limit::{limit_evolve, limit_system_step_with_tol};
use geoptics_core::wkb::*;
use geoptics_core::{Complex64, Error, Field, Grid, Nonlinearity, Potential, TimeWeight};

const ID: TimeWeight = TimeWeight::Identity;

fn gaussian(grid: &Grid) -> Field {
    Field::from_real_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
}

fn line(m: usize) -> Grid {
    Grid::new(1, m, 8.0).unwrap()
}

fn pair(a: &Field, phi: &Field) -> LimitPair {
    LimitPair::new(a.clone(), phi.clone(), 0.0).unwrap()
}

#[test]
fn zero_amplitude_and_zero_phase_stay_zero() {
    let g = line(64);
    let zero = Field::zeros(&g);
    let s = limit_evolve(&pair(&zero, &zero), 1e-2, 0.5, &Nonlinearity::Cubic, ID).unwrap();
    assert_eq!(s.a.max_abs(), 0.0);
    assert_eq!(s.phi.max_abs(), 0.0);
}

#[test]
fn zero_amplitude_follows_pure_eikonal() {
    let g = Grid::new(1, 64, std::f64::consts::PI).unwrap();
    let zero = Field::zeros(&g);
    let phi0 = Field::from_real_fn(&g, |x| 0.1 * x[0].sin());
    let s = limit_evolve(&pair(&zero, &phi0), 1e-3, 0.1, &Nonlinearity::Cubic, ID).unwrap();
    assert_eq!(s.a.max_abs(), 0.0);
    // pointwise Burgers check for v = φₓ: vₜ + v vₓ = 0 by characteristics
    let v0 = |x: f64| 0.1 * x.cos();
    let (_, v) = euler_variables(&s);
    for (i, x) in g.nodes().iter().enumerate() {
        // solve y + t·v0(y) = x by Newton
        let mut y = *x;
        for _ in 0..50 {
            let r = y + 0.1 * v0(y) - x;
            y -= r / (1.0 - 0.1 * 0.1 * y.sin());
        }
        assert!((v[0].values()[i].re - v0(y)).abs() < 1e-8);
    }
}

#[test]
fn constant_amplitude_is_homogeneous_solution() {
    let g = line(32);
    let c = Complex64::new(0.6, -0.8);
    let a = Field::constant(&g, c);
    let s = limit_evolve(&pair(&a, &Field::zeros(&g)), 1e-2, 1.0, &Nonlinearity::Cubic, ID).unwrap();
    assert!(s.a.distance(&a).unwrap() < 1e-10);
    let exact = Field::constant(&g, Complex64::new(-1.0, 0.0));
    assert!(s.phi.distance(&exact).unwrap() < 1e-10);
}

#[test]
fn limit_mass_is_conserved_before_caustic() {
    let g = line(256);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| -0.3 * x[0] * x[0] * (-x[0] * x[0] / 8.0).exp());
    let s = limit_evolve(&pair(&a0, &phi0), 1e-3, 0.3, &Nonlinearity::Cubic, ID).unwrap();
    assert!((s.mass() - a0.mass()).abs() < 1e-6 * a0.mass());
}

#[test]
fn focusing_phase_raises_caustic_flag() {
    let g = line(256);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| -(x[0] * x[0]) * (-x[0] * x[0] / 4.0).exp());
    // rays cross at t = 1/2; |∂²φ(0)| = 2/(1 − 2t) reaches 10 at t = 0.4
    let mut s = pair(&a0, &phi0);
    let err = loop {
        match limit_system_step_with_tol(&s, 1e-3, &Nonlinearity::Zero, ID, 10.0) {
            Ok(next) => s = next,
            Err(e) => break e,
        }
    };
    match err {
        Error::Caustic { time, hessian } => {
            assert!(hessian > 10.0);
            assert!((0.39..0.45).contains(&time), "flagged at {time}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn euler_variables_of_trivial_states() {
    let g = line(32);
    let (rho, v) = euler_variables(&pair(&Field::zeros(&g), &Field::zeros(&g)));
    assert_eq!(rho.max_abs(), 0.0);
    assert_eq!(v[0].max_abs(), 0.0);
    let c = Complex64::new(0.3, 0.4);
    let (rho, v) = euler_variables(&pair(&Field::constant(&g, c), &Field::zeros(&g)));
    assert!(rho.values().iter().all(|r| (r.re - 0.25).abs() < 1e-15));
    assert_eq!(v[0].max_abs(), 0.0);
}

#[test]
fn euler_continuity_residual_is_small() {
    let g = Grid::new(2, 128, 6.0).unwrap();
    let a0 = Field::from_real_fn(&g, |x| (-(x[0] - 0.4).powi(2) - x[1] * x[1]).exp());
    let phi0 = Field::from_real_fn(&g, |x| 0.2 * (-(x[0] * x[0] + x[1] * x[1])).exp());
    let nl = Nonlinearity::Cubic;
    let (t, d) = (0.2, 1e-3);
    let s1 = limit_evolve(&pair(&a0, &phi0), 1e-3, t - d, &nl, ID).unwrap();
    let s2 = limit_evolve(&s1, 1e-3, t, &nl, ID).unwrap();
    let s3 = limit_evolve(&s2, 1e-3, t + d, &nl, ID).unwrap();
    let (rho1, _) = euler_variables(&s1);
    let (rho2, v2) = euler_variables(&s2);
    let (rho3, _) = euler_variables(&s3);
    let flux: Vec<Field> = v2.iter().map(|vk| vk.zip_map(&rho2, |v, r| v * r).unwrap()).collect();
    let div = spectral_divergence(&flux).unwrap();
    let residual = rho3.sub(&rho1).unwrap().scale_real(0.5 / d).add(&div).unwrap();
    let r = residual.norm_l2();
    assert!(r < 1e-4, "{r:e}");
}

#[test]
fn cascade_first_coefficients_for_zero_phase() {
    let g = line(128);
    let a0 = Field::from_fn(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.2 * (-(x[0] - 1.0).powi(2)).exp()));
    let phi0 = Field::zeros(&g);
    for nl in [
        Nonlinearity::Cubic,
        Nonlinearity::power(0.5, 2).unwrap(),
        Nonlinearity::Saturating { amplitude: 2.0, scale: 0.7 },
    ] {
        let c = taylor_cascade(&a0, &phi0, 3, &nl, CascadeVariant::Standard).unwrap();
        assert_eq!(c.phis.len(), 4);
        assert_eq!(c.amps.len(), 4);
        for (p, a) in c.phis[1].values().iter().zip(a0.values()) {
            assert!((p.re + nl.value(a.norm_sqr())).abs() < 1e-10);
        }
        assert!(c.phis[2].max_abs() < 1e-12, "φ₂ should vanish");
    }
}

#[test]
fn cascade_first_phase_with_nonzero_initial_phase_matches_limit_rate() {
    let g = line(256);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| 0.4 * (-(x[0] - 0.5).powi(2)).exp());
    let nl = Nonlinearity::Cubic;
    let c = taylor_cascade(&a0, &phi0, 1, &nl, CascadeVariant::Standard).unwrap();
    let grad = spectral_gradient(&phi0);
    let expected = Field::new(
        g.clone(),
        grad[0]
            .values()
            .iter()
            .zip(a0.values())
            .map(|(v, a)| Complex64::new(-0.5 * v.re * v.re - a.norm_sqr(), 0.0))
            .collect(),
    )
    .unwrap();
    assert!(c.phis[1].distance(&expected).unwrap() < 1e-10);
    // central difference of the limit phase at t = 0 (second order) via ±τ runs
    let tau = 1e-3;
    let fwd = limit_evolve(&pair(&a0, &phi0), 1e-4, tau, &nl, ID).unwrap();
    // time reversal: φ(−τ) = −ψ(τ) where ψ solves the system with data (a₀, −φ₀)
    let rev = limit_evolve(&pair(&a0, &phi0.scale_real(-1.0)), 1e-4, tau, &nl, ID).unwrap();
    let rate = fwd.phi.add(&rev.phi).unwrap().scale_real(0.5 / tau);
    let rel = rate.distance(&c.phis[1]).unwrap() / c.phis[1].norm_l2();
    assert!(rel < 1e-3, "{rel:e}");
}

fn cascade_residual(
    a0: &Field,
    phi0: &Field,
    order: usize,
    ts: &[f64],
    dt: f64,
    nl: &Nonlinearity,
    variant: CascadeVariant,
) -> Vec<f64> {
    let c = taylor_cascade(a0, phi0, order, nl, variant).unwrap();
    let weight = match variant {
        CascadeVariant::Standard => ID,
        CascadeVariant::Weak { n } => TimeWeight::Weak { n },
    };
    ts.iter()
        .map(|&t| {
            let s = limit_evolve(&pair(a0, phi0), dt, t, nl, weight).unwrap();
            s.phi.distance(&c.phase_sum(t, order).unwrap()).unwrap()
                + s.a.distance(&c.amplitude_sum(t, order).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn order_four_partial_sum_tracks_limit_system() {
    let g = line(256);
    let a0 = gaussian(&g);
    let ts = [0.0125, 0.025, 0.05, 0.1];
    let res = cascade_residual(&a0, &Field::zeros(&g), 4, &ts, 1e-4, &Nonlinearity::Cubic, CascadeVariant::Standard);
    let slope = power_law_fit(&ts, &res).unwrap().slope;
    assert!(slope > 4.5, "slope {slope}, residuals {res:?}");
}

#[test]
fn cascade_residuals_beat_their_order() {
    let g = line(256);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| 0.3 * (-(x[0] - 0.5).powi(2)).exp());
    let ts = [0.0125, 0.025, 0.05, 0.1];
    for order in 1..=3 {
        let res = cascade_residual(&a0, &phi0, order, &ts, 1e-4, &Nonlinearity::Cubic, CascadeVariant::Standard);
        let slope = power_law_fit(&ts, &res).unwrap().slope;
        assert!(slope > order as f64 + 0.5, "J = {order}: slope {slope}");
    }
}

#[test]
fn weak_ladder_tracks_weighted_limit_system() {
    let g = Grid::new(2, 64, 5.0).unwrap();
    let a0 = gaussian(&g);
    let phi0 = Field::zeros(&g);
    let ts = [0.1, 0.2, 0.4];
    for n in [2u32, 3] {
        let res = cascade_residual(&a0, &phi0, 2, &ts, 1e-3, &Nonlinearity::Cubic, CascadeVariant::Weak { n });
        let slope = power_law_fit(&ts, &res).unwrap().slope;
        let floor = (3 * n - 1) as f64 - 0.5;
        assert!(slope > floor, "n = {n}: slope {slope}, residuals {res:?}");
    }
}

#[test]
fn cascade_rejects_bad_requests() {
    let g = line(32);
    let a0 = gaussian(&g);
    let zero = Field::zeros(&g);
    assert!(matches!(
        taylor_cascade(&a0, &zero, 9, &Nonlinearity::Cubic, CascadeVariant::Standard),
        Err(Error::Config(_))
    ));
    fn f(y: f64) -> f64 {
        y.sqrt() * y
    }
    fn fp(y: f64) -> f64 {
        1.5 * y.sqrt()
    }
    let custom = Nonlinearity::Custom { f, f_prime: fp };
    assert!(matches!(
        taylor_cascade(&a0, &zero, 2, &custom, CascadeVariant::Standard),
        Err(Error::Unsupported(_))
    ));
    assert!(matches!(
        taylor_cascade(&a0, &a0, 2, &Nonlinearity::Cubic, CascadeVariant::Weak { n: 2 }),
        Err(Error::Unsupported(_))
    ));
    let c = taylor_cascade(&a0, &zero, 2, &Nonlinearity::Cubic, CascadeVariant::Standard).unwrap();
    assert!(phase_approximant(&c, &a0, 0.1, 0.1, 3).is_err());
}

#[test]
fn phase_approximant_examples() {
    let g = line(64);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| 0.2 * x[0].sin());
    let h = 0.1;
    let c = taylor_cascade(&a0, &phi0, 2, &Nonlinearity::Cubic, CascadeVariant::Standard).unwrap();
    let at0 = phase_approximant(&c, &a0, 0.0, h, 2).unwrap();
    assert!(at0.distance(&init_data(&a0, &phi0, h).unwrap().field).unwrap() < 1e-14);

    let k = Complex64::new(0.7, 0.2);
    let cst = Field::constant(&g, k);
    let c = taylor_cascade(&cst, &Field::zeros(&g), 1, &Nonlinearity::Cubic, CascadeVariant::Standard).unwrap();
    let t = 0.3;
    let u = phase_approximant(&c, &cst, t, h, 1).unwrap();
    let ode = geoptics_core::approx::ode_solution(&cst, t, h, &Nonlinearity::Cubic);
    assert!(u.distance(&ode).unwrap() < 1e-13);
}

#[test]
fn phase_approximant_follows_solver_in_short_time_regime() {
    let g = Grid::new(1, 2048, 12.0).unwrap();
    let a0 = Field::from_real_fn(&g, |x| (-0.5 * x[0] * x[0]).exp());
    let phi0 = Field::zeros(&g);
    let h: f64 = 0.05;
    let t = h.powf(0.4);
    let nl = Nonlinearity::Cubic;
    let c = taylor_cascade(&a0, &phi0, 3, &nl, CascadeVariant::Standard).unwrap();
    let approx = phase_approximant(&c, &a0, t, h, 3).unwrap();
    let psi0 = init_data(&a0, &phi0, h).unwrap();
    let u = evolve(&psi0, &EvolveConfig::new(2e-4, t, nl)).unwrap().state.field;
    let gap = u.distance(&approx).unwrap();
    assert!(gap < 0.05 * a0.norm_l2(), "gap {gap:e}");
}

#[test]
fn cascade_phase_difference_is_linear_in_perturbation() {
    // φ₁ − φ̃₁ − 2δRe(b₀ā₀)f′(|a₀|²) = O(δ²) for ã₀ = a₀ + δb₀
    let g = line(128);
    let a0 = gaussian(&g);
    let b0 = Field::from_fn(&g, |x| Complex64::new((-(x[0] - 0.7).powi(2)).exp(), 0.3 * (-(x[0] * x[0])).exp()));
    let zero = Field::zeros(&g);
    let nl = Nonlinearity::Saturating { amplitude: 1.0, scale: 0.8 };
    let base = taylor_cascade(&a0, &zero, 1, &nl, CascadeVariant::Standard).unwrap();
    let mut errs = Vec::new();
    for delta in [1e-2, 1e-3] {
        let pert = a0.add(&b0.scale_real(delta)).unwrap();
        let c = taylor_cascade(&pert, &zero, 1, &nl, CascadeVariant::Standard).unwrap();
        let linear = a0
            .zip_map(&b0, |a, b| Complex64::new(2.0 * delta * (b * a.conj()).re * nl.slope(a.norm_sqr()), 0.0))
            .unwrap();
        let r = base.phis[1].sub(&c.phis[1]).unwrap().sub(&linear).unwrap();
        errs.push(sobolev_norm(&r, 2.0).unwrap() / (delta * delta));
    }
    assert!(errs[1] < 1.1 * errs[0] && errs[0] < 1.1 * errs[1], "{errs:?}");
}

#[test]
fn grenier_constant_state_is_stationary_without_h() {
    let g = line(32);
    let c = Complex64::new(0.5, 0.5);
    let s0 = HyperbolicState::from_initial(&Field::constant(&g, c), &Field::zeros(&g), 0.0, 0.0).unwrap();
    let s = grenier_evolve(&s0, 1e-2, 0.5, &Nonlinearity::Cubic, ID).unwrap();
    assert!(s.alpha.distance(&s0.alpha).unwrap() < 1e-14);
    assert_eq!(s.v[0].max_abs(), 0.0);
    assert!((s.anchor_phase + 0.25).abs() < 1e-14);
}

#[test]
fn grenier_without_h_matches_limit_system() {
    let g = line(256);
    let a0 = gaussian(&g);
    let phi0 = Field::from_real_fn(&g, |x| 0.2 * (-(x[0] - 0.3).powi(2)).exp());
    let nl = Nonlinearity::Cubic;
    let s = grenier_evolve(&HyperbolicState::from_initial(&a0, &phi0, 0.0, 0.0).unwrap(), 1e-3, 0.2, &nl, ID).unwrap();
    let l = limit_evolve(&pair(&a0, &phi0), 1e-3, 0.2, &nl, ID).unwrap();
    assert!(s.alpha.distance(&l.a).unwrap() < 1e-9);
    assert!(s.phase(1e-8).unwrap().distance(&l.phi).unwrap() < 1e-9);
}

#[test]
fn grenier_reconstruction_follows_solver() {
    let g = line(512);
    let a0 = gaussian(&g);
    let phi0 = Field::zeros(&g);
    let nl = Nonlinearity::Cubic;
    let h = 0.05;
    let s0 = HyperbolicState::from_initial(&a0, &phi0, h, 0.0).unwrap();
    let dt = grenier_stable_dt(&s0, &nl, ID).min(1e-3);
    let s = grenier_evolve(&s0, dt, 0.1, &nl, ID).unwrap();
    let rec = s.reconstruct(1e-8).unwrap();
    let psi0 = init_data(&a0, &phi0, h).unwrap();
    let dt = suggest_dt(&a0, h, &nl, &Potential::None, DtRule::default()).unwrap();
    let u = evolve(&psi0, &EvolveConfig::new(dt, 0.1, nl)).unwrap().state.field;
    let gap = u.distance(&rec).unwrap();
    assert!(gap < 1e-3 * h, "{gap:e}");
}

#[test]
fn grenier_positivity_violation_is_reported() {
    let g = line(32);
    let a0 = gaussian(&g);
    let s0 = HyperbolicState::from_initial(&a0, &Field::zeros(&g), 0.1, 0.0).unwrap();
    let err = grenier_step(&s0, 1e-3, &Nonlinearity::power(-1.0, 1).unwrap(), ID).unwrap_err();
    assert!(matches!(err, Error::Symmetrizer { min_fprime } if min_fprime < 0.0));
    // f′(0) = 0 for the quintic law, and this amplitude vanishes at x = 0
    let odd = Field::from_real_fn(&g, |x| x[0] * (-x[0] * x[0]).exp());
    let s0 = HyperbolicState::from_initial(&odd, &Field::zeros(&g), 0.1, 0.0).unwrap();
    let err = grenier_step(&s0, 1e-3, &Nonlinearity::power(1.0, 2).unwrap(), ID).unwrap_err();
    assert!(matches!(err, Error::Symmetrizer { .. }));
}

#[test]
fn grenier_energy_examples() {
    let g = line(64);
    let nl = Nonlinearity::Cubic;
    let zero = HyperbolicState::from_initial(&Field::zeros(&g), &Field::zeros(&g), 0.1, 0.0).unwrap();
    assert_eq!(grenier_energy(&zero, 2, &nl, ID).unwrap(), 0.0);
    let c = Field::constant(&g, Complex64::new(0.3, -0.4));
    let s = HyperbolicState::from_initial(&c, &Field::zeros(&g), 0.1, 0.0).unwrap();
    let e = grenier_energy(&s, 0, &nl, ID).unwrap();
    assert!((e - c.mass()).abs() < 1e-14);
}

#[test]
fn grenier_energy_growth_rate_is_grid_independent() {
    let nl = Nonlinearity::Cubic;
    let rate = |m: usize| {
        let g = line(m);
        let a0 = gaussian(&g);
        let phi0 = Field::from_real_fn(&g, |x| 0.2 * (-(x[0] * x[0])).exp());
        let mut s = HyperbolicState::from_initial(&a0, &phi0, 0.05, 0.0).unwrap();
        let e0 = grenier_energy(&s, 2, &nl, ID).unwrap();
        let dt = grenier_stable_dt(&s, &nl, ID).min(1e-3);
        let mut worst: f64 = 0.0;
        for k in 1..=4 {
            let t = 0.025 * k as f64;
            s = grenier_evolve(&s, dt, t, &nl, ID).unwrap();
            let e = grenier_energy(&s, 2, &nl, ID).unwrap();
            worst = worst.max((e / e0).ln() / t);
        }
        worst
    };
    let (c1, c2) = (rate(256), rate(512));
    assert!(c1.is_finite() && c2.is_finite());
    assert!((c1 - c2).abs() <= 0.05 * c1.abs().max(c2.abs()).max(1e-3), "{c1} vs {c2}");
}

#[test]
fn phase_from_velocity_examples() {
    let g = Grid::new(1, 64, std::f64::consts::PI).unwrap();
    let zero = Field::zeros(&g);
    let phi = phase_from_velocity(&[zero.clone()], 3, 0.7, 1e-8).unwrap();
    assert!(phi.values().iter().all(|z| (z.re - 0.7).abs() < 1e-15));
    let v = Field::from_real_fn(&g, |x| x[0].cos());
    let phi = phase_from_velocity(&[v], 0, 0.0, 1e-8).unwrap();
    let offset = phi.values()[0].re - g.node(0).sin();
    for (i, x) in g.nodes().iter().enumerate() {
        assert!((phi.values()[i].re - x.sin() - offset).abs() < 1e-12);
    }
    // rotational field in 2-D
    let g2 = Grid::new(2, 32, std::f64::consts::PI).unwrap();
    let vx = Field::from_real_fn(&g2, |x| x[1].sin());
    let vy = Field::from_real_fn(&g2, |x| -x[0].sin());
    assert!(matches!(phase_from_velocity(&[vx, vy], 0, 0.0, 1e-8), Err(Error::Curl { .. })));
}

#[test]
fn corrector_starts_from_its_data() {
    let g = line(128);
    let a0 = gaussian(&g);
    let nl = Nonlinearity::Cubic;
    let traj = LimitTrajectory::record(&pair(&a0, &Field::zeros(&g)), 1e-3, 0.01, &nl, ID).unwrap();
    let mut first = None;
    let end = corrector_evolve_with(&traj, &Field::zeros(&g), traj.dt, 0.01, &nl, ID, |p| {
        if first.is_none() {
            first = Some(p.clone());
        }
    })
    .unwrap();
    let first = first.unwrap();
    assert_eq!(first.phi1c.max_abs(), 0.0);
    assert_eq!(first.a1c.max_abs(), 0.0);
    let rate = initial_phase_rate(&a0, &Field::zeros(&g), &nl, ID, 0.0).unwrap();
    assert_eq!(rate.max_abs(), 0.0);
    // a⁽¹⁾ is driven by (i/2)Δa only: it starts purely imaginary for real a₀
    assert!(end.a1c.max_abs() > 0.0);
    let re: f64 = end.a1c.values().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let im: f64 = end.a1c.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(re < 1e-2 * im);
}

#[test]
fn corrector_initial_phase_rate_matches_run() {
    let g = line(128);
    let a0 = gaussian(&g);
    let a1 = Field::from_real_fn(&g, |x| (-(x[0] - 0.5).powi(2)).exp());
    let nl = Nonlinearity::Cubic;
    let tau = 1e-4;
    let traj = LimitTrajectory::record(&pair(&a0, &Field::zeros(&g)), tau / 4.0, tau, &nl, ID).unwrap();
    let p = corrector_evolve(&traj, &a1, traj.dt, tau, &nl, ID).unwrap();
    let rate = initial_phase_rate(&a0, &a1, &nl, ID, 0.0).unwrap();
    for (z, r) in p.phi1c.values().iter().zip(rate.values()) {
        assert!((z.re / tau - r.re).abs() < 1e-3 * rate.max_abs());
    }
    for (r, (a, b)) in rate.values().iter().zip(a0.values().iter().zip(a1.values())) {
        assert!((r.re + 2.0 * (a.conj() * b).re).abs() < 1e-15);
    }
}

#[test]
fn corrector_rejects_mismatched_steps() {
    let g = line(32);
    let a0 = gaussian(&g);
    let nl = Nonlinearity::Cubic;
    let traj = LimitTrajectory::record(&pair(&a0, &Field::zeros(&g)), 1e-2, 0.1, &nl, ID).unwrap();
    let zero = Field::zeros(&g);
    assert_eq!(corrector_evolve(&traj, &zero, 2e-2, 0.1, &nl, ID).unwrap_err(), Error::TrajectoryMismatch);
    assert_eq!(corrector_evolve(&traj, &zero, traj.dt, 0.2, &nl, ID).unwrap_err(), Error::TrajectoryMismatch);
}

#[test]
fn amplitude_gap_is_linear_in_h_and_corrector_removes_it() {
    let g = line(512);
    let a0 = gaussian(&g);
    let phi0 = Field::zeros(&g);
    let nl = Nonlinearity::Cubic;
    let (t, dt) = (0.1, 1e-3);
    let traj = LimitTrajectory::record(&pair(&a0, &phi0), dt, t, &nl, ID).unwrap();
    let cor = corrector_evolve(&traj, &Field::zeros(&g), traj.dt, t, &nl, ID).unwrap();
    let base = traj.states.last().unwrap();
    let hs = [0.2, 0.1, 0.05];
    let mut lead = Vec::new();
    let mut rest = Vec::new();
    for &h in &hs {
        let s0 = HyperbolicState::from_initial(&a0, &phi0, h, 0.0).unwrap();
        let s = grenier_evolve(&s0, dt, t, &nl, ID).unwrap();
        let d = s.alpha.sub(&base.a).unwrap();
        lead.push(d.norm_l2());
        rest.push(d.sub(&cor.a1c.scale_real(h)).unwrap().norm_l2());
    }
    let p1 = power_law_fit(&hs, &lead).unwrap().slope;
    let p2 = power_law_fit(&hs, &rest).unwrap().slope;
    assert!((0.8..=1.2).contains(&p1), "slope {p1}");
    assert!(p2 >= 1.8, "slope {p2}");
}
