use geoptics_core::dynamics::{evolve, EvolveConfig, WaveFunction};
use geoptics_core::grid::{homogeneous_sobolev_norm, l2_inner, sobolev_norm};
use geoptics_core::transforms::{lens_transform, LensDirection, TargetGrid, TransformChecks};
use geoptics_core::{Complex64, Field, Grid, Nonlinearity, Potential};
use proptest::prelude::*;

/// Random smooth, decaying data: a sum of modulated Gaussians.
fn packet(grid: &Grid, bumps: &[(f64, f64, f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(amp, center, width, k)| {
                let r2: f64 = x.iter().map(|v| (v - center).powi(2)).sum();
                Complex64::from_polar(amp * (-r2 / (width * width)).exp(), k * x[0])
            })
            .sum()
    })
}

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.1f64..2.0, -1.5f64..1.5, 0.5f64..1.2, -3.0f64..3.0), 1..4)
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=2, 3u32..=6, 6.0f64..10.0).prop_map(|(dim, p, l)| Grid::new(dim, 1 << (p + if dim == 1 { 2 } else { 0 }), l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip_is_identity(grid in grid_strategy(), b in bumps(), noise in 0u64..1000) {
        // add a non-smooth component so every mode is exercised
        let f = packet(&grid, &b).map(|z| z + Complex64::new(((noise as f64) * 0.37).sin(), 0.0) * 1e-3);
        let back = grid.inverse(grid.forward(f.values()));
        let scale = f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in back.iter().zip(f.values()) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_holds(grid in grid_strategy(), b in bumps()) {
        let f = packet(&grid, &b);
        let physical = l2_inner(&f, &f).unwrap().re.sqrt();
        let spectral = sobolev_norm(&f, 0.0).unwrap();
        prop_assert!((physical - spectral).abs() <= 1e-10 * physical);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(b in bumps(), s in 0.0f64..3.0, ds in 0.0f64..2.0) {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let f = packet(&grid, &b);
        let low = sobolev_norm(&f, s).unwrap();
        let high = sobolev_norm(&f, s + ds).unwrap();
        prop_assert!(high >= low * (1.0 - 1e-14));
        prop_assert!(low >= f.norm_l2() * (1.0 - 1e-12));
        prop_assert!(homogeneous_sobolev_norm(&f, s).unwrap() <= low * (1.0 + 1e-12));
    }

    #[test]
    fn split_step_conserves_mass(b in bumps(), h in 0.05f64..0.5, coupling in -1.0f64..2.0, trap in 0.0f64..1.0) {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let a0 = packet(&grid, &b);
        let nl = Nonlinearity::power(coupling, 1).unwrap();
        let cfg = EvolveConfig::new(5e-3, 0.1, nl).with_potential(Potential::Harmonic { omega: trap });
        let run = evolve(&WaveFunction::new(a0.clone(), h, 0.0).unwrap(), &cfg).unwrap();
        let m0 = a0.mass();
        prop_assert!(((run.state.field.mass() - m0) / m0).abs() < 1e-8);
        prop_assert!(run.max_mass_drift < 1e-8);
    }

    #[test]
    fn lens_transform_is_unitary_and_invertible(b in bumps(), t in 0.0f64..0.6, h in 0.1f64..1.0) {
        let grid = Grid::new(1, 256, 12.0).unwrap();
        let u = packet(&grid, &b);
        let checks = TransformChecks { boundary_tol: 1e-10, tail_tol: 1e-6 };
        let free = lens_transform(&u, t.atan(), h, LensDirection::ToFree, TargetGrid::Same, checks);
        // data pushed to the box edge or above Nyquist is rejected rather than mangled
        prop_assume!(free.is_ok());
        let free = free.unwrap();
        prop_assert!((free.field.norm_l2() - u.norm_l2()).abs() <= 1e-6 * u.norm_l2());
        let back = lens_transform(&free.field, free.time, h, LensDirection::FromFree, TargetGrid::Same, checks);
        prop_assume!(back.is_ok());
        let back = back.unwrap();
        prop_assert!((back.time - t.atan()).abs() < 1e-14);
        prop_assert!(back.field.distance(&u).unwrap() <= 1e-6 * u.norm_l2());
    }
}
