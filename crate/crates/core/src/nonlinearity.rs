//! Nonlinearities `f`, external potentials `V` and the explicit time
//! weights that multiply `f` in the rescaled (lens/conformal) frames.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;


#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{config, Error, Result};
use crate::grid::{Field, Grid};

/// The map `y ↦ f(y)` applied to `y = |u|²`.
#[derive(Clone, Debug)]
pub enum Nonlinearity {
    /// `f ≡ 0`.
    Zero,
    /// `f(y) = y`.
    Cubic,
    /// `f(y) = ω·y^σ`. Negative `ω` is focusing and only meant for
    /// norm-inflation runs.
    Power { coupling: f64, exponent: u32 },
    /// `f_eff(y) = base(ε^k·y)`.
    Scaled {
        base: Box<Nonlinearity>,
        epsilon: f64,
        k: f64,
    },
    /// `f(y) = A·tanh(y/B)`, a bounded smooth defocusing law.
    Saturating { amplitude: f64, scale: f64 },
    /// User callbacks for `f` and `f′`. Not usable by the Taylor cascade.
    Custom {
        f: fn(f64) -> f64,
        f_prime: fn(f64) -> f64,
    },
}

impl Nonlinearity {
    pub fn power(coupling: f64, exponent: u32) -> Result<Self> {
        let nl = Self::Power { coupling, exponent };
        nl.validate()?;
        Ok(nl)
    }

    pub fn scaled(base: Nonlinearity, epsilon: f64, k: f64) -> Result<Self> {
        let nl = Self::Scaled {
            base: Box::new(base),
            epsilon,
            k,
        };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero | Self::Cubic | Self::Custom { .. } => Ok(()),
            Self::Power { coupling, exponent } => {
                if *exponent == 0 {
                    Err(config("power nonlinearity needs exponent >= 1"))
                } else if !(coupling.is_finite() && *coupling != 0.0) {
                    Err(config("power nonlinearity needs a finite nonzero coupling"))
                } else {
                    Ok(())
                }
            }
            Self::Scaled { base, epsilon, k } => {
                if !(epsilon.is_finite() && *epsilon > 0.0 && k.is_finite()) {
                    return Err(config("scaled nonlinearity needs epsilon > 0 and finite k"));
                }
                base.validate()
            }
            Self::Saturating { amplitude, scale } => {
                if amplitude.is_finite() && *amplitude > 0.0 && scale.is_finite() && *scale > 0.0 {
                    Ok(())
                } else {
                    Err(config("saturating nonlinearity needs positive amplitude and scale"))
                }
            }
        }
    }

    /// `f(y)` without the domain check; callers pass `|u|² ≥ 0`.
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Cubic => y,
            Self::Power { coupling, exponent } => coupling * y.powi(*exponent as i32),
            Self::Scaled { base, epsilon, k } => base.value(epsilon.powf(*k) * y),
            Self::Saturating { amplitude, scale } => amplitude * (y / scale).tanh(),
            Self::Custom { f, .. } => f(y),
        }
    }

    /// `f′(y)` without the domain check.
    pub fn slope(&self, y: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Cubic => 1.0,
            Self::Power { coupling, exponent } => {
                let p = *exponent as i32;
                coupling * p as f64 * y.powi(p - 1)
            }
            Self::Scaled { base, epsilon, k } => {
                let c = epsilon.powf(*k);
                c * base.slope(c * y)
            }
            Self::Saturating { amplitude, scale } => {
                let sech = 1.0 / (y / scale).cosh();
                amplitude / scale * sech * sech
            }
            Self::Custom { f_prime, .. } => f_prime(y),
        }
    }

    pub fn f_eval(&self, y: f64) -> Result<f64> {
        check_domain(y)?;
        Ok(self.value(y))
    }

    pub fn f_prime(&self, y: f64) -> Result<f64> {
        check_domain(y)?;
        Ok(self.slope(y))
    }

    /// Smallest `f′` over the given values of `y`.
    pub fn min_slope(&self, ys: impl IntoIterator<Item = f64>) -> f64 {
        ys.into_iter().map(|y| self.slope(y)).fold(f64::INFINITY, f64::min)
    }

    /// Checks `f(0) = 0` and `f′ > 0` on `samples + 1` points of `[0, y_max]`.
    pub fn check_defocusing(&self, y_max: f64, samples: usize) -> Result<()> {
        if self.value(0.0) != 0.0 {
            return Err(Error::Domain(format!("f(0) = {} is not zero", self.value(0.0))));
        }
        let n = samples.max(1);
        let min = self.min_slope((0..=n).map(|i| y_max * i as f64 / n as f64));
        if min > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("f' is not positive on [0, {y_max}] (min {min:e})")))
        }
    }
}

fn check_domain(y: f64) -> Result<()> {
    if y >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("f is only defined for y >= 0 (got {y})")))
    }
}

/// External potential `V(x)`.
#[derive(Clone, Debug)]
pub enum Potential {
    None,
    /// `V = ω²|x|²/2`.
    Harmonic { omega: f64 },
    /// Sampled real potential `V + δ·V₁`, for the linear sub-quadratic runs.
    Sampled { base: Field, perturbation: Field, delta: f64 },
}

impl Potential {
    pub fn harmonic(omega: f64) -> Result<Self> {
        let p = Self::Harmonic { omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::None => Ok(()),
            Self::Harmonic { omega } => {
                if omega.is_finite() && *omega >= 0.0 {
                    Ok(())
                } else {
                    Err(config("trap frequency must be >= 0"))
                }
            }
            Self::Sampled {
                base,
                perturbation,
                delta,
            } => {
                base.ensure_same_grid(perturbation)?;
                base.check_finite()?;
                perturbation.check_finite()?;
                if !delta.is_finite() {
                    return Err(config("potential perturbation size must be finite"));
                }
                if base.max_imag() > 0.0 || perturbation.max_imag() > 0.0 {
                    return Err(Error::Domain("sampled potentials must be real".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    /// Nodal values on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Self::None => Ok(alloc::vec![0.0; grid.len()]),
            Self::Harmonic { omega } => Ok((0..grid.len())
                .map(|i| 0.5 * omega * omega * grid.radius_squared(i))
                .collect()),
            Self::Sampled {
                base,
                perturbation,
                delta,
            } => {
                if base.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(base
                    .values()
                    .iter()
                    .zip(perturbation.values())
                    .map(|(v, v1)| v.re + delta * v1.re)
                    .collect())
            }
        }
    }
}

/// Explicit time dependence in front of the nonlinearity:
/// the equation carries `W(t)·f(w(t)·|u|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeWeight {
    /// `W = w = 1`.
    Identity,
    /// `W = t⁻²`, `w = tⁿ` (conformal frame, no trap). Requires `n ≥ 2`.
    Weak { n: u32 },
    /// `W = 1/(1+t²)`, `w = (1+t²)^{n/2}` (lens frame).
    Harmonic { n: u32 },
    /// `W = 1/r²`, `w = rⁿ` with `r² = t₀² + (t−t₀)²` (trap plus conformal frame).
    ShiftedWeak { n: u32, t0: f64 },
}

impl TimeWeight {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Identity => Ok(()),
            Self::Weak { n } if n < 2 => Err(config("weak time weight needs n >= 2")),
            Self::Weak { .. } => Ok(()),
            Self::Harmonic { n } | Self::ShiftedWeak { n, .. } if n == 0 => {
                Err(config("time weight dimension must be >= 1"))
            }
            Self::ShiftedWeak { t0, .. } if !(t0.is_finite() && t0 > 0.0) => {
                Err(config("shifted weight needs t0 > 0"))
            }
            _ => Ok(()),
        }
    }

    fn radius_squared(&self, t: f64) -> f64 {
        match *self {
            Self::Identity => 1.0,
            Self::Weak { .. } => t * t,
            Self::Harmonic { .. } => 1.0 + t * t,
            Self::ShiftedWeak { t0, .. } => t0 * t0 + (t - t0) * (t - t0),
        }
    }

    fn dim(&self) -> i32 {
        match *self {
            Self::Identity => 0,
            Self::Weak { n } | Self::Harmonic { n } | Self::ShiftedWeak { n, .. } => n as i32,
        }
    }

    /// Outer factor `W(t)`.
    pub fn outer(&self, t: f64) -> f64 {
        1.0 / self.radius_squared(t)
    }

    /// Inner factor `w(t)`.
    pub fn inner(&self, t: f64) -> f64 {
        self.radius_squared(t).powf(0.5 * self.dim() as f64)
    }

    /// `W(t)·w(t)`, finite at `t = 0` for the weak weight.
    pub fn product(&self, t: f64) -> f64 {
        if matches!(self, Self::Identity) {
            return 1.0;
        }
        self.radius_squared(t).powf(0.5 * self.dim() as f64 - 1.0)
    }

    /// `W(t)·f(w(t)·y)`, using the `t → 0` limit for the weak weight.
    pub fn coupling(&self, nl: &Nonlinearity, t: f64, y: f64) -> f64 {
        match *self {
            Self::Identity => nl.value(y),
            Self::Weak { n } if t == 0.0 => {
                if n == 2 {
                    nl.slope(0.0) * y
                } else {
                    0.0
                }
            }
            _ => self.outer(t) * nl.value(self.inner(t) * y),
        }
    }

    /// `W(t)·w(t)·f′(w(t)·y)`.
    pub fn coupling_slope(&self, nl: &Nonlinearity, t: f64, y: f64) -> f64 {
        self.product(t) * nl.slope(self.inner(t) * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tanh_law() -> Nonlinearity {
        Nonlinearity::Saturating {
            amplitude: 2.0,
            scale: 1.5,
        }
    }

    #[test]
    fn f_eval_examples() {
        assert_eq!(Nonlinearity::Cubic.f_eval(0.0).unwrap(), 0.0);
        assert_eq!(Nonlinearity::Cubic.f_eval(2.0).unwrap(), 2.0);
        assert_eq!(Nonlinearity::power(1.0, 2).unwrap().f_eval(3.0).unwrap(), 9.0);
        assert!(matches!(Nonlinearity::Cubic.f_eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn f_prime_examples() {
        assert_eq!(Nonlinearity::Cubic.f_prime(7.5).unwrap(), 1.0);
        assert_eq!(Nonlinearity::power(1.0, 2).unwrap().f_prime(3.0).unwrap(), 6.0);
        assert!(matches!(Nonlinearity::Cubic.f_prime(-0.1), Err(Error::Domain(_))));
        let nl = tanh_law();
        let d = 1e-5;
        let fd = (nl.value(1.0 + d) - nl.value(1.0 - d)) / (2.0 * d);
        assert_relative_eq!(nl.f_prime(1.0).unwrap(), fd, max_relative = 1e-8);
    }

    #[test]
    fn scaled_composes() {
        let nl = Nonlinearity::scaled(Nonlinearity::Cubic, 0.01, 1.5).unwrap();
        assert_relative_eq!(nl.value(2.0), 2.0e-3, max_relative = 1e-14);
        assert_relative_eq!(nl.slope(2.0), 1.0e-3, max_relative = 1e-14);
    }

    #[test]
    fn validation() {
        assert!(Nonlinearity::power(0.0, 2).is_err());
        assert!(Nonlinearity::power(1.0, 0).is_err());
        assert!(Nonlinearity::scaled(Nonlinearity::Cubic, -1.0, 1.0).is_err());
        assert!(Potential::harmonic(-1.0).is_err());
        assert!(TimeWeight::Weak { n: 1 }.validate().is_err());
    }

    #[test]
    fn defocusing_check() {
        assert!(Nonlinearity::Cubic.check_defocusing(4.0, 100).is_ok());
        assert!(tanh_law().check_defocusing(4.0, 100).is_ok());
        assert!(Nonlinearity::power(-1.0, 1).unwrap().check_defocusing(4.0, 100).is_err());
    }

    #[test]
    fn harmonic_potential_samples() {
        let g = Grid::new(2, 8, 2.0).unwrap();
        let v = Potential::harmonic(3.0).unwrap().sample(&g).unwrap();
        let x = g.position(9);
        assert_relative_eq!(v[9], 4.5 * (x[0] * x[0] + x[1] * x[1]), max_relative = 1e-14);
    }

    #[test]
    fn weak_weight_limit_at_zero() {
        let w = TimeWeight::Weak { n: 2 };
        let nl = Nonlinearity::Cubic;
        assert_eq!(w.coupling(&nl, 0.0, 3.0), 3.0);
        assert_relative_eq!(w.coupling(&nl, 1e-3, 3.0), 3.0, max_relative = 1e-12);
        assert_eq!(TimeWeight::Weak { n: 3 }.coupling(&nl, 0.0, 3.0), 0.0);
    }

    proptest! {
        #[test]
        fn slope_matches_centered_differences(y in 0.01f64..5.0, sel in 0usize..4) {
            let nl = match sel {
                0 => Nonlinearity::Cubic,
                1 => Nonlinearity::Power { coupling: 0.7, exponent: 3 },
                2 => tanh_law(),
                _ => Nonlinearity::scaled(Nonlinearity::Power { coupling: 1.0, exponent: 2 }, 0.3, 1.5).unwrap(),
            };
            let d = 1e-5 * y.max(1.0);
            let fd = (nl.value(y + d) - nl.value(y - d)) / (2.0 * d);
            let exact = nl.slope(y);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-12));
        }

        #[test]
        fn defocusing_variants_have_positive_slope(y in 0.0f64..10.0) {
            prop_assert!(Nonlinearity::Cubic.slope(y) > 0.0);
            prop_assert!(tanh_law().slope(y) > 0.0);
        }

        #[test]
        fn weight_product_is_outer_times_inner(t in 0.01f64..3.0, n in 1u32..4) {
            for w in [TimeWeight::Harmonic { n }, TimeWeight::Weak { n: n + 1 }, TimeWeight::ShiftedWeak { n, t0: 0.2 }] {
                let direct = w.outer(t) * w.inner(t);
                prop_assert!((w.product(t) - direct).abs() <= 1e-12 * direct.abs());
            }
        }
    }
}
