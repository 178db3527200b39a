//! Numerical core for semiclassical nonlinear Schrödinger dynamics.
//!
//! Everything here is pure computation on periodic lattice fields:
//!
//! - [`grid`]: periodic box, Fourier calculus, Sobolev norms.
//! - [`nonlinearity`]: the nonlinearities `f`, external potentials and
//!   time weights shared by every solver.
//! - [`dynamics`]: Strang-split pseudo-spectral evolution of
//!   `ih ∂ₜu + (h²/2)Δu = V u + f(|u|²) u`.
//! - [`wkb`]: the eikonal/transport limit system, the exact
//!   amplitude/velocity hyperbolic system, the small-time Taylor cascade and
//!   the first corrector.
//! - [`approx`]: closed-form approximants and divergence diagnostics.
//! - [`transforms`]: lens, conformal and parabolic changes of variables.
//!
//! The crate is `no_std` (it needs `alloc`). IO, configuration files and the
//! experiment harness live in the `geoptics` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approx;
pub mod dynamics;
mod error;
mod fft;
pub mod fit;
pub mod grid;
pub mod nonlinearity;
pub mod transforms;
pub mod wkb;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use nonlinearity::{Nonlinearity, Potential, TimeWeight};

pub use num_complex::Complex64;
