//! Least-squares fits used to read convergence orders and growth rates off
//! sweeps.


#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{config, Result};

/// Straight-line fit `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(config("a line fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(config("fit samples must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(config("fit abscissae must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Fits `y ≈ C·x^p` in log–log coordinates; returns `p` as the slope and
/// `ln C` as the intercept.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(config("power-law fits need positive samples"));
    }
    let lx: alloc::vec::Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: alloc::vec::Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Observed order between consecutive sweep points, `ln(e₁/e₂)/ln(x₁/x₂)`.
pub fn pairwise_orders(xs: &[f64], ys: &[f64]) -> alloc::vec::Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[0] / y[1]).ln() / (x[0] / x[1]).ln())
        .collect()
}
