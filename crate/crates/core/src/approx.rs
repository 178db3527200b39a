//! Closed-form approximants and comparison metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{homogeneous_sobolev_norm, l2_inner, sobolev_norm, Field};
use crate::nonlinearity::Nonlinearity;

/// Solution of the Laplacian-free equation `ih∂ₜu = f(|u|²)u`:
/// `a₀·exp(−i t f(|a₀|²)/h)` pointwise.
pub fn ode_solution(a0: &Field, t: f64, h: f64, nl: &Nonlinearity) -> Field {
    a0.map(|a| a * Complex64::from_polar(1.0, -t * nl.value(a.norm_sqr()) / h))
}

/// `arccos(|⟨u,v⟩| / (‖u‖‖v‖))`, in `[0, π/2]`.
pub fn projective_distance(u: &Field, v: &Field) -> Result<f64> {
    u.ensure_same_grid(v)?;
    let (nu, nv) = (u.norm_l2(), v.norm_l2());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Domain("projective distance of a zero field".into()));
    }
    // arccos(c) = 2·asin(chord/2), where chord is the distance between the
    // normalized, phase-aligned fields; this form stays accurate near 0
    let inner = l2_inner(u, v)?;
    let c = inner.norm() / (nu * nv);
    if c.clamp(0.0, 1.0) < 0.5 {
        return Ok(c.clamp(0.0, 1.0).acos());
    }
    let align = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    let chord = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (a / nu - align * b / nv).norm_sqr())
        .sum::<f64>()
        * u.grid().cell_volume();
    Ok((2.0 * (0.5 * chord.sqrt()).min(1.0).asin()).min(FRAC_PI_2))
}

/// Predicted `|u − v|` for data `a₀` and `a₀ + δb₀` from the ODE phases:
/// `|a₀|·|exp(i t δ c/h) − 1|` with `c = 2Re(b₀ā₀)f′(|a₀|²)`.
pub fn ode_instability_prediction(
    a0: &Field,
    b0: &Field,
    delta: f64,
    t: f64,
    h: f64,
    nl: &Nonlinearity,
) -> Result<Field> {
    a0.zip_map(b0, |a, b| {
        let c = 2.0 * (b * a.conj()).re * nl.slope(a.norm_sqr());
        let phase = t * delta * c / h;
        // |e^{iθ} − 1| = 2|sin(θ/2)|
        Complex64::new(a.norm() * 2.0 * (0.5 * phase).sin().abs(), 0.0)
    })
}

/// Gaps between two solutions at the initial time and at `t*`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub h: f64,
    pub t_star: f64,
    pub l2_initial_gap: f64,
    pub l2_gap_at_t_star: f64,
    /// `gap(t*)/gap(0)`; 1 when both gaps vanish.
    pub ratio: f64,
    /// `(s, ‖u − v‖_{Hˢ})` at `t*`.
    pub hs_gaps: Vec<(f64, f64)>,
    pub projective_initial: f64,
    pub projective_at_t_star: f64,
}

/// Which halves of the "instability observed" criterion hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstabilityThreshold {
    /// `gap(t*) ≥ 0.1·‖a₀‖`.
    pub gap_reached: bool,
    /// `gap(0) ≤ δ·C_b`.
    pub initially_close: bool,
}

impl InstabilityThreshold {
    pub fn observed(&self) -> bool {
        self.gap_reached && self.initially_close
    }
}

impl DivergenceReport {
    pub fn threshold(&self, a0_norm: f64, delta: f64, c_b: f64) -> InstabilityThreshold {
        InstabilityThreshold {
            gap_reached: self.l2_gap_at_t_star >= 0.1 * a0_norm,
            initially_close: self.l2_initial_gap <= delta * c_b,
        }
    }

    pub fn csv_header(&self) -> String {
        let mut out = String::from(
            "h,t_star,l2_initial_gap,l2_gap_at_t_star,ratio,projective_initial,projective_at_t_star",
        );
        for (s, _) in &self.hs_gaps {
            out.push_str(&alloc::format!(",hs_gap_{s}"));
        }
        out
    }

    pub fn csv_row(&self) -> String {
        let mut out = alloc::format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.h,
            self.t_star,
            self.l2_initial_gap,
            self.l2_gap_at_t_star,
            self.ratio,
            self.projective_initial,
            self.projective_at_t_star
        );
        for (_, g) in &self.hs_gaps {
            out.push_str(&alloc::format!(",{g:e}"));
        }
        out
    }
}

fn projective_or_zero(u: &Field, v: &Field) -> Result<f64> {
    if u.norm_l2() == 0.0 && v.norm_l2() == 0.0 {
        Ok(0.0)
    } else {
        projective_distance(u, v)
    }
}

/// Collects the gaps between `(u0, v0)` and `(ut, vt)`.
pub fn divergence_report(
    u0: &Field,
    v0: &Field,
    ut: &Field,
    vt: &Field,
    s_list: &[f64],
    t_star: f64,
    h: f64,
) -> Result<DivergenceReport> {
    u0.ensure_same_grid(v0)?;
    ut.ensure_same_grid(vt)?;
    u0.ensure_same_grid(ut)?;
    let gap0 = u0.distance(v0)?;
    let gapt = ut.distance(vt)?;
    let ratio = if gap0 > 0.0 {
        gapt / gap0
    } else if gapt == 0.0 {
        1.0
    } else {
        return Err(Error::Domain(
            "identical initial data cannot produce a finite divergence ratio".into(),
        ));
    };
    let diff = ut.sub(vt)?;
    let hs_gaps = s_list
        .iter()
        .map(|&s| sobolev_norm(&diff, s).map(|g| (s, g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceReport {
        h,
        t_star,
        l2_initial_gap: gap0,
        l2_gap_at_t_star: gapt,
        ratio,
        hs_gaps,
        projective_initial: projective_or_zero(u0, v0)?,
        projective_at_t_star: projective_or_zero(ut, vt)?,
    })
}

/// Semiclassical Sobolev gap `‖(hD)ˢ(u − v)‖` used for the flow-map norms.
pub fn semiclassical_gap(u: &Field, v: &Field, s: f64, h: f64) -> Result<f64> {
    let d = u.sub(v)?;
    Ok(h.powf(s) * homogeneous_sobolev_norm(&d, s)?)
}
