//! Half-cell with a delta-function barrier, in dimensionless form.
//!
//! Lengths are in units of the half-cell width `d`, so the wavenumber enters
//! as `kd` and the velocity in the off-diagonal entries is rescaled to `kd`.
//! Only the zeros and poles of the log-derivatives matter for the band
//! structure, and those are unaffected by the rescaling.

use std::f64::consts::PI;

use crate::roots::{all_roots, bisect};
use crate::tmatrix::WMatrix;
use crate::{Error, Result};

/// Resolution of the sign-change scan, in units of π.
pub const SCAN_STEP_PI: f64 = 1e-3;
/// Root tolerance in kd/π.
pub const ROOT_TOL_PI: f64 = 1e-8;

/// Barrier strength `Ωd` and asymmetry `s/d = (a − c)/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSpec {
    pub omega_d: f64,
    pub s_over_d: f64,
}

impl DeltaSpec {
    pub fn new(omega_d: f64, s_over_d: f64) -> Result<Self> {
        if !(omega_d >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Ωd must be >= 0 (got {omega_d})"
            )));
        }
        if !(s_over_d.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "s/d must lie in (-1, 1) (got {s_over_d})"
            )));
        }
        Ok(DeltaSpec { omega_d, s_over_d })
    }

    /// `Ωd = 1.403π`, comparable to the GaAs/AlGaAs reference cell.
    pub fn reference(s_over_d: f64) -> Self {
        DeltaSpec {
            omega_d: 1.403 * PI,
            s_over_d,
        }
    }

    pub fn mirrored(&self) -> Self {
        DeltaSpec {
            s_over_d: -self.s_over_d,
            ..*self
        }
    }
}

/// `W_R = W_c W_δ W_a` at dimensionless wavenumber `kd`.
pub fn delta_half_cell(kd: f64, spec: &DeltaSpec) -> Result<WMatrix> {
    if !(kd > 0.0) {
        return Err(Error::InvalidArgument(format!("kd must be > 0 (got {kd})")));
    }
    Ok(half_cell_unchecked(kd, spec))
}

fn half_cell_unchecked(kd: f64, spec: &DeltaSpec) -> WMatrix {
    let ks = kd * spec.s_over_d;
    let r = spec.omega_d / kd;
    let (skd, ckd) = kd.sin_cos();
    let (sks, cks) = ks.sin_cos();
    WMatrix {
        g: ckd + r * (skd - sks),
        u: (skd - r * (ckd - cks)) / kd,
        gp: -kd * (skd - r * (ckd + cks)),
        up: ckd + r * (skd + sks),
    }
}

/// Half the trace, `cos kd + (Ωd/kd) sin kd`; independent of `s`.
pub fn half_trace(kd: f64, omega_d: f64) -> f64 {
    kd.cos() + omega_d / kd * kd.sin()
}

/// Where the half-cell trace vanishes (`φ_h = π/2`), given a bracket in kd.
pub fn delta_bragg_point(spec: &DeltaSpec, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = check_bracket(bracket)?;
    bisect(
        |kd| half_cell_unchecked(kd, spec).trace(),
        lo,
        hi,
        ROOT_TOL_PI * PI * 1e-2,
    )
}

/// Default window for the lowest band's gap, `(0.5π, π)`.
pub const DEFAULT_GAP_WINDOW: (f64, f64) = (0.5 * PI, PI);

/// Edges of the asymmetry gap: `(node of g, node of u')`.
///
/// For `s > 0` the node of `g` is the lower edge.
pub fn delta_gap_edges(spec: &DeltaSpec, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = check_bracket(bracket)?;
    let points = (((hi - lo) / (SCAN_STEP_PI * PI)).ceil() as usize).max(2) + 1;
    let tol = ROOT_TOL_PI * PI;
    let node = |f: &dyn Fn(&WMatrix) -> f64| {
        all_roots(|kd| f(&half_cell_unchecked(kd, spec)), lo, hi, points, tol)
            .into_iter()
            .next()
            .ok_or(Error::NoSignChange { lo, hi })
    };
    let g_node = node(&|w| w.g)?;
    let up_node = node(&|w| w.up)?;
    Ok((g_node, up_node))
}

fn check_bracket((lo, hi): (f64, f64)) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "kd bracket must satisfy 0 < lo < hi (got [{lo}, {hi}])"
        )));
    }
    Ok((lo, hi))
}
