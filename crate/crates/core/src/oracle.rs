//! Brute-force slice integrator used to check the analytic layer matrices.
//!
//! Each layer interior is cut into slices no wider than `h`, and every
//! interface is covered by one straddling slice of width `h` that sits a
//! fraction `θ` in the left material. A slice matrix is the exact exponential
//! of the slice-averaged generator, so it is unimodular to rounding. Interior
//! slices are therefore exact and all error comes from the straddles,
//! `O(h²)` with a fixed coefficient, which makes Richardson extrapolation
//! well defined.
//!
//! Nothing here calls into [`crate::tmatrix`]; the slice exponential is
//! written out independently.

use crate::device::Device;
use crate::tmatrix::WMatrix;
use crate::{Error, Result, HBAR2_OVER_2M};

/// Derivative carried across interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `ψ'/m*` continuous: the form used by the analytic engine.
    #[default]
    ScaledDerivative,
    /// `ψ'` continuous; disagrees whenever the mass jumps.
    PlainDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Target slice width in nm.
    pub slice_width: f64,
    /// Combine `h` and `h/2` as `(4W(h/2) − W(h))/3`.
    pub richardson: bool,
    /// Fraction of each straddling slice lying left of its interface.
    pub grid_offset: f64,
    pub convention: Convention,
}

impl OracleConfig {
    pub fn new(slice_width: f64, richardson: bool) -> Result<Self> {
        let cfg = OracleConfig {
            slice_width,
            richardson,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slice_width > 0.0 && self.slice_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "slice width must be > 0 (got {})",
                self.slice_width
            )));
        }
        if !(self.grid_offset > 0.0 && self.grid_offset < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grid offset must lie in (0, 1) (got {})",
                self.grid_offset
            )));
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            slice_width: 1e-3,
            richardson: true,
            grid_offset: 0.5,
            convention: Convention::ScaledDerivative,
        }
    }
}

/// `exp(h·[[0, a], [b, 0]])`.
fn slice_exp(a: f64, b: f64, h: f64) -> [[f64; 2]; 2] {
    let ab = a * b;
    let x = ab.abs().sqrt() * h;
    // c = cos/cosh(x), s = sin/sinh(x)/x
    let (c, s) = if x.abs() < 1e-6 {
        let x2 = if ab < 0.0 { -x * x } else { x * x };
        (1.0 + x2 / 2.0, 1.0 + x2 / 6.0)
    } else if ab < 0.0 {
        (x.cos(), x.sin() / x)
    } else {
        (x.cosh(), x.sinh() / x)
    };
    [[c, a * h * s], [b * h * s, c]]
}

fn mul(p: [[f64; 2]; 2], q: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            p[0][0] * q[0][0] + p[0][1] * q[1][0],
            p[0][0] * q[0][1] + p[0][1] * q[1][1],
        ],
        [
            p[1][0] * q[0][0] + p[1][1] * q[1][0],
            p[1][0] * q[0][1] + p[1][1] * q[1][1],
        ],
    ]
}

/// Generator coefficients `(a, b)` of one layer under `conv`.
fn generator(potential: f64, mass: f64, e: f64, conv: Convention) -> (f64, f64) {
    match conv {
        Convention::ScaledDerivative => (mass, -(e - potential) / HBAR2_OVER_2M),
        Convention::PlainDerivative => (1.0, -(e - potential) * mass / HBAR2_OVER_2M),
    }
}

fn integrate_raw(device: &Device, e: f64, h: f64, theta: f64, conv: Convention) -> WMatrix {
    let layers = &device.layers;
    let coeffs: Vec<(f64, f64)> = layers
        .iter()
        .map(|l| generator(l.potential, l.mass, e, conv))
        .collect();
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    let last = layers.len() - 1;
    for (i, layer) in layers.iter().enumerate() {
        let left = if i > 0 { (1.0 - theta) * h } else { 0.0 };
        let right = if i < last { theta * h } else { 0.0 };
        let inner = layer.width - left - right;
        if inner > 0.0 {
            let n = (inner / h).ceil().max(1.0);
            let step = slice_exp(coeffs[i].0, coeffs[i].1, inner / n);
            for _ in 0..n as usize {
                acc = mul(step, acc);
            }
        }
        if i < last {
            let (a0, b0) = coeffs[i];
            let (a1, b1) = coeffs[i + 1];
            let a = theta * a0 + (1.0 - theta) * a1;
            let b = theta * b0 + (1.0 - theta) * b1;
            acc = mul(slice_exp(a, b, h), acc);
        }
    }
    if conv == Convention::PlainDerivative {
        // back to (ψ, ψ'/m*) with the end-layer masses
        let (m_in, m_out) = (layers[0].mass, layers[last].mass);
        acc[0][1] *= m_in;
        acc[1][0] /= m_out;
        acc[1][1] *= m_in / m_out;
    }
    WMatrix::new(acc[0][0], acc[0][1], acc[1][0], acc[1][1])
}

/// `W` of `device` at energy `e` by slicing.
///
/// The slice width is capped at half the thinnest layer so that every
/// straddle fits.
pub fn integrate_w(device: &Device, e: f64, cfg: &OracleConfig) -> WMatrix {
    let min_width = device
        .layers
        .iter()
        .map(|l| l.width)
        .fold(f64::INFINITY, f64::min);
    let h = cfg.slice_width.min(0.5 * min_width);
    let theta = cfg.grid_offset;
    let coarse = integrate_raw(device, e, h, theta, cfg.convention);
    if !cfg.richardson {
        return coarse;
    }
    let fine = integrate_raw(device, e, 0.5 * h, theta, cfg.convention);
    fine.scale(4.0).add(&coarse.scale(-1.0)).scale(1.0 / 3.0)
}

/// Square barrier of area `2Ω` and width `width`, with the free propagation
/// over the same width removed on both sides.
///
/// Dimensionless: unit length `d`, unit mass, wavenumber `kd`. Tends to
/// `[[1, 0], [2Ω, 1]]` linearly in `width`.
pub fn delta_limit_w(omega: f64, width: f64, kd: f64) -> Result<WMatrix> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "width must be > 0 (got {width})"
        )));
    }
    let k2 = kd * kd;
    let height = 2.0 * omega / width;
    let back = slice_exp(1.0, -k2, -0.5 * width);
    let barrier = slice_exp(1.0, height - k2, width);
    let m = mul(back, mul(barrier, back));
    Ok(WMatrix::new(m[0][0], m[0][1], m[1][0], m[1][1]))
}

/// Free segment of length `x` in the same dimensionless units.
pub fn delta_free_w(x: f64, kd: f64) -> WMatrix {
    let m = slice_exp(1.0, -kd * kd, x);
    WMatrix::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

/// Entrywise maximum absolute difference.
pub fn compare(a: &WMatrix, b: &WMatrix) -> f64 {
    a.max_abs_diff(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub slice_width: f64,
    pub raw_diff: f64,
    pub richardson_diff: f64,
    /// `raw_diff` of the previous (coarser) row over this one.
    pub ratio: Option<f64>,
}

/// Oracle against `analytic` at each slice width, coarsest first.
pub fn convergence_table(
    device: &Device,
    e: f64,
    analytic: &WMatrix,
    widths: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(widths.len());
    for &h in widths {
        let raw_cfg = OracleConfig::new(h, false)?;
        let raw_diff = compare(&integrate_w(device, e, &raw_cfg), analytic);
        let rich_cfg = OracleConfig::new(h, true)?;
        let richardson_diff = compare(&integrate_w(device, e, &rich_cfg), analytic);
        let ratio = rows.last().map(|r| r.raw_diff / raw_diff);
        rows.push(ConvergenceRow {
            slice_width: h,
            raw_diff,
            richardson_diff,
            ratio,
        });
    }
    Ok(rows)
}
