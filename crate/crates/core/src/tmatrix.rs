//! Real `W` transfer matrices and complex `M` matrices.
//!
//! `W` acts on the spinor `(ψ, ψ'/m*)`, which is continuous across every
//! interface for a position-dependent mass, and carries it from the left edge
//! of a region to the right edge. Velocities are `ν = q/m*` in nm⁻¹ (units of
//! ℏ/(mₑ·nm)); the constant ℏ/mₑ cancels from every observable.
//!
//! `M` acts on unit-flux plane-wave amplitudes and runs right to left:
//! `(a_L, b_L) = M (a_R, b_R)`, so `1/t = M11`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::device::{ConstantMass, Device, HalfCellSpec, Layer, MassModel};
use crate::{Error, Result, HBAR2_OVER_2M};

/// Below this |E − V| (meV) a layer uses the q → 0 limit.
pub const FLAT_BAND: f64 = 1e-9;

/// Real 2×2 transfer matrix `[[g, u], [g', u']]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WMatrix {
    pub g: f64,
    pub u: f64,
    pub gp: f64,
    pub up: f64,
}

impl WMatrix {
    pub const IDENTITY: WMatrix = WMatrix {
        g: 1.0,
        u: 0.0,
        gp: 0.0,
        up: 1.0,
    };

    pub fn new(w11: f64, w12: f64, w21: f64, w22: f64) -> Self {
        WMatrix {
            g: w11,
            u: w12,
            gp: w21,
            up: w22,
        }
    }

    pub fn det(&self) -> f64 {
        self.g * self.up - self.u * self.gp
    }

    pub fn trace(&self) -> f64 {
        self.g + self.up
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * self.trace()
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.g, self.u, self.gp, self.up]
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> WMatrix {
        WMatrix::new(self.up, -self.u, -self.gp, self.g)
    }

    pub fn scale(&self, s: f64) -> WMatrix {
        WMatrix::new(s * self.g, s * self.u, s * self.gp, s * self.up)
    }

    pub fn add(&self, o: &WMatrix) -> WMatrix {
        WMatrix::new(self.g + o.g, self.u + o.u, self.gp + o.gp, self.up + o.up)
    }

    pub fn max_abs_diff(&self, o: &WMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(o.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Mul for WMatrix {
    type Output = WMatrix;

    fn mul(self, o: WMatrix) -> WMatrix {
        WMatrix {
            g: self.g * o.g + self.u * o.gp,
            u: self.g * o.u + self.u * o.up,
            gp: self.gp * o.g + self.up * o.gp,
            up: self.gp * o.u + self.up * o.up,
        }
    }
}

/// Constant-coefficient region with squared wavenumber `q2` (negative when
/// evanescent), width `w` and the mass dividing the derivative.
pub fn region_w(q2: f64, width: f64, mass: f64) -> WMatrix {
    if width == 0.0 {
        return WMatrix::IDENTITY;
    }
    if q2 > 0.0 {
        let q = q2.sqrt();
        let v = q / mass;
        let (s, c) = (q * width).sin_cos();
        WMatrix::new(c, s / v, -v * s, c)
    } else if q2 < 0.0 {
        let k = (-q2).sqrt();
        let v = k / mass;
        let (s, c) = ((k * width).sinh(), (k * width).cosh());
        WMatrix::new(c, s / v, v * s, c)
    } else {
        WMatrix::new(1.0, mass * width, 0.0, 1.0)
    }
}

/// `W` of a single layer at energy `e` (meV).
pub fn layer_w(layer: &Layer, e: f64) -> WMatrix {
    layer_w_with_mass(layer, layer.mass, e)
}

fn layer_w_with_mass(layer: &Layer, mass: f64, e: f64) -> WMatrix {
    let de = e - layer.potential;
    if de.abs() < FLAT_BAND {
        return region_w(0.0, layer.width, mass);
    }
    region_w(de * mass / HBAR2_OVER_2M, layer.width, mass)
}

/// Product of matrices listed left to right in space: `W_n ⋯ W_2 W_1`.
pub fn compose(ws: &[WMatrix]) -> Result<WMatrix> {
    let (first, rest) = ws.split_first().ok_or(Error::EmptyProduct)?;
    Ok(rest.iter().fold(*first, |acc, w| *w * acc))
}

fn compose_layers<'a, I: IntoIterator<Item = &'a Layer>>(layers: I, e: f64) -> WMatrix {
    layers
        .into_iter()
        .fold(WMatrix::IDENTITY, |acc, l| layer_w(l, e) * acc)
}

/// `W_R` of the half-cell: segment `a`, then the barrier, then `c`.
pub fn half_cell_w(spec: &HalfCellSpec, e: f64) -> WMatrix {
    compose_layers(spec.right_layers().iter(), e)
}

/// `W_L` from `W_R`: the mirror-image half-cell swaps `g` and `u'`.
pub fn reverse_half_cell(w: &WMatrix) -> WMatrix {
    WMatrix::new(w.up, w.u, w.gp, w.g)
}

/// Symmetric double cell `W = W_R W_L`, written out explicitly.
pub fn double_cell_w(w_r: &WMatrix) -> WMatrix {
    let WMatrix { g, u, gp, up } = *w_r;
    let diag = g * up + gp * u;
    WMatrix::new(diag, 2.0 * u * g, 2.0 * up * gp, diag)
}

/// `W^n` by binary powering.
pub fn w_power_direct(w: &WMatrix, mut n: u64) -> WMatrix {
    let mut base = *w;
    let mut acc = WMatrix::IDENTITY;
    while n > 0 {
        if n & 1 == 1 {
            acc = base * acc;
        }
        base = base * base;
        n >>= 1;
    }
    acc
}

/// Distance from a band edge below which the Chebyshev form is not used.
pub const CHEB_EDGE_GUARD: f64 = 1e-12;

/// `W^n = sin(nφ)/sin φ · W − sin((n−1)φ)/sin φ · I` inside a band;
/// binary powering elsewhere.
pub fn w_power_cheb(w: &WMatrix, n: u64) -> WMatrix {
    let x = w.half_trace();
    if n == 0 {
        return WMatrix::IDENTITY;
    }
    if x.abs() > 1.0 - CHEB_EDGE_GUARD {
        return w_power_direct(w, n);
    }
    let phi = x.acos();
    let s = phi.sin();
    let a = (n as f64 * phi).sin() / s;
    let b = ((n as f64 - 1.0) * phi).sin() / s;
    WMatrix::new(a * w.g - b, a * w.u, a * w.gp, a * w.up - b)
}

/// Complex 2×2 matrix on flux-normalised amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    /// Exterior velocity used to build the matrix.
    pub nu: f64,
}

impl MMatrix {
    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `|M11|² − |M21|²`, which is 1 for a real energy above the exterior.
    pub fn flux(&self) -> f64 {
        self.m11.norm_sqr() - self.m21.norm_sqr()
    }
}

impl Mul for MMatrix {
    type Output = MMatrix;

    fn mul(self, o: MMatrix) -> MMatrix {
        MMatrix {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
            nu: self.nu,
        }
    }
}

/// `M = L⁻¹ W⁻¹ L` for equal exterior velocities on both sides.
pub fn w_to_m(w: &WMatrix, nu: f64) -> Result<MMatrix> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::NonPropagating(nu));
    }
    let WMatrix {
        g: a,
        u: b,
        gp: c,
        up: d,
    } = *w;
    let sum = 0.5 * (a + d);
    let diff = 0.5 * (d - a);
    let im_diag = 0.5 * (nu * b - c / nu);
    let im_off = 0.5 * (nu * b + c / nu);
    Ok(MMatrix {
        m11: Complex64::new(sum, -im_diag),
        m12: Complex64::new(diff, im_off),
        m21: Complex64::new(diff, -im_off),
        m22: Complex64::new(sum, im_diag),
        nu,
    })
}

/// `|t|² = 1/|M11|²`.
pub fn transmission_from_m(m: &MMatrix) -> Result<f64> {
    let n = m.m11.norm_sqr();
    if !(n > 0.0) {
        return Err(Error::ZeroM11);
    }
    Ok(1.0 / n)
}

/// Exterior velocity `ν = k/m*` of a device, if the exterior propagates.
pub fn exterior_velocity(device: &Device, e: f64) -> Option<f64> {
    velocity(e - device.exterior_potential, device.exterior_mass)
}

/// `q/m*` for kinetic energy `de` (meV) and mass `m`.
pub fn velocity(de: f64, mass: f64) -> Option<f64> {
    if de > 0.0 {
        Some((de * mass / HBAR2_OVER_2M).sqrt() / mass)
    } else {
        None
    }
}

/// Full-device `W` with constant per-layer masses.
pub fn device_w(device: &Device, e: f64) -> WMatrix {
    compose_layers(device.layers.iter(), e)
}

/// Full-device `W` with masses supplied by `model`.
pub fn device_w_with<M: MassModel>(device: &Device, e: f64, model: &M) -> WMatrix {
    device.layers.iter().fold(WMatrix::IDENTITY, |acc, l| {
        layer_w_with_mass(l, model.mass(l, e), e) * acc
    })
}

pub fn device_m(device: &Device, e: f64) -> Result<MMatrix> {
    let nu = exterior_velocity(device, e).ok_or(Error::NonPropagating(0.0))?;
    w_to_m(&device_w_with(device, e, &ConstantMass), nu)
}

/// Transmission probability from the direct layer-by-layer product.
pub fn device_transmission(device: &Device, e: f64) -> Result<f64> {
    transmission_from_m(&device_m(device, e)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Ordering;
    use std::f64::consts::FRAC_PI_2;

    const TOL: f64 = 1e-12;

    #[test]
    fn zero_width_is_identity() {
        let l = Layer::new(0.0, 100.0, 0.08);
        assert_eq!(layer_w(&l, 50.0), WMatrix::IDENTITY);
    }

    #[test]
    fn well_bottom_limit() {
        let l = Layer::new(2.5, 0.0, 0.074);
        let w = layer_w(&l, 0.0);
        assert_eq!(w, WMatrix::new(1.0, 0.074 * 2.5, 0.0, 1.0));
        // continuity with the propagating branch just above
        let w2 = layer_w(&l, 1e-7);
        assert!(w.max_abs_diff(&w2) < 1e-8);
    }

    #[test]
    fn quarter_wave_layer() {
        let m = 0.074;
        let width = 3.0;
        let q = FRAC_PI_2 / width;
        let e = q * q * HBAR2_OVER_2M / m;
        let w = layer_w(&Layer::new(width, 0.0, m), e);
        let v = q / m;
        assert!(w.g.abs() < TOL && w.up.abs() < TOL);
        assert!((w.u - 1.0 / v).abs() < TOL);
        assert!((w.gp + v).abs() < TOL);
        assert!((w.det() - 1.0).abs() < TOL);
    }

    #[test]
    fn compose_identity_and_semigroup() {
        let l = Layer::new(3.8, 288.09, 0.08);
        let w = layer_w(&l, 100.0);
        assert_eq!(compose(&[WMatrix::IDENTITY, w]).unwrap(), w);
        let half = Layer::new(1.9, 288.09, 0.08);
        let h = layer_w(&half, 100.0);
        assert!(compose(&[h, h]).unwrap().max_abs_diff(&w) < TOL);
        assert_eq!(compose(&[]), Err(Error::EmptyProduct));
    }

    #[test]
    fn compose_is_left_to_right() {
        let a = WMatrix::new(1.0, 2.0, 0.0, 1.0);
        let b = WMatrix::new(1.0, 0.0, 3.0, 1.0);
        assert_eq!(compose(&[a, b]).unwrap(), b * a);
    }

    #[test]
    fn symmetric_half_cell_has_equal_diagonal() {
        let spec = HalfCellSpec::with_wells(4.05, 4.05);
        for e in [20.0, 95.0, 150.0, 300.0] {
            let w = half_cell_w(&spec, e);
            assert!((w.g - w.up).abs() < 1e-12 * w.g.abs().max(1.0));
        }
    }

    #[test]
    fn zero_barrier_is_free_propagation() {
        let spec = HalfCellSpec {
            barrier_height: 0.0,
            barrier_mass: 0.074,
            ..HalfCellSpec::gaas_reference()
        };
        let e = 80.0;
        let free = layer_w(&Layer::new(spec.width(), 0.0, 0.074), e);
        assert!(half_cell_w(&spec, e).max_abs_diff(&free) < 1e-12);
    }

    #[test]
    fn reference_half_cell_is_unimodular() {
        let w = half_cell_w(&HalfCellSpec::gaas_reference(), 95.0);
        assert!((w.det() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reverse_half_cell_matches_mirrored_layers() {
        let spec = HalfCellSpec::gaas_reference();
        for e in [30.0, 95.0, 104.0, 250.0] {
            let w_r = half_cell_w(&spec, e);
            let w_l = compose_layers(spec.left_layers().iter(), e);
            assert!(reverse_half_cell(&w_r).max_abs_diff(&w_l) < 1e-12);
            assert_eq!(reverse_half_cell(&reverse_half_cell(&w_r)), w_r);
        }
    }

    #[test]
    fn double_cell_structure() {
        assert_eq!(double_cell_w(&WMatrix::IDENTITY), WMatrix::IDENTITY);
        let spec = HalfCellSpec::gaas_reference();
        let w_r = half_cell_w(&spec, 95.0);
        let w = double_cell_w(&w_r);
        assert_eq!(w.u, 2.0 * w_r.u * w_r.g);
        assert_eq!(w.gp, 2.0 * w_r.up * w_r.gp);
        let direct = w_r * reverse_half_cell(&w_r);
        assert!(w.max_abs_diff(&direct) < 1e-12);
        assert!((w.det() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_low_powers() {
        let w = half_cell_w(&HalfCellSpec::gaas_reference(), 95.0);
        assert_eq!(w_power_cheb(&w, 0), WMatrix::IDENTITY);
        assert!(w_power_cheb(&w, 1).max_abs_diff(&w) < 1e-12);
        let two = w.scale(w.trace()).add(&WMatrix::IDENTITY.scale(-1.0));
        assert!(w_power_cheb(&w, 2).max_abs_diff(&two) < 1e-12);
    }

    #[test]
    fn m_of_identity_and_free_layer() {
        let m = w_to_m(&WMatrix::IDENTITY, 3.0).unwrap();
        assert_eq!(m.m11, Complex64::new(1.0, 0.0));
        assert_eq!(m.m21, Complex64::new(0.0, 0.0));
        let e = 60.0;
        let nu = velocity(e, 0.074).unwrap();
        let w = layer_w(&Layer::new(17.0, 0.0, 0.074), e);
        let m = w_to_m(&w, nu).unwrap();
        assert!((m.m11.norm() - 1.0).abs() < 1e-12);
        assert!(m.m21.norm() < 1e-12);
        assert!((transmission_from_m(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_rejects_evanescent_exterior() {
        assert_eq!(
            w_to_m(&WMatrix::IDENTITY, 0.0),
            Err(Error::NonPropagating(0.0))
        );
        assert!(w_to_m(&WMatrix::IDENTITY, -1.0).is_err());
    }

    #[test]
    fn m_of_double_cell_matches_closed_form() {
        let e = 95.0;
        let w_r = half_cell_w(&HalfCellSpec::gaas_reference(), e);
        let nu = velocity(e, 0.074).unwrap();
        let m = w_to_m(&double_cell_w(&w_r), nu).unwrap();
        let WMatrix { g, u, gp, up } = w_r;
        let cos_phi = g * up + u * gp;
        assert!((m.m11.re - cos_phi).abs() < 1e-12);
        assert!((m.m11.im + (nu * u * g - up * gp / nu)).abs() < 1e-12);
        assert!((m.m21.im + (nu * u * g + up * gp / nu)).abs() < 1e-12);
        assert!((m.flux() - 1.0).abs() < 1e-10);
        assert!((m.det() - 1.0).norm() < 1e-10);
        assert_eq!(m.m22, m.m11.conj());
        assert_eq!(m.m12, m.m21.conj());
    }

    #[test]
    fn cosh_alpha_transmission() {
        let alpha: f64 = 0.7;
        let m = MMatrix {
            m11: Complex64::new(alpha.cosh(), 0.0),
            m12: Complex64::new(alpha.sinh(), 0.0),
            m21: Complex64::new(alpha.sinh(), 0.0),
            m22: Complex64::new(alpha.cosh(), 0.0),
            nu: 1.0,
        };
        let t = transmission_from_m(&m).unwrap();
        assert!((t - 1.0 / alpha.cosh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn m_composes_left_to_right() {
        let spec = HalfCellSpec::gaas_reference();
        let d = spec.build_biperiodic(4, Ordering::WideFirst);
        let e = 97.0;
        let nu = exterior_velocity(&d, e).unwrap();
        let per_layer = d
            .layers
            .iter()
            .map(|l| w_to_m(&layer_w(l, e), nu).unwrap())
            .reduce(|a, b| a * b)
            .unwrap();
        let whole = device_m(&d, e).unwrap();
        assert!((per_layer.m11 - whole.m11).norm() < 1e-10);
        assert!((per_layer.m21 - whole.m21).norm() < 1e-10);
    }
}
