//! Transmission through `N` half-cells: closed forms from the Kard
//! parameters, the direct layer product, envelopes, transparent states and
//! resonances.
//!
//! With `N` half-cells in the order `L R L R ...`:
//!
//! ```text
//! even N:  1/T = 1 + sinh²μ · sin²(Nβ)                    μ = η − α
//! odd N:   1/T = cosh²α · cos²(Nβ) + cosh²η · sin²(Nβ)
//! ```
//!
//! The direct product over the device's layers is always the reference
//! value; the closed forms are checked against it.

use std::f64::consts::PI;

use crate::bands::{bloch_cos_phi, impedance_from_w, kard_at, kard_decompose, KardParams, Zone};
use crate::device::{Device, HalfCellSpec, Ordering};
use crate::roots::{bisect, golden_max};
use crate::tmatrix::{device_transmission, device_w, exterior_velocity, half_cell_w, velocity};
use crate::{Error, Result};

/// Phase residue (rad) below which a maximum matches `Nβ = pπ` or
/// `Nβ = (m+½)π`.
pub const PHASE_TOL: f64 = 1e-4;
/// Grid points per band when locating maxima.
pub const RESONANCE_GRID: usize = 20_000;
/// Grid points per band when bracketing transparent states.
pub const TRANSPARENT_GRID: usize = 4_000;

/// `N` half-cells of one cell type in a given order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biperiodic {
    pub spec: HalfCellSpec,
    pub n_half_cells: usize,
    pub ordering: Ordering,
}

impl Biperiodic {
    pub fn new(spec: HalfCellSpec, n_half_cells: usize, ordering: Ordering) -> Self {
        Biperiodic {
            spec,
            n_half_cells,
            ordering,
        }
    }

    /// Half-cell with the leading well type at `a`.
    pub fn half_cell(&self) -> HalfCellSpec {
        self.spec.oriented(self.ordering)
    }

    pub fn device(&self) -> Device {
        self.spec.build_biperiodic(self.n_half_cells, self.ordering)
    }

    pub fn kard(&self, e: f64) -> Result<KardParams> {
        kard_at(&self.half_cell(), e)
    }

    pub fn is_even(&self) -> bool {
        self.n_half_cells.is_multiple_of(2)
    }
}

/// `n_double` double cells (`N = 2n`).
pub fn transmission_even(kp: &KardParams, n_double: u32) -> Result<f64> {
    kp.require_allowed()?;
    let s = (2.0 * n_double as f64 * kp.beta).sin();
    Ok(1.0 / (1.0 + kp.mu().sinh().powi(2) * s * s))
}

/// `N = 2n + 1` half-cells.
pub fn transmission_odd(kp: &KardParams, n: u32) -> Result<f64> {
    kp.require_allowed()?;
    let (s, c) = ((2 * n + 1) as f64 * kp.beta).sin_cos();
    Ok(1.0 / (kp.alpha.cosh().powi(2) * c * c + kp.eta.cosh().powi(2) * s * s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForbiddenTransmission {
    pub t: f64,
    pub upper_bound: f64,
}

/// Transmission in a forbidden zone for `n_half` half-cells.
///
/// For odd `N` the even-indexed zones are bounded by `1/cosh²α` and the
/// odd-indexed ones by `1/cosh²η̄`. Even `N` has only the trivial bound 1.
pub fn transmission_forbidden(kp: &KardParams, n_half: u32) -> Result<ForbiddenTransmission> {
    kp.require_forbidden()?;
    let k = match kp.zone {
        Zone::Forbidden(k) => k,
        Zone::Allowed(_) => unreachable!(),
    };
    let sh2 = (n_half as f64 * kp.beta).sinh().powi(2);
    let (ch2a, sh2a) = (kp.alpha.cosh().powi(2), kp.alpha.sinh().powi(2));
    let (ch2e, sh2e) = (kp.eta.cosh().powi(2), kp.eta.sinh().powi(2));
    let (inv_t, bound) = if n_half.is_multiple_of(2) {
        (1.0 + kp.mu().cosh().powi(2) * sh2, 1.0)
    } else if k.is_multiple_of(2) {
        (ch2a + (ch2a + sh2e) * sh2, 1.0 / ch2a)
    } else {
        (ch2e + (sh2a + ch2e) * sh2, 1.0 / ch2e)
    };
    Ok(ForbiddenTransmission {
        t: 1.0 / inv_t,
        upper_bound: bound,
    })
}

/// Closed-form transmission for `n_half` half-cells in any classified zone.
pub fn transmission_closed_form(kp: &KardParams, n_half: u32) -> Result<f64> {
    if !kp.zone.is_allowed() {
        return transmission_forbidden(kp, n_half).map(|f| f.t);
    }
    if n_half.is_multiple_of(2) {
        transmission_even(kp, n_half / 2)
    } else {
        transmission_odd(kp, n_half / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|η| > |α|`: `1/cosh²α` is the upper bound.
    EtaDominant,
    /// `|η| < |α|`: the bounds are exchanged.
    AlphaDominant,
    /// `|η| = |α|`: the bounds cross and pinch the transmission.
    Pinched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelopes {
    pub upper: f64,
    pub lower: f64,
    pub regime: Regime,
}

/// `N`-independent bounds `1/cosh²α` and `1/cosh²η` for odd `N`.
pub fn envelopes(kp: &KardParams) -> Result<Envelopes> {
    kp.require_allowed()?;
    let from_alpha = 1.0 / kp.alpha.cosh().powi(2);
    let from_eta = 1.0 / kp.eta.cosh().powi(2);
    let regime = match kp.eta.abs().partial_cmp(&kp.alpha.abs()) {
        Some(std::cmp::Ordering::Greater) => Regime::EtaDominant,
        Some(std::cmp::Ordering::Less) => Regime::AlphaDominant,
        _ => Regime::Pinched,
    };
    Ok(Envelopes {
        upper: from_alpha.max(from_eta),
        lower: from_alpha.min(from_eta),
        regime,
    })
}

/// Bounds for even `N`: minima follow `1/cosh²μ`, maxima reach 1.
pub fn even_envelopes(kp: &KardParams) -> Result<Envelopes> {
    kp.require_allowed()?;
    Ok(Envelopes {
        upper: 1.0,
        lower: 1.0 / kp.mu().cosh().powi(2),
        regime: Regime::EtaDominant,
    })
}

/// `(env_min, env_max)` for `n_half` half-cells in any classified zone.
pub fn bounds_for(kp: &KardParams, n_half: u32) -> Result<(f64, f64)> {
    if kp.zone.is_allowed() {
        let env = if n_half.is_multiple_of(2) {
            even_envelopes(kp)?
        } else {
            envelopes(kp)?
        };
        Ok((env.lower, env.upper))
    } else {
        Ok((0.0, transmission_forbidden(kp, n_half)?.upper_bound))
    }
}

fn interior(band: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "band must satisfy 0 < lo < hi (got [{lo}, {hi}])"
        )));
    }
    let inset = 1e-9 * (hi - lo).max(1.0);
    Ok((lo + inset, hi - inset))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn check_allowed(spec: &HalfCellSpec, lo: f64, hi: f64) -> Result<()> {
    let all_allowed =
        grid(lo, hi, TRANSPARENT_GRID).all(|e| bloch_cos_phi(&half_cell_w(spec, e)).allowed());
    if all_allowed {
        Ok(())
    } else {
        Err(Error::StraddlesEdge { lo, hi })
    }
}

/// Roots of `f` on a grid over `[lo, hi]`, refined to machine precision and
/// kept only where `f` changes sign continuously (not across a pole).
fn continuous_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, scale: f64) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = grid(lo, hi, n).map(|e| (e, f(e))).collect();
    pts.windows(2)
        .filter(|w| w[0].1.is_finite() && w[1].1.is_finite() && w[0].1.signum() != w[1].1.signum())
        .filter_map(|w| bisect(&f, w[0].0, w[1].0, 0.0).ok())
        .filter(|&r| f(r).abs() <= 1e-6 * scale)
        .collect()
}

/// Energy where `μ = ln(ν/Z)` vanishes inside an allowed band.
///
/// `spec` must already be oriented (leading well at `a`). The band is the
/// open interval between two band edges.
pub fn find_transparent(spec: &HalfCellSpec, band: (f64, f64)) -> Result<Option<f64>> {
    let (lo, hi) = interior(band)?;
    check_allowed(spec, lo, hi)?;
    let f = |e: f64| {
        let nu = velocity(e, spec.well_mass).unwrap_or(0.0);
        let z2 = crate::bands::z_squared(&half_cell_w(spec, e)).z2;
        nu * nu - z2
    };
    let scale = velocity(hi, spec.well_mass).unwrap_or(1.0).powi(2);
    Ok(continuous_roots(f, lo, hi, TRANSPARENT_GRID, scale)
        .into_iter()
        .next())
}

/// Transparent energy seen by a whole even-`N` device: where the device's
/// own velocity parameter `Z_N² = −W21/W12` equals `ν²`.
pub fn transparent_energy_of_device(device: &Device, band: (f64, f64)) -> Result<Option<f64>> {
    let (lo, hi) = interior(band)?;
    let f = |e: f64| {
        let nu = exterior_velocity(device, e).unwrap_or(0.0);
        let w = device_w(device, e);
        (nu * nu * w.u + w.gp) / w.u
    };
    let scale = exterior_velocity(device, hi).unwrap_or(1.0).powi(2);
    Ok(continuous_roots(f, lo, hi, TRANSPARENT_GRID, scale)
        .into_iter()
        .next())
}

/// Energy in an allowed band where the odd-`N` bounds cross, `|η| = |α|`.
pub fn find_bound_crossing(spec: &HalfCellSpec, band: (f64, f64)) -> Result<Option<f64>> {
    let (lo, hi) = interior(band)?;
    check_allowed(spec, lo, hi)?;
    let f = |e: f64| match kard_at(spec, e) {
        Ok(kp) => kp.eta.abs() - kp.alpha.abs(),
        Err(_) => f64::NAN,
    };
    Ok(continuous_roots(f, lo, hi, TRANSPARENT_GRID, 1.0)
        .into_iter()
        .next())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    /// `Nβ = pπ`.
    IntegerPi(i64),
    /// `Nβ = (m + ½)π`.
    HalfInteger(i64),
    /// The `μ = 0` state, which sits at no particular phase.
    Transparent,
    Unmatched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub energy: f64,
    pub transmission: f64,
    /// `Nβ` at the maximum.
    pub phase: f64,
    /// Distance of `Nβ` from the nearest integer multiple of π.
    pub integer_residue: f64,
    /// Distance of `Nβ` from the nearest half-integer multiple of π.
    pub half_integer_residue: f64,
    pub kind: ResonanceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub n_half_cells: usize,
    pub band: (f64, f64),
    pub resonances: Vec<Resonance>,
    /// `μ = 0` for even `N`; the bound crossing `|η| = |α|` for odd `N`.
    pub transparent_energy: Option<f64>,
}

impl ResonanceReport {
    pub fn count(&self, pred: impl Fn(&ResonanceKind) -> bool) -> usize {
        self.resonances.iter().filter(|r| pred(&r.kind)).count()
    }
}

/// Local maxima of `T_N` in an allowed band, refined by golden section and
/// classified by their phase `Nβ`.
pub fn find_resonances(bip: &Biperiodic, band: (f64, f64)) -> Result<ResonanceReport> {
    if bip.n_half_cells < 2 {
        return Err(Error::InvalidArgument(
            "need at least two half-cells".into(),
        ));
    }
    let spec = bip.half_cell();
    let (lo, hi) = interior(band)?;
    check_allowed(&spec, lo, hi)?;
    let device = bip.device();
    let t = |e: f64| device_transmission(&device, e).unwrap_or(0.0);
    let energies: Vec<f64> = grid(lo, hi, RESONANCE_GRID).collect();
    let ts: Vec<f64> = energies.iter().map(|&e| t(e)).collect();
    let transparent_energy = if bip.is_even() {
        find_transparent(&spec, band)?
    } else {
        find_bound_crossing(&spec, band)?
    };
    let step = (hi - lo) / (RESONANCE_GRID - 1) as f64;
    let n = bip.n_half_cells as f64;
    let mut resonances = Vec::new();
    for i in 1..energies.len() - 1 {
        if !(ts[i] > ts[i - 1] && ts[i] >= ts[i + 1]) {
            continue;
        }
        let energy = golden_max(&t, energies[i - 1], energies[i + 1], 1e-12 * hi);
        let kp = kard_at(&spec, energy)?;
        let phase = n * kp.beta;
        let p = (phase / PI).round();
        let m = (phase / PI - 0.5).round();
        let integer_residue = (phase - p * PI).abs();
        let half_integer_residue = (phase - (m + 0.5) * PI).abs();
        let near_transparent =
            transparent_energy.is_some_and(|et| (energy - et).abs() <= 2.0 * step);
        let kind = if integer_residue < PHASE_TOL && integer_residue <= half_integer_residue {
            ResonanceKind::IntegerPi(p as i64)
        } else if half_integer_residue < PHASE_TOL {
            ResonanceKind::HalfInteger(m as i64)
        } else if near_transparent {
            ResonanceKind::Transparent
        } else {
            ResonanceKind::Unmatched
        };
        resonances.push(Resonance {
            energy,
            transmission: t(energy),
            phase,
            integer_residue,
            half_integer_residue,
            kind,
        });
    }
    Ok(ResonanceReport {
        n_half_cells: bip.n_half_cells,
        band,
        resonances,
        transparent_energy,
    })
}

/// One row of an energy sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub energy: f64,
    /// `None` exactly on a band edge or for devices without a half-cell.
    pub zone: Option<Zone>,
    pub cos_phi_h: f64,
    pub cos_phi: f64,
    pub alpha: f64,
    pub eta: f64,
    /// `μ` in allowed zones, `ξ` in forbidden ones; ±∞ at band edges.
    pub mu_or_xi: f64,
    /// Direct layer-product transmission.
    pub t_n: f64,
    pub env_min: f64,
    pub env_max: f64,
    pub t_closed: f64,
    /// `|t_closed − t_n|`.
    pub discrepancy: f64,
}

impl SweepRecord {
    pub const HEADER: [&'static str; 12] = [
        "energy",
        "zone",
        "cos_phi_h",
        "cos_phi",
        "alpha",
        "eta",
        "mu_or_xi",
        "T_N",
        "env_min",
        "env_max",
        "T_closed",
        "discrepancy",
    ];

    pub fn zone_label(&self) -> String {
        self.zone
            .map_or_else(|| "unknown".to_string(), |z| z.to_string())
    }
}

/// One sweep row for a biperiodic device; `None` below the exterior
/// propagation threshold.
pub fn sweep_point(bip: &Biperiodic, device: &Device, e: f64) -> Result<Option<SweepRecord>> {
    let Some(nu) = exterior_velocity(device, e) else {
        return Ok(None);
    };
    let t_n = device_transmission(device, e)?;
    let w_r = half_cell_w(&bip.half_cell(), e);
    let phases = bloch_cos_phi(&w_r);
    let n = bip.n_half_cells as u32;
    let rec = match kard_decompose(&w_r, nu) {
        Ok(kp) => {
            let t_closed = transmission_closed_form(&kp, n)?;
            let (env_min, env_max) = bounds_for(&kp, n)?;
            SweepRecord {
                energy: e,
                zone: Some(kp.zone),
                cos_phi_h: phases.cos_phi_h,
                cos_phi: phases.cos_phi,
                alpha: kp.alpha,
                eta: kp.eta,
                mu_or_xi: kp.mu(),
                t_n,
                env_min,
                env_max,
                t_closed,
                discrepancy: (t_closed - t_n).abs(),
            }
        }
        Err(Error::Unclassified { .. }) => SweepRecord {
            energy: e,
            zone: None,
            cos_phi_h: phases.cos_phi_h,
            cos_phi: phases.cos_phi,
            alpha: f64::NAN,
            eta: f64::NAN,
            mu_or_xi: impedance_from_w(&w_r, nu),
            t_n,
            env_min: f64::NAN,
            env_max: f64::NAN,
            t_closed: f64::NAN,
            discrepancy: f64::NAN,
        },
        Err(e) => return Err(e),
    };
    Ok(Some(rec))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "energy grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Sweeps a biperiodic device over an increasing energy grid.
pub fn sweep(bip: &Biperiodic, grid: &[f64]) -> Result<Vec<SweepRecord>> {
    check_grid(grid)?;
    let device = bip.device();
    let mut out = Vec::with_capacity(grid.len());
    for &e in grid {
        if let Some(r) = sweep_point(bip, &device, e)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Sweep row for an arbitrary layered device: direct product only.
pub fn sweep_device_point(device: &Device, e: f64) -> Result<Option<SweepRecord>> {
    if exterior_velocity(device, e).is_none() {
        return Ok(None);
    }
    let t_n = device_transmission(device, e)?;
    let phases = bloch_cos_phi(&device_w(device, e));
    Ok(Some(SweepRecord {
        energy: e,
        zone: None,
        cos_phi_h: phases.cos_phi_h,
        cos_phi: phases.cos_phi,
        alpha: f64::NAN,
        eta: f64::NAN,
        mu_or_xi: f64::NAN,
        t_n,
        env_min: f64::NAN,
        env_max: f64::NAN,
        t_closed: f64::NAN,
        discrepancy: f64::NAN,
    }))
}

pub fn sweep_device(device: &Device, grid: &[f64]) -> Result<Vec<SweepRecord>> {
    check_grid(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for &e in grid {
        if let Some(r) = sweep_device_point(device, e)? {
            out.push(r);
        }
    }
    Ok(out)
}
