//! Band structure from the half-cell matrix `W_R = [[g, u], [g', u']]`.
//!
//! The double cell `W_R W_L` has `cos φ = g u' + u g'`. With `det W_R = 1`
//! this splits into `p = g u'` and `q = −u g'` with `p + q = 1`: the energy is
//! in an allowed band when both are non-negative. Band edges are the nodes of
//! the four entries; nodes of `g` and `u'` give `cos φ = −1`, nodes of `u` and
//! `g'` give `cos φ = +1`.
//!
//! In allowed zones the half-cell is written in Kard form
//!
//! ```text
//! g  = e^{-α} cos β     u  = sin β / z
//! g' = -z sin β         u' = e^{α} cos β
//! ```
//!
//! and in forbidden zones with `β → β̄`, `z → z̄` and the cosh/sinh placement
//! dictated by the sign pattern of the four entries.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::device::HalfCellSpec;
use crate::roots::bisect;
use crate::tmatrix::{half_cell_w, velocity, WMatrix};
use crate::{Error, Result};

/// `g u'` or `−u g'` below this magnitude marks a band edge, not a zone.
pub const EDGE_DEAD_BAND: f64 = 1e-12;
/// Relative size below which an entry counts as a node for [`LogDerivs`].
pub const NODE_TOL: f64 = 1e-13;
/// Band-edge root tolerance in meV.
pub const EDGE_TOL_MEV: f64 = 1e-9;

/// `γ = g'/g` and `λ = u'/u`, with flags where a denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivs {
    pub gamma: f64,
    pub lambda: f64,
    pub g_node: bool,
    pub u_node: bool,
}

impl LogDerivs {
    /// `tan²(φ/2) = −γ/λ`, positive exactly in allowed bands.
    pub fn tan2_half_phi(&self) -> f64 {
        -self.gamma / self.lambda
    }
}

pub fn log_derivatives(w: &WMatrix) -> LogDerivs {
    let g_node = w.g.abs() < NODE_TOL * w.up.abs().max(1.0);
    // u carries units of 1/velocity, so it is judged against g' instead.
    let u_node = (w.u * w.gp).abs() < NODE_TOL && w.u.abs() <= w.gp.abs();
    LogDerivs {
        gamma: w.gp / w.g,
        lambda: w.up / w.u,
        g_node,
        u_node,
    }
}

/// Half-cell `cos φ_h` and double-cell `cos φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPhases {
    pub cos_phi_h: f64,
    pub cos_phi: f64,
}

impl BlochPhases {
    pub fn allowed(&self) -> bool {
        self.cos_phi.abs() <= 1.0
    }
}

pub fn bloch_cos_phi(w: &WMatrix) -> BlochPhases {
    BlochPhases {
        cos_phi_h: w.half_trace(),
        cos_phi: w.g * w.up + w.u * w.gp,
    }
}

/// Squared double-cell velocity `Z² = −γλ` and its value `Z̃²` for the
/// opposite asymmetry (`g ↔ u'`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZSquared {
    pub z2: f64,
    pub z2_tilde: f64,
}

pub fn z_squared(w: &WMatrix) -> ZSquared {
    ZSquared {
        z2: -(w.gp * w.up) / (w.g * w.u),
        z2_tilde: -(w.gp * w.g) / (w.u * w.up),
    }
}

/// Allowed zone `AZk` or forbidden zone `FZk`, counted from the well bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Allowed(u8),
    Forbidden(u8),
}

impl Zone {
    pub fn is_allowed(&self) -> bool {
        matches!(self, Zone::Allowed(_))
    }

    /// Position in the cycle FZ0, AZ0, FZ1, AZ1, ...
    pub fn ordinal(&self) -> u8 {
        match *self {
            Zone::Forbidden(k) => 2 * k,
            Zone::Allowed(k) => 2 * k + 1,
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Zone::Allowed(k) => write!(f, "AZ{k}"),
            Zone::Forbidden(k) => write!(f, "FZ{k}"),
        }
    }
}

// Sign rows (u', u, g', g) for FZ0 .. FZ3 of a well-barrier-well cell.
const TABULATED: [(Zone, [bool; 4]); 7] = [
    (Zone::Forbidden(0), [true, true, true, true]),
    (Zone::Allowed(0), [true, true, false, true]),
    (Zone::Forbidden(1), [true, true, false, false]),
    (Zone::Allowed(1), [false, true, false, false]),
    (Zone::Forbidden(2), [false, true, true, false]),
    (Zone::Allowed(2), [false, false, true, false]),
    (Zone::Forbidden(3), [true, false, true, false]),
];

/// Zone from the signs of the four entries.
///
/// Sign patterns repeat with period eight, so zones above AZ3 are reported
/// as their image in FZ0..AZ3.
pub fn classify_zone(w: &WMatrix) -> Result<Zone> {
    let p = w.g * w.up;
    let q = -w.u * w.gp;
    if p.abs() < EDGE_DEAD_BAND || q.abs() < EDGE_DEAD_BAND || !p.is_finite() || !q.is_finite() {
        return Err(Error::Unclassified { gu: p, ug: q });
    }
    let zone = if p > 0.0 && q > 0.0 {
        match (w.g > 0.0, w.u > 0.0) {
            (true, true) => Zone::Allowed(0),
            (false, true) => Zone::Allowed(1),
            (false, false) => Zone::Allowed(2),
            (true, false) => Zone::Allowed(3),
        }
    } else if q < 0.0 {
        if w.g > 0.0 {
            Zone::Forbidden(0)
        } else {
            Zone::Forbidden(2)
        }
    } else if w.u > 0.0 {
        Zone::Forbidden(1)
    } else {
        Zone::Forbidden(3)
    };
    Ok(zone)
}

/// Kard parameters of a half-cell.
///
/// In forbidden zones `beta`, `z` and `eta` hold `β̄`, `z̄` and `η̄`; in odd
/// forbidden zones `alpha` is the real part of `α + iπ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KardParams {
    pub zone: Zone,
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
    pub eta: f64,
    /// Exterior velocity the parameters were built for.
    pub nu: f64,
    /// Sign pattern outside the tabulated FZ0..FZ3 rows.
    pub extrapolated: bool,
    /// The decomposed half-cell matrix `W_R`.
    pub w_r: WMatrix,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `η` from `sinh η = (ν/z − z/ν)/2`.
pub fn eta_of(nu: f64, z: f64) -> f64 {
    (0.5 * (nu / z - z / nu)).asinh()
}

pub fn kard_decompose(w_r: &WMatrix, nu: f64) -> Result<KardParams> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::NonPropagating(nu));
    }
    let zone = classify_zone(w_r)?;
    let WMatrix { g, u, gp, up } = *w_r;
    let p = g * up;
    let q = -u * gp;
    let (alpha, beta, z) = match zone {
        Zone::Allowed(_) => {
            let alpha = 0.5 * (up / g).ln();
            let mut beta = (sgn(u) * q.sqrt()).atan2(sgn(g) * p.sqrt());
            if beta < 0.0 {
                beta += 2.0 * PI;
            }
            (alpha, beta, (-gp / u).sqrt())
        }
        Zone::Forbidden(k) if k % 2 == 0 => {
            let alpha = 0.5 * (up / g).ln();
            let beta_bar = (sgn(u) * (-q).sqrt()).asinh();
            (alpha, beta_bar, (gp / u).sqrt())
        }
        Zone::Forbidden(_) => {
            let alpha = 0.5 * (-up / g).ln();
            let beta_bar = (sgn(up) * (-p).sqrt()).asinh();
            (alpha, beta_bar, (-gp / u).sqrt())
        }
    };
    let signs = [up > 0.0, u > 0.0, gp > 0.0, g > 0.0];
    let extrapolated = !TABULATED.iter().any(|(zn, s)| *zn == zone && *s == signs);
    Ok(KardParams {
        zone,
        alpha,
        beta,
        z,
        eta: eta_of(nu, z),
        nu,
        extrapolated,
        w_r: *w_r,
    })
}

impl KardParams {
    /// Rebuilds `W_R` from `(α, β, z)` and the zone.
    pub fn reconstruct(&self) -> WMatrix {
        let (ea, eb) = (self.alpha.exp(), (-self.alpha).exp());
        let z = self.z;
        match self.zone {
            Zone::Allowed(_) => {
                let (s, c) = self.beta.sin_cos();
                WMatrix::new(eb * c, s / z, -z * s, ea * c)
            }
            Zone::Forbidden(k) if k % 2 == 0 => {
                let sigma = if k % 4 == 0 { 1.0 } else { -1.0 };
                let (s, c) = (self.beta.sinh(), self.beta.cosh());
                WMatrix::new(sigma * eb * c, s / z, z * s, sigma * ea * c)
            }
            Zone::Forbidden(k) => {
                let tau = if k % 4 == 1 { 1.0 } else { -1.0 };
                let (s, c) = (self.beta.sinh(), self.beta.cosh());
                WMatrix::new(-eb * s, tau * c / z, -tau * z * c, ea * s)
            }
        }
    }

    /// Parameters of the mirror-image half-cell (α → −α).
    pub fn mirrored(&self) -> Result<KardParams> {
        kard_decompose(&crate::tmatrix::reverse_half_cell(&self.w_r), self.nu)
    }

    pub fn require_allowed(&self) -> Result<()> {
        if self.zone.is_allowed() {
            Ok(())
        } else {
            Err(Error::WrongZone {
                expected: "an allowed",
                found: self.zone.to_string(),
            })
        }
    }

    pub fn require_forbidden(&self) -> Result<()> {
        if self.zone.is_allowed() {
            Err(Error::WrongZone {
                expected: "a forbidden",
                found: self.zone.to_string(),
            })
        } else {
            Ok(())
        }
    }

    /// Double-cell impedance `μ = η − α` (or `ξ` in a forbidden zone).
    pub fn mu(&self) -> f64 {
        self.eta - self.alpha
    }
}

/// `μ = ln(ν/Z)` straight from the matrix entries, `Z² = −γλ`. In a
/// forbidden zone `Z²` is negative and the result is `ξ`, the real part of
/// `μ = ξ + iπ/2`.
pub fn impedance_from_w(w_r: &WMatrix, nu: f64) -> f64 {
    let z2 = z_squared(w_r).z2;
    0.5 * (nu * nu / z2.abs()).ln()
}

/// Double-cell quantities derived from Kard parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleCellKard {
    /// `η − α` (`ξ` in forbidden zones).
    pub mu: f64,
    /// `ln(ν/Z)` from the log-derivatives; agrees with `mu`.
    pub mu_impedance: f64,
    /// `Z = z e^α` (`Z̄` in forbidden zones).
    pub big_z: f64,
    /// `cos 2β`, or the matrix value in a forbidden zone.
    pub cos_phi: f64,
    pub zone: Zone,
}

impl DoubleCellKard {
    pub fn residual(&self) -> f64 {
        (self.mu - self.mu_impedance).abs()
    }
}

pub fn double_cell_kard(kp: &KardParams) -> DoubleCellKard {
    let cos_phi = if kp.zone.is_allowed() {
        (2.0 * kp.beta).cos()
    } else {
        bloch_cos_phi(&kp.w_r).cos_phi
    };
    DoubleCellKard {
        mu: kp.mu(),
        mu_impedance: impedance_from_w(&kp.w_r, kp.nu),
        big_z: kp.z * kp.alpha.exp(),
        cos_phi,
        zone: kp.zone,
    }
}

/// `cos φ_N = cosh α cos((2n+1)β)` for `N = 2n+1` half-cells.
pub fn cos_phi_odd(kp: &KardParams, n: u32) -> Result<f64> {
    kp.require_allowed()?;
    Ok(kp.alpha.cosh() * ((2 * n + 1) as f64 * kp.beta).cos())
}

/// Kard parameters of `spec` at energy `e`, exterior in well material.
pub fn kard_at(spec: &HalfCellSpec, e: f64) -> Result<KardParams> {
    let nu = velocity(e, spec.well_mass).ok_or(Error::NonPropagating(0.0))?;
    kard_decompose(&half_cell_w(spec, e), nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    LowerOuter,
    GapLower,
    GapUpper,
    UpperOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFunction {
    NodeOfG,
    NodeOfUprime,
    /// Node of `u` or `g'` (`cos φ = +1`).
    CosPhiUnity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdge {
    pub energy: f64,
    pub kind: EdgeKind,
    pub which: EdgeFunction,
}

/// Band edges in an energy window plus any resolution warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct BandScan {
    pub e_range: (f64, f64),
    pub allowed_at_start: bool,
    pub edges: Vec<BandEdge>,
    pub warnings: Vec<String>,
}

impl BandScan {
    /// Allowed intervals clipped to the scanned window.
    pub fn allowed_bands(&self) -> Vec<(f64, f64)> {
        let mut bands = Vec::new();
        let mut start = self.allowed_at_start.then_some(self.e_range.0);
        for e in &self.edges {
            match start.take() {
                Some(s) => bands.push((s, e.energy)),
                None => start = Some(e.energy),
            }
        }
        if let Some(s) = start {
            bands.push((s, self.e_range.1));
        }
        bands
    }

    /// Gaps opened by the half-cell asymmetry (`cos φ < −1`).
    pub fn split_gaps(&self) -> Vec<(f64, f64)> {
        self.edges
            .windows(2)
            .filter(|p| p[0].kind == EdgeKind::GapLower && p[1].kind == EdgeKind::GapUpper)
            .map(|p| (p[0].energy, p[1].energy))
            .collect()
    }
}

/// Scans `[e_min, e_max]` on `points` energies for nodes of `g`, `u`, `g'`
/// and `u'`, refining each by bisection.
pub fn find_band_edges(
    spec: &HalfCellSpec,
    e_range: (f64, f64),
    points: usize,
) -> Result<BandScan> {
    let (lo, hi) = e_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "energy range must satisfy 0 < min < max (got [{lo}, {hi}])"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument(
            "need at least two scan points".into(),
        ));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let ws: Vec<WMatrix> = grid.iter().map(|&e| half_cell_w(spec, e)).collect();
    let entry = |w: &WMatrix, k: usize| w.entries()[k];
    let mut found: Vec<(f64, usize)> = Vec::new();
    let mut warnings = Vec::new();
    for i in 1..points {
        let mut hits = 0;
        for k in 0..4 {
            let (a, b) = (entry(&ws[i - 1], k), entry(&ws[i], k));
            if a == 0.0 && i == 1 {
                found.push((grid[0], k));
            }
            if a != 0.0 && a.signum() != b.signum() {
                let r = bisect(
                    |e| entry(&half_cell_w(spec, e), k),
                    grid[i - 1],
                    grid[i],
                    EDGE_TOL_MEV,
                )?;
                found.push((r, k));
                hits += 1;
            }
        }
        let flip = bloch_cos_phi(&ws[i - 1]).allowed() != bloch_cos_phi(&ws[i]).allowed();
        if flip != (hits % 2 == 1) {
            warnings.push(format!(
                "unresolved band edges between {:.6} and {:.6} meV; increase resolution",
                grid[i - 1],
                grid[i]
            ));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let allowed_at_start = bloch_cos_phi(&ws[0]).allowed();
    let mut allowed = allowed_at_start;
    let edges = found
        .into_iter()
        .map(|(energy, k)| {
            // entries() order: g, u, g', u'
            let which = match k {
                0 => EdgeFunction::NodeOfG,
                3 => EdgeFunction::NodeOfUprime,
                _ => EdgeFunction::CosPhiUnity,
            };
            let kind = match (which, allowed) {
                (EdgeFunction::CosPhiUnity, false) => EdgeKind::LowerOuter,
                (EdgeFunction::CosPhiUnity, true) => EdgeKind::UpperOuter,
                (_, true) => EdgeKind::GapLower,
                (_, false) => EdgeKind::GapUpper,
            };
            allowed = !allowed;
            BandEdge {
                energy,
                kind,
                which,
            }
        })
        .collect();
    Ok(BandScan {
        e_range,
        allowed_at_start,
        edges,
        warnings,
    })
}

/// Fixed points of the double-cell Möbius map: `tanh(μ/2)` and its
/// reciprocal. In a forbidden zone pass `ξ`; the points then sit on the unit
/// circle as a conjugate pair.
pub fn fixed_points(mu: f64, zone: Zone) -> (Complex64, Complex64) {
    if zone.is_allowed() {
        let t = if mu.is_infinite() {
            mu.signum()
        } else {
            (0.5 * mu).tanh()
        };
        (Complex64::new(t, 0.0), Complex64::new(1.0 / t, 0.0))
    } else {
        let t = if mu.is_infinite() {
            Complex64::new(mu.signum(), 0.0)
        } else {
            (Complex64::new(mu, FRAC_PI_2) * 0.5).tanh()
        };
        (t, t.conj())
    }
}
