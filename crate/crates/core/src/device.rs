//! Layered potentials, the biperiodic generator and JSON configuration.
//!
//! Widths are in nm, energies in meV measured from the well bottom, masses
//! relative to the free electron mass. The exterior (substrate and cap) is
//! taken to be well material.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One region of constant potential and effective mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(rename = "width_nm")]
    pub width: f64,
    #[serde(rename = "potential_meV")]
    pub potential: f64,
    pub mass: f64,
}

impl Layer {
    pub fn new(width: f64, potential: f64, mass: f64) -> Self {
        Layer {
            width,
            potential,
            mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width >= 0.0) || !self.width.is_finite() {
            return Err(Error::InvalidDevice(format!(
                "layer width must be finite and >= 0 (got {})",
                self.width
            )));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidDevice(format!(
                "layer mass must be finite and > 0 (got {})",
                self.mass
            )));
        }
        if !self.potential.is_finite() {
            return Err(Error::InvalidDevice(
                "layer potential must be finite".into(),
            ));
        }
        Ok(())
    }

    fn same_material(&self, other: &Layer) -> bool {
        self.potential == other.potential && self.mass == other.mass
    }
}

/// Which well type an electron incident from the left meets first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    WideFirst,
    NarrowFirst,
}

impl Ordering {
    pub fn flipped(self) -> Self {
        match self {
            Ordering::WideFirst => Ordering::NarrowFirst,
            Ordering::NarrowFirst => Ordering::WideFirst,
        }
    }
}

/// Well segment `a`, barrier `b`, well segment `c`.
///
/// `a` is the segment at the centre of the double cell, so a double cell
/// reads `c, b, 2a, b, c` from left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfCellSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub barrier_height: f64,
    pub well_mass: f64,
    pub barrier_mass: f64,
}

impl HalfCellSpec {
    /// GaAs/AlGaAs cell with 4.3 nm and 3.8 nm wells between 3.8 nm barriers.
    pub fn gaas_reference() -> Self {
        HalfCellSpec {
            a: 2.15,
            b: 3.8,
            c: 1.9,
            barrier_height: 288.09,
            well_mass: 0.074,
            barrier_mass: 0.080,
        }
    }

    /// Same barriers and materials with explicit full well widths.
    pub fn with_wells(wide: f64, narrow: f64) -> Self {
        HalfCellSpec {
            a: 0.5 * wide,
            c: 0.5 * narrow,
            ..Self::gaas_reference()
        }
    }

    pub fn width(&self) -> f64 {
        self.a + self.b + self.c
    }

    /// Asymmetry `s = a - c`.
    pub fn asymmetry(&self) -> f64 {
        self.a - self.c
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidDevice(format!(
                    "{name} must be >= 0 (got {v})"
                )));
            }
        }
        if !(self.width() > 0.0) {
            return Err(Error::InvalidDevice(
                "half-cell width a+b+c must be > 0".into(),
            ));
        }
        self.well_layer(1.0).validate()?;
        self.barrier_layer().validate()
    }

    /// Puts the wide segment at `a` for [`Ordering::WideFirst`] and the
    /// narrow one there for [`Ordering::NarrowFirst`].
    pub fn oriented(&self, ordering: Ordering) -> HalfCellSpec {
        let (wide, narrow) = if self.a >= self.c {
            (self.a, self.c)
        } else {
            (self.c, self.a)
        };
        let (a, c) = match ordering {
            Ordering::WideFirst => (wide, narrow),
            Ordering::NarrowFirst => (narrow, wide),
        };
        HalfCellSpec { a, c, ..*self }
    }

    /// Exchanges `a` and `c` (reverses the sign of the asymmetry).
    pub fn swapped(&self) -> HalfCellSpec {
        HalfCellSpec {
            a: self.c,
            c: self.a,
            ..*self
        }
    }

    pub fn well_layer(&self, width: f64) -> Layer {
        Layer::new(width, 0.0, self.well_mass)
    }

    pub fn barrier_layer(&self) -> Layer {
        Layer::new(self.b, self.barrier_height, self.barrier_mass)
    }

    /// Layers of the right half-cell `W_R`, from the cell centre outward.
    pub fn right_layers(&self) -> [Layer; 3] {
        [
            self.well_layer(self.a),
            self.barrier_layer(),
            self.well_layer(self.c),
        ]
    }

    /// Layers of the mirror-image half-cell `W_L`.
    pub fn left_layers(&self) -> [Layer; 3] {
        let [x, y, z] = self.right_layers();
        [z, y, x]
    }

    /// `N` alternating half-cells `L R L R ...` as an explicit device.
    pub fn build_biperiodic(&self, n_half_cells: usize, ordering: Ordering) -> Device {
        build_biperiodic(self, n_half_cells, ordering)
    }
}

/// Explicit layered device with its exterior material.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub layers: Vec<Layer>,
    pub exterior_mass: f64,
    pub exterior_potential: f64,
    pub n_half_cells: Option<usize>,
    pub ordering: Option<Ordering>,
}

impl Device {
    pub fn new(layers: Vec<Layer>, exterior_mass: f64) -> Result<Self> {
        let d = Device {
            layers,
            exterior_mass,
            exterior_potential: 0.0,
            n_half_cells: None,
            ordering: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidDevice("layer list is empty".into()));
        }
        for l in &self.layers {
            l.validate()?;
        }
        if !(self.exterior_mass > 0.0) || !self.exterior_mass.is_finite() {
            return Err(Error::InvalidDevice(format!(
                "exterior mass must be > 0 (got {})",
                self.exterior_mass
            )));
        }
        if !self.exterior_potential.is_finite() {
            return Err(Error::InvalidDevice(
                "exterior potential must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn total_width(&self) -> f64 {
        self.layers.iter().map(|l| l.width).sum()
    }

    /// Wells fully enclosed between two higher-potential layers.
    pub fn interior_wells(&self) -> Vec<f64> {
        let n = self.layers.len();
        (1..n.saturating_sub(1))
            .filter(|&i| {
                let v = self.layers[i].potential;
                self.layers[i - 1].potential > v && self.layers[i + 1].potential > v
            })
            .map(|i| self.layers[i].width)
            .collect()
    }

    /// Serialises to the explicit-layer JSON form.
    pub fn to_json(&self) -> String {
        let cfg = DeviceConfig {
            layers: Some(self.layers.clone()),
            biperiodic: None,
            exterior_mass: Some(self.exterior_mass),
            exterior_potential: Some(self.exterior_potential),
            half_cells: self.n_half_cells,
            order: self.ordering,
        };
        serde_json::to_string_pretty(&cfg).expect("device serialises")
    }
}

/// Mirror image: layers reversed.
///
/// An even number of half-cells is already mirror symmetric, so the ordering
/// label only flips for odd `N` (where the first and last wells differ).
pub fn reverse_device(d: &Device) -> Device {
    let mut layers = d.layers.clone();
    layers.reverse();
    let ordering = match (d.ordering, d.n_half_cells) {
        (Some(o), Some(n)) if n % 2 == 1 => Some(o.flipped()),
        (o, _) => o,
    };
    Device {
        layers,
        ordering,
        ..d.clone()
    }
}

pub fn build_biperiodic(spec: &HalfCellSpec, n_half_cells: usize, ordering: Ordering) -> Device {
    let spec = spec.oriented(ordering);
    let mut raw = Vec::with_capacity(3 * n_half_cells);
    for i in 0..n_half_cells {
        if i % 2 == 0 {
            raw.extend(spec.left_layers());
        } else {
            raw.extend(spec.right_layers());
        }
    }
    let mut layers: Vec<Layer> = Vec::with_capacity(raw.len());
    for l in raw.into_iter().filter(|l| l.width > 0.0) {
        match layers.last_mut() {
            Some(prev) if prev.same_material(&l) => prev.width += l.width,
            _ => layers.push(l),
        }
    }
    if layers.is_empty() {
        layers.push(spec.well_layer(0.0));
    }
    Device {
        layers,
        exterior_mass: spec.well_mass,
        exterior_potential: 0.0,
        n_half_cells: Some(n_half_cells),
        ordering: Some(ordering),
    }
}

/// Generator block of the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiperiodicConfig {
    pub well_wide_nm: f64,
    pub well_narrow_nm: f64,
    pub barrier_nm: f64,
    #[serde(rename = "barrier_meV")]
    pub barrier_mev: f64,
    pub well_mass: f64,
    pub barrier_mass: f64,
    pub half_cells: usize,
    pub order: Ordering,
}

impl BiperiodicConfig {
    pub fn spec(&self) -> HalfCellSpec {
        HalfCellSpec {
            a: 0.5 * self.well_wide_nm,
            b: self.barrier_nm,
            c: 0.5 * self.well_narrow_nm,
            barrier_height: self.barrier_mev,
            well_mass: self.well_mass,
            barrier_mass: self.barrier_mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<Vec<Layer>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    biperiodic: Option<BiperiodicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exterior_mass: Option<f64>,
    #[serde(
        default,
        rename = "exterior_potential_meV",
        skip_serializing_if = "Option::is_none"
    )]
    exterior_potential: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Ordering>,
}

/// A parsed configuration: always the explicit device, plus the generator
/// when the file used one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub device: Device,
    pub biperiodic: Option<BiperiodicConfig>,
}

/// Parses a configuration document into a validated [`Device`].
pub fn parse_device(text: &str) -> Result<Device> {
    parse_config(text).map(|c| c.device)
}

pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let cfg: DeviceConfig = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match (cfg.layers, cfg.biperiodic) {
        (Some(_), Some(_)) => Err(Error::InvalidDevice(
            "give either `layers` or `biperiodic`, not both".into(),
        )),
        (None, None) => Err(Error::InvalidDevice(
            "config needs a `layers` list or a `biperiodic` block".into(),
        )),
        (None, Some(bp)) => {
            let spec = bp.spec();
            spec.validate()?;
            if bp.half_cells == 0 {
                return Err(Error::InvalidDevice("half_cells must be >= 1".into()));
            }
            if bp.well_wide_nm < bp.well_narrow_nm {
                return Err(Error::InvalidDevice(
                    "well_wide_nm must not be smaller than well_narrow_nm".into(),
                ));
            }
            let mut device = build_biperiodic(&spec, bp.half_cells, bp.order);
            if let Some(m) = cfg.exterior_mass {
                device.exterior_mass = m;
            }
            if let Some(v) = cfg.exterior_potential {
                device.exterior_potential = v;
            }
            device.validate()?;
            Ok(ParsedConfig {
                device,
                biperiodic: Some(bp),
            })
        }
        (Some(layers), None) => {
            let exterior_mass = cfg
                .exterior_mass
                .or_else(|| layers.first().map(|l| l.mass))
                .unwrap_or(0.0);
            let device = Device {
                layers,
                exterior_mass,
                exterior_potential: cfg.exterior_potential.unwrap_or(0.0),
                n_half_cells: cfg.half_cells,
                ordering: cfg.order,
            };
            device.validate()?;
            Ok(ParsedConfig {
                device,
                biperiodic: None,
            })
        }
    }
}

/// Hook for energy-dependent effective masses; the default is the constant
/// per-layer mass.
pub trait MassModel {
    fn mass(&self, layer: &Layer, energy: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantMass;

impl MassModel for ConstantMass {
    fn mass(&self, layer: &Layer, _energy: f64) -> f64 {
        layer.mass
    }
}
