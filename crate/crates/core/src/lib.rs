//! Transfer-matrix analysis of biperiodic semiconductor superlattices.
//!
//! A superlattice is built from half-cells (well segment `a`, barrier `b`,
//! well segment `c`) laid out as mirror-image pairs. Everything here works in
//! meV and nm with a constant effective mass per layer.
//!
//! * [`device`]: layer model, biperiodic generator, JSON configuration.
//! * [`tmatrix`]: real `W` matrices on the (ψ, ψ'/m*) spinor, complex `M`
//!   matrices and the Chebyshev power identity.
//! * [`deltamodel`]: the dimensionless delta-barrier half-cell.
//! * [`bands`]: Bloch phases, log-derivatives, Kard parameters, band edges.
//! * [`transmission`]: closed-form and direct transmission, envelopes,
//!   transparent states and resonances, energy sweeps.
//! * [`oracle`]: brute-force slice integration used to certify the rest.
//!
//! ```
//! use bilat::device::{HalfCellSpec, Ordering};
//! use bilat::tmatrix::device_transmission;
//!
//! let device = HalfCellSpec::gaas_reference().build_biperiodic(6, Ordering::WideFirst);
//! let t = device_transmission(&device, 95.0).unwrap();
//! assert!(t > 0.0 && t <= 1.0);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod deltamodel;
pub mod device;
mod error;
pub mod oracle;
pub(crate) mod roots;
pub mod tmatrix;
pub mod transmission;

pub use error::{Error, Result};

/// ℏ²/2mₑ in meV·nm².
pub const HBAR2_OVER_2M: f64 = 38.0998;
