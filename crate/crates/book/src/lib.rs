//! Compiles every chapter of the guide so its listings run as doc-tests.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/transfer-matrices.md")]
pub mod transfer_matrices {}
#[doc = include_str!("../../../book/src/bloch-phase.md")]
pub mod bloch_phase {}
#[doc = include_str!("../../../book/src/delta-model.md")]
pub mod delta_model {}
#[doc = include_str!("../../../book/src/kard.md")]
pub mod kard {}
#[doc = include_str!("../../../book/src/transmission.md")]
pub mod transmission {}
#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
