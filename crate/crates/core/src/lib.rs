//! Casimir interaction between a sphere and a plane from the multipolar
//! scattering formula.
//!
//! The free energy is a Matsubara sum (or a frequency integral at zero
//! temperature) of `ln det(I - M)`, where `M` is the round-trip operator of
//! the sphere-plane cavity expressed in the spherical multipole basis. The
//! operator splits into independent blocks per azimuthal number `m`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod materials;
pub mod mie;
pub mod pfa;
pub mod error;
pub mod quadrature;
pub mod roundtrip;
pub mod specfun;
pub mod spectrum;

pub use error::{CasimirError, Result};
pub use materials::MirrorSpec;
pub use roundtrip::{ComputeConfig, Geometry};
pub use spectrum::{CasimirResult, Diagnostics, QuantityKind};
