//! Bottom-up saliency from a neurodynamic model of lateral interactions in V1.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`color`]: RGB to gamma-corrected opponent channels (L, rg, by).
//! 2. [`wavelet`]: undecimated à trous decomposition into scale/orientation
//!    planes, split into ON and OFF inputs.
//! 3. [`v1dyn`]: an excitatory/inhibitory firing-rate lattice with
//!    orientation- and distance-dependent lateral connections, whose
//!    temporally averaged rates are the conspicuity of every feature.
//! 4. [`integrate`]: fusion across scales, orientations and channels,
//!    z-normalization and Gaussian smoothing.
//!
//! [`metrics`] scores saliency maps against eye fixations and [`stimgen`]
//! synthesizes parametric feature-singleton search displays.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, image
//! decoding and the command line live in the companion `v1sal` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod color;
mod error;
pub mod integrate;
pub mod metrics;
pub mod pipeline;
pub mod plane;
pub mod stimgen;
pub mod v1dyn;
pub mod wavelet;

pub(crate) use error::invalid;
pub use error::{Error, Result};
pub use plane::{Boundary, Plane};
