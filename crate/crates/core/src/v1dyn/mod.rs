//! Firing-rate lattice of V1 lateral interactions.
//!
//! Every pixel hosts a hypercolumn of excitatory (`x`) and inhibitory (`y`)
//! units, one pair per wavelet scale and orientation band. Excitatory units
//! are driven by the ON or OFF wavelet coefficients and interact through
//! translation-invariant lateral connections: monosynaptic excitation `J`
//! between roughly aligned units and disynaptic inhibition `W` between
//! similarly oriented, non-aligned units. The temporal mean of the
//! excitatory firing rate is the conspicuity of each feature.

mod activation;
mod geometry;
mod kernels;
mod lattice;

pub use activation::Activation;
pub use geometry::{preferred_angles, wrap_half_pi, KernelGeometry};
pub use kernels::{
    build_kernels, j_gate, j_weight, w_excluded, w_weight, CouplingKernels, KernelEntry, KernelReading, KernelRules,
    Tap,
};
pub use lattice::{
    conspicuity, simulate, simulate_channel, simulate_observed, ConspicuityResponse, Integrator, LatticeBoundary,
    LatticeDims, LatticeParams, LatticeState, PsiProfile, Simulator,
};
