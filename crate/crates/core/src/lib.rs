//! Decoherence of a macroscopic collective coordinate by its own internal environment.
//!
//! The object is modelled as `N` fixed two-level particles whose level mixing depends on
//! the collective position `x`. Under the adiabatic (large-mass) separation each position
//! `x` drags the internal state along `S(x; t) = ∏_j S_j(x; t)`, and the reduced density
//! matrix of the collective coordinate acquires the factor
//! `F_N(x′, x, t) = ∏_j ⟨g_j|S_j†(x′; t) S_j(x; t)|g_j⟩`.
//!
//! Modules:
//!
//! - [`model`]: particles, dressed eigensystems, single-particle S-matrices, cat-state overlaps.
//! - [`decoherence`]: exact and weak-coupling factors, `R(t)` sums, continuum integrals and bounds.
//! - [`density`]: Gaussian-pair and plane-wave density matrices on grids, peak diagnostics.
//! - [`dissipation`]: free and damped wave-packet widths.
//! - [`oracle`]: independent brute-force checks (matrix exponentials, `2^N` state vectors,
//!   quadrature, split-step grid propagation).
//! - [`verify`]: the seeded oracle-agreement suite.
//! - [`cli`]: JSON-configured sweeps emitting CSV and SVG.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decoherence;
pub mod density;
pub mod dissipation;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod verify;

pub use decoherence::{
    factor_product, factor_single_exact, factor_single_weak, phase_s, r_bound_homogeneous, r_continuum,
    r_sum, DecoherenceFactor, FactorMode, ProductFactor, SpectralDensity,
};
pub use density::{DensityGrid, GaussianPair, GridSpec, PlaneWavePair};
pub use dissipation::PacketParams;
pub use error::{Error, Result};
pub use model::{cat_overlap, dressed_eigensystem, s_matrix_single, CouplingForm, QubitState, TwoLevelParticle, UnitaryTwo};
