//! Rate-distributed LCMV beamforming for wireless acoustic sensor networks.
//!
//! The crate allocates per-sensor quantization rates by solving a
//! semidefinite program that minimizes the total transmission energy of the
//! network subject to an output-noise-power bound on an LCMV beamformer at
//! the fusion center. Sensor selection falls out as the Boolean special case
//! of the same program, either solved directly or recovered by thresholding
//! the rates.
//!
//! Everything here is pure computation over `alloc` containers and works
//! without `std`. Signal synthesis, framing, file formats and the command
//! line live in the companion `rdbf` crate.
//!
//! Module map:
//!
//! - [`scene`]: geometry, free-field transfer functions, covariance models.
//! - [`quantization`]: uniform quantizer and its noise covariance.
//! - [`energy`]: channel capacity, transmission energy, energy usage ratio.
//! - [`beamforming`]: LCMV / MVDR weights and output noise power.
//! - [`sdp`]: a primal-dual interior point solver for block LMIs.
//! - [`allocation`]: the rate allocation and sensor selection programs,
//!   rounding, thresholding and an exhaustive oracle.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod allocation;
pub mod beamforming;
pub mod energy;
mod error;
pub mod linalg;
pub mod quantization;
pub mod scene;
pub mod sdp;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Complex matrix type used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Complex column vector type used throughout the crate.
pub type CVector = nalgebra::DVector<Complex64>;
