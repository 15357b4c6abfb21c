//! Runtime side of rate-distributed LCMV beamforming: STFT framing,
//! synthetic recordings, scenario files, experiment runs with CSV output,
//! waveform IO and the `rdbf` command line.
//!
//! The optimization itself lives in [`rdbf_core`].

pub mod config;
pub mod denoise;
mod error;
pub mod experiment;
pub mod sdp_file;
pub mod stft;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};
pub use rdbf_core;
