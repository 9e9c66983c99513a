//! Joint design of transmit waveforms and element weights for frequency diverse
//! array (FDA) radar sharing spectrum with other systems.
//!
//! The design maximizes the MVDR output SINR against known interferers while
//! keeping the radiated energy inside each shared band below a tolerance, the
//! per-waveform energies fixed, most of each waveform's energy in band, and
//! both waveforms and weights close to references. Each subproblem is a
//! semidefinite relaxation solved by [`sdp`] and rounded by Gaussian
//! randomization in [`codesign`].

pub mod analysis;
pub mod cli;
pub mod codesign;
pub mod error;
pub mod interference;
pub mod linalg;
pub mod receiver;
pub mod scenario;
pub mod sdp;
pub mod seeds;
pub mod signal_model;
pub mod spectral;

pub use error::{Error, Result};
pub use scenario::ScenarioConfig;
