//! Non-coherent differential detection of CPM signals.
//!
//! This crate simulates continuous phase modulation links detected
//! non-coherently through the differential signal R_K(t) =
//! ½·r(t)·r*(t − K·Ts): waveform synthesis, an AWGN/Doppler channel,
//! trellis-based differential and coherent sequence detectors, a
//! minimum-distance search that optimizes the delay K, and a Monte Carlo
//! bit-error-rate harness with CSV/SVG reporting.

pub mod channel;
pub mod coherent;
pub mod differential;
pub mod distance;
pub mod error;
pub mod reference;
pub mod report;
pub mod sim;
pub mod util;
pub mod viterbi;
pub mod waveform;

pub use error::{Error, Result};
