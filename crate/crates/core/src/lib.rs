//! Chirp-multicarrier sensing library.
//!
//! Implements an AFDM (affine frequency division multiplexing) transceiver
//! and the radar side of an integrated sensing and communication link:
//!
//! ```text
//!   payload bits -> QAM grid -> IDAFT + prefix -> serialized frame
//!        |                                            |
//!        |                                     multi-target echo
//!        |                                     (delay, Doppler, noise)
//!        v                                            v
//!   known symbols  ------------------->  deframe -> estimators -> detections
//! ```
//!
//! Two estimators are provided: a time-domain correlation processor
//! ([`fccr::fccr_rdm`]) whose Doppler readout is limited to one slow-time
//! alias span, and a chirp-domain matched-filter scan ([`estimator::estimate`])
//! that exploits the delay-Doppler coupling of the waveform to recover
//! Dopplers far beyond that limit. An OFDM symbol-division processor
//! ([`ofdm`]) serves as the conventional baseline.

pub mod cfar;
pub mod channel;
pub mod detection;
pub mod error;
pub mod estimator;
pub mod fccr;
pub mod image;
pub mod metrics;
pub mod ofdm;
pub mod params;
pub mod qam;
pub mod rng;
pub mod transforms;

pub use error::{AfdmError, Result};
pub use params::{AfdmParams, SPEED_OF_LIGHT};
