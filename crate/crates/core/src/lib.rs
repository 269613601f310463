//! Radar-SINR versus secrecy-rate tradeoff for a joint passive-radar and
//! communications transmitter.
//!
//! The crate models a multi-antenna transmitter that serves a communication
//! receiver while a passive radar receiver, which doubles as an
//! eavesdropper, listens on the direct path. It designs the radar waveform
//! and the information covariance so that the radar output SINR is maximal
//! while the information secrecy rate stays above a threshold, for both
//! orthogonal and shared transmission resources.

pub mod convex;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod nonoverlap;
pub mod overlap;
pub mod radar;
pub mod scenario;
pub mod secrecy;
pub mod verify;

pub use error::{Error, Result};
