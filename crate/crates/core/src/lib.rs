//! Joint pinching-antenna placement and transmit beamforming for a
//! multi-waveguide ISAC downlink.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – serving area, waveguide layout and the spherical-wave
//!   channel model for transmit and receive pinching antennas.
//! * [`sensing`] – receive beamforming, radar SNR, Neyman–Pearson detection.
//! * [`beamspan`] – span reduction of the transmit beamformer, the exact and
//!   phase-aligned quadratic forms, and position fine tuning.
//! * [`convex`] – a small log-barrier interior-point solver for smooth
//!   programs with exponential-of-affine and convex-quadratic terms.
//! * [`sca`] – log-domain variable lifting, Taylor linearisation and the
//!   successive convex approximation loop.
//! * [`baselines`] – fixed-position beamforming, the exhaustive placement
//!   oracle and the four placement benchmarks.
//! * [`experiments`] – scenario configuration, case studies, Monte-Carlo
//!   sweeps and CSV/JSON emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod beamspan;
pub mod convex;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod problem;
pub mod sca;
pub mod selftest;
pub mod sensing;

pub use error::{Error, Result};
pub use geometry::{ChannelVector, Channels, RfConstants, SystemGeometry};
pub use problem::Problem;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
