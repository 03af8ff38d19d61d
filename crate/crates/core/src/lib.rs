//! Cooperative passive sensing with MIMO-OFDM mobile-network signals.
//!
//! One or more transmitting base stations (TBSs) illuminate a moving target
//! while a passive base station (PBS) listens. Each TBS reaches the PBS over
//! a direct line-of-sight (LoS) path and over a target-reflected non-LoS
//! (NLoS) path; both paths share the carrier-frequency offset (CFO) and time
//! offset (TO) of the unsynchronized TBS/PBS clock pair. This crate
//! implements the full processing chain:
//!
//! * [`scene`] — geometry, waveform, array, offset, and noise configuration;
//! * [`channel`] — synthesis of the post-demodulation echo symbol cubes;
//! * [`angle_est`] — two-stage joint AoA/AoD estimation (2D-FFT rough stage
//!   followed by search-restricted 2D-MUSIC);
//! * [`preprocess`] — phase compensation, coherent accumulation, NLoS/LoS
//!   cross-correlation (NLCC) offset cancellation, and coherent compression
//!   into range/velocity feature vectors;
//! * [`fusion`] — symbol-level multi-BS grid-search localization and
//!   absolute-velocity estimation;
//! * [`analysis`] — analytic complexity and SNR-gain reports;
//! * [`harness`] — seeded Monte Carlo experiments, RMSE sweeps, the angle
//!   estimator benchmark, and CSV/file output.

pub mod analysis;
pub mod angle_est;
pub mod channel;
mod error;
pub mod fusion;
pub mod harness;
pub mod preprocess;
pub mod scene;
pub mod seeds;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
