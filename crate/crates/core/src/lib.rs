//! Block-level simulator of a microwave-photonic exciter chain built around a
//! fiber-delay optoelectronic oscillator.
//!
//! The chain is modeled on a uniform sampling grid as
//!
//! ```text
//! CW laser -> Mach-Zehnder modulator -> delay fiber -> photodetector
//!                    ^                                      |
//!                    |                                      v
//!            limiting amplifier  <-  microwave band-pass filter
//! ```
//!
//! Optical signals are complex baseband envelopes around the laser carrier;
//! electrical signals are real-valued waveforms in volts or amperes. The
//! [`oeo`] module iterates the loop block by block from a noise seed and
//! reports spectral purity per pass, [`awg`] synthesizes target waveforms by
//! masking a flat comb source, and [`signal`] carries the shared grid,
//! waveform and spectrum types.
//!
//! With the default `parallel` feature, per-sample block transforms run on
//! rayon; disabling it falls back to sequential loops with bit-identical
//! results.

// Validation rejects NaN through negated comparisons such as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod awg;
pub mod electrical;
pub mod error;
mod exec;
pub mod oeo;
pub mod photonic;
pub mod signal;

pub use error::{Error, Result};
