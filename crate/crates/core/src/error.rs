//! Error type shared by all simulation blocks.

use thiserror::Error;

use crate::signal::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: String, reason: String },

    /// Two signals that must share a sampling grid do not.
    #[error("sampling grids do not match: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    /// A waveform carries the wrong electrical unit for the operation.
    #[error("expected a waveform in {expected}, got {actual}")]
    UnitMismatch { expected: Unit, actual: Unit },

    /// No spectral component above DC is nonzero.
    #[error("spectrum is zero everywhere above DC")]
    AllZeroSpectrum,

    /// A purity ratio was requested on a waveform with no power above DC.
    #[error("waveform has zero total power above DC")]
    ZeroTotalPower,

    /// An optical filter cutoff is out of range or reversed.
    #[error("bad filter cutoff: {0}")]
    BadCutoff(String),

    /// A band-pass passband does not fit between DC and Nyquist.
    #[error("bad passband: {0}")]
    BadPassband(String),

    /// A probe or analysis frequency lies outside the resolvable band.
    #[error("frequency {f_hz} Hz is outside (0, {nyquist_hz}) Hz")]
    BadFrequency { f_hz: f64, nyquist_hz: f64 },

    /// A requested comb does not fit within the Nyquist band.
    #[error("comb does not fit the grid: {0}")]
    CombOverflow(String),

    /// A synthesis target has energy where the source has none.
    #[error("target has {fraction:.3e} of its energy outside the source support")]
    UnreachableTarget { fraction: f64 },
}
