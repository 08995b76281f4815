//! Sampling grids, time-domain waveforms and their discrete spectra.
//!
//! All blocks in the crate exchange signals defined on a shared
//! [`SamplingGrid`]: a window of `n_samples` points taken at `sample_rate_hz`.
//! Grid lengths are restricted to powers of two so the whole chain stays on
//! exact FFT sizes, and analysis tones are expected to sit on bin centers
//! (`k * frequency_resolution_hz`), which keeps spectral leakage at the
//! rounding floor.
//!
//! ```
//! use photon_sim_core::signal::{SamplingGrid, ElectricalWaveform, Unit, Window};
//!
//! let grid = SamplingGrid::new(1.024e9, 4096).unwrap();
//! let f = 40.0 * grid.frequency_resolution_hz();
//! let tone: Vec<f64> = (0..grid.n_samples())
//!     .map(|n| (std::f64::consts::TAU * f * n as f64 / grid.sample_rate_hz()).cos())
//!     .collect();
//! let w = ElectricalWaveform::new(grid, Unit::Volt, tone).unwrap();
//! let spectrum = w.to_spectrum(Window::Rectangular);
//! assert_eq!(spectrum.fundamental_frequency().unwrap(), f);
//! ```

use std::fmt;
use std::io::{self, Write};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec;

/// Guard half-width, in bins, used by default when scoring spectral purity.
/// One bin on each side of the carrier absorbs rounding leakage.
pub const DEFAULT_PURITY_GUARD_BINS: usize = 1;

/// Additive floor inside the log when converting bin power to dB, so empty
/// bins render as a deep finite floor instead of -inf.
pub const POWER_DB_EPSILON: f64 = 1e-30;

/// Uniform sampling window shared by every signal in a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    sample_rate_hz: f64,
    n_samples: usize,
}

impl SamplingGrid {
    /// Builds a grid, requiring a positive rate and a power-of-two length of
    /// at least 2.
    pub fn new(sample_rate_hz: f64, n_samples: usize) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidParam {
                name: "grid.sample_rate_hz".into(),
                reason: format!("must be finite and positive, got {sample_rate_hz}"),
            });
        }
        if n_samples < 2 || !n_samples.is_power_of_two() {
            return Err(Error::InvalidParam {
                name: "grid.n_samples".into(),
                reason: format!("must be a power of two >= 2, got {n_samples}"),
            });
        }
        Ok(Self {
            sample_rate_hz,
            n_samples,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Bin spacing of the discrete spectrum.
    pub fn frequency_resolution_hz(&self) -> f64 {
        self.sample_rate_hz / self.n_samples as f64
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    /// Duration of the simulated window.
    pub fn window_duration_s(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate_hz
    }

    /// Index of the bin whose center is nearest to `f_hz`.
    pub fn bin_of(&self, f_hz: f64) -> usize {
        (f_hz / self.frequency_resolution_hz()).round() as usize
    }

    /// Signed baseband frequency of bin `k` in FFT order: bins up to `n/2`
    /// map to non-negative frequencies, the rest wrap to negative ones.
    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        let n = self.n_samples;
        let df = self.frequency_resolution_hz();
        if k <= n / 2 {
            k as f64 * df
        } else {
            (k as f64 - n as f64) * df
        }
    }
}

impl fmt::Display for SamplingGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} samples @ {} Hz", self.n_samples, self.sample_rate_hz)
    }
}

/// Physical unit of a real-valued electrical waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Volt,
    Ampere,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Volt => write!(f, "volt"),
            Unit::Ampere => write!(f, "ampere"),
        }
    }
}

/// Analysis window applied before the DFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// No taper; exact for tones on bin centers and the only window under
    /// which the Parseval check is meaningful.
    #[default]
    Rectangular,
    /// Symmetric Hann taper for off-bin content.
    Hann,
}

/// Real-valued electrical signal on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricalWaveform {
    pub grid: SamplingGrid,
    pub unit: Unit,
    pub samples: Vec<f64>,
}

impl ElectricalWaveform {
    pub fn new(grid: SamplingGrid, unit: Unit, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(Error::InvalidParam {
                name: "samples".into(),
                reason: format!(
                    "expected {} samples, got {}",
                    grid.n_samples(),
                    samples.len()
                ),
            });
        }
        Ok(Self {
            grid,
            unit,
            samples,
        })
    }

    pub fn zeros(grid: SamplingGrid, unit: Unit) -> Self {
        Self {
            grid,
            unit,
            samples: vec![0.0; grid.n_samples()],
        }
    }

    /// Root-mean-square value over the window.
    pub fn rms(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|x| x * x).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    /// Unnormalized DFT of the (optionally windowed) waveform.
    pub fn to_spectrum(&self, window: Window) -> Spectrum {
        let mut buf = exec::map_collect(&self.samples, |&x| Complex64::new(x, 0.0));
        apply_window(&mut buf, window);
        fft_in_place(&mut buf);
        Spectrum {
            grid: self.grid,
            window,
            bins: buf,
        }
    }
}

/// Complex baseband envelope of an optical field, in sqrt(W), referenced to
/// the carrier at `carrier_wavelength_nm`. Bin `k` of its spectrum is the
/// component offset by `k * frequency_resolution_hz` from the carrier
/// (negative offsets wrap into the upper half, FFT order).
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalEnvelope {
    pub grid: SamplingGrid,
    pub carrier_wavelength_nm: f64,
    /// Group delay accumulated by propagation blocks, kept as metadata for
    /// resonator quality-factor bookkeeping.
    pub accumulated_delay_s: f64,
    pub samples: Vec<Complex64>,
}

impl OpticalEnvelope {
    pub fn new(
        grid: SamplingGrid,
        carrier_wavelength_nm: f64,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(Error::InvalidParam {
                name: "samples".into(),
                reason: format!(
                    "expected {} samples, got {}",
                    grid.n_samples(),
                    samples.len()
                ),
            });
        }
        Ok(Self {
            grid,
            carrier_wavelength_nm,
            accumulated_delay_s: 0.0,
            samples,
        })
    }

    /// Mean optical power over the window, in watts.
    pub fn mean_power_w(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|a| a.norm_sqr()).sum();
        sum / self.samples.len() as f64
    }

    pub fn to_spectrum(&self, window: Window) -> Spectrum {
        let mut buf = self.samples.clone();
        apply_window(&mut buf, window);
        fft_in_place(&mut buf);
        Spectrum {
            grid: self.grid,
            window,
            bins: buf,
        }
    }
}

/// Unnormalized DFT bins of a waveform or envelope.
///
/// With the rectangular window the Parseval identity holds in the form
/// `sum |bins|^2 / n == sum |samples|^2` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: SamplingGrid,
    pub window: Window,
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    /// Power of bin `k`, `|X_k|^2`.
    pub fn bin_power(&self, k: usize) -> f64 {
        self.bins[k].norm_sqr()
    }

    /// Frequency of the strongest component between DC and Nyquist
    /// (bins `1..=n/2-1`), ties resolved toward the lowest bin.
    pub fn fundamental_frequency(&self) -> Result<f64> {
        let n = self.grid.n_samples();
        let mut best_k = 0usize;
        let mut best_p = 0.0f64;
        for k in 1..n / 2 {
            let p = self.bins[k].norm_sqr();
            if p > best_p {
                best_p = p;
                best_k = k;
            }
        }
        if best_p == 0.0 {
            return Err(Error::AllZeroSpectrum);
        }
        Ok(best_k as f64 * self.grid.frequency_resolution_hz())
    }

    /// Fraction of the above-DC power concentrated within `guard_bins` of the
    /// bin nearest `f0_hz`.
    ///
    /// Both numerator and denominator run over the positive-frequency half
    /// (bins `1..=n/2-1`), so a single tone on a bin scores exactly 1.0.
    pub fn spectral_purity(&self, f0_hz: f64, guard_bins: usize) -> Result<f64> {
        let n = self.grid.n_samples();
        if !(f0_hz > 0.0) || f0_hz >= self.grid.nyquist_hz() {
            return Err(Error::BadFrequency {
                f_hz: f0_hz,
                nyquist_hz: self.grid.nyquist_hz(),
            });
        }
        let k0 = self.grid.bin_of(f0_hz);
        let mut total = 0.0f64;
        for k in 1..n / 2 {
            total += self.bins[k].norm_sqr();
        }
        if total == 0.0 {
            return Err(Error::ZeroTotalPower);
        }
        let lo = k0.saturating_sub(guard_bins).max(1);
        let hi = (k0 + guard_bins).min(n / 2 - 1);
        let mut guarded = 0.0f64;
        for k in lo..=hi {
            guarded += self.bins[k].norm_sqr();
        }
        Ok(guarded / total)
    }

    /// Writes the one-sided power spectrum as CSV with header
    /// `freq_hz,power_db`, one row per bin from DC through Nyquist,
    /// `power_db = 10 log10(|X_k|^2 / n + 1e-30)`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let n = self.grid.n_samples();
        let df = self.grid.frequency_resolution_hz();
        writeln!(out, "freq_hz,power_db")?;
        for k in 0..=n / 2 {
            let p = self.bins[k].norm_sqr() / n as f64 + POWER_DB_EPSILON;
            writeln!(out, "{},{}", k as f64 * df, 10.0 * p.log10())?;
        }
        Ok(())
    }
}

fn apply_window(buf: &mut [Complex64], window: Window) {
    match window {
        Window::Rectangular => {}
        Window::Hann => {
            let m = (buf.len() - 1) as f64;
            exec::map_indexed_mut(buf, |k, x| {
                *x *= 0.5 * (1.0 - (std::f64::consts::TAU * k as f64 / m).cos());
            });
        }
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Forward DFT in place, unnormalized.
pub(crate) fn fft_in_place(buf: &mut [Complex64]) {
    let fft = planner().lock().unwrap().plan_fft_forward(buf.len());
    fft.process(buf);
}

/// Inverse DFT in place, including the 1/n normalization.
pub(crate) fn ifft_in_place(buf: &mut [Complex64]) {
    let fft = planner().lock().unwrap().plan_fft_inverse(buf.len());
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    exec::map_mut(buf, |x| *x *= scale);
}
