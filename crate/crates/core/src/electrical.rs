//! Electrical blocks: zero-phase band-pass filter, saturating amplifier and
//! the Gaussian noise seed that starts an oscillation.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::exec;
use crate::signal::{fft_in_place, ifft_in_place, ElectricalWaveform, SamplingGrid, Unit};

/// Band-pass filter parameters. The response is unity across
/// `center +- bandwidth/2`, rolls off over one further half-bandwidth with a
/// raised-cosine flank, and floors at `-stop_atten_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpfParams {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub stop_atten_db: f64,
}

impl Default for BpfParams {
    fn default() -> Self {
        Self {
            center_hz: 1.0e10,
            bandwidth_hz: 2.5e5,
            stop_atten_db: 80.0,
        }
    }
}

impl BpfParams {
    pub fn validate(&self, grid: SamplingGrid) -> Result<()> {
        if !self.center_hz.is_finite() || !self.bandwidth_hz.is_finite() {
            return Err(Error::BadPassband(
                "center and bandwidth must be finite".into(),
            ));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::BadPassband(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        let lo = self.center_hz - self.bandwidth_hz / 2.0;
        let hi = self.center_hz + self.bandwidth_hz / 2.0;
        if !(lo > 0.0) || !(hi < grid.nyquist_hz()) {
            return Err(Error::BadPassband(format!(
                "passband [{lo}, {hi}] Hz must lie strictly inside (0, {}) Hz",
                grid.nyquist_hz()
            )));
        }
        if !(self.stop_atten_db > 0.0) || !self.stop_atten_db.is_finite() {
            return Err(Error::BadPassband(format!(
                "stopband attenuation must be positive, got {} dB",
                self.stop_atten_db
            )));
        }
        Ok(())
    }
}

/// Saturating amplifier parameters. A gain of zero is allowed and simply
/// kills the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpParams {
    pub gain: f64,
    pub saturation_v: f64,
}

impl AmpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(Error::InvalidParam {
                name: "amp.gain".into(),
                reason: format!("must be finite and >= 0, got {}", self.gain),
            });
        }
        if !(self.saturation_v > 0.0) || !self.saturation_v.is_finite() {
            return Err(Error::InvalidParam {
                name: "amp.saturation_v".into(),
                reason: format!("must be finite and positive, got {}", self.saturation_v),
            });
        }
        Ok(())
    }
}

/// Amplitude response of the band-pass mask at the absolute frequency
/// `f_abs_hz`. Unity over the flat top, raised-cosine flank down to the
/// stopband floor `10^(-stop/20)`.
pub fn mask_amplitude(params: &BpfParams, f_abs_hz: f64) -> f64 {
    let floor = 10f64.powf(-params.stop_atten_db / 20.0);
    let half_bw = params.bandwidth_hz / 2.0;
    let d = (f_abs_hz - params.center_hz).abs();
    if d <= half_bw {
        1.0
    } else if d < params.bandwidth_hz {
        let x = (d - half_bw) / half_bw;
        floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * x).cos())
    } else {
        floor
    }
}

/// Zero-phase band-pass filter. The mask is real and applied symmetrically
/// to positive and negative frequencies, so a real input stays real and no
/// group delay is introduced. The DC bin is removed outright, which models
/// the AC coupling of a microwave filter port.
pub fn bandpass_filter(
    input: &ElectricalWaveform,
    params: &BpfParams,
) -> Result<ElectricalWaveform> {
    params.validate(input.grid)?;
    let grid = input.grid;
    let p = *params;
    let mut bins = exec::map_collect(&input.samples, |&x| Complex64::new(x, 0.0));
    fft_in_place(&mut bins);
    exec::map_indexed_mut(&mut bins, |k, b| {
        if k == 0 {
            *b = Complex64::new(0.0, 0.0);
        } else {
            *b *= mask_amplitude(&p, grid.bin_frequency_hz(k).abs());
        }
    });
    ifft_in_place(&mut bins);
    let samples = exec::map_collect(&bins, |b| b.re);
    ElectricalWaveform::new(grid, input.unit, samples)
}

/// Memoryless saturating amplifier, `v_out = V_sat tanh(g v / V_sat)`.
/// Output is always in volts regardless of the input unit, standing in for
/// the transimpedance stage after the detector.
pub fn amplify(input: &ElectricalWaveform, params: &AmpParams) -> Result<ElectricalWaveform> {
    params.validate()?;
    let sat = params.saturation_v;
    let g = params.gain;
    let samples = exec::map_collect(&input.samples, |&x| sat * (g * x / sat).tanh());
    ElectricalWaveform::new(input.grid, Unit::Volt, samples)
}

/// Deterministic Gaussian noise seed used to start the loop. The same
/// `rng_seed` always yields the same waveform. A zero RMS gives silence.
pub fn noise_seed(grid: SamplingGrid, rms_v: f64, rng_seed: u64) -> Result<ElectricalWaveform> {
    if !(rms_v >= 0.0) || !rms_v.is_finite() {
        return Err(Error::InvalidParam {
            name: "loop.seed_rms_v".into(),
            reason: format!("must be finite and >= 0, got {rms_v}"),
        });
    }
    if rms_v == 0.0 {
        return Ok(ElectricalWaveform::zeros(grid, Unit::Volt));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let normal = Normal::new(0.0, rms_v).expect("finite positive std dev");
    let samples = (0..grid.n_samples())
        .map(|_| normal.sample(&mut rng))
        .collect();
    ElectricalWaveform::new(grid, Unit::Volt, samples)
}
