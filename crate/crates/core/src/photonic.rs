//! Optical blocks: CW laser, Mach-Zehnder modulator, fiber delay line,
//! photodetector and ideal optical filters.
//!
//! The modulator uses the field transfer of a single-drive Mach-Zehnder,
//! `E_out = E_in cos(pi (v_bias + v) / (2 v_pi))`, so the detected intensity
//! follows the familiar raised-cosine characteristic. Biased at quadrature
//! (`v_bias = v_pi / 2`) the intensity response is odd around the operating
//! point and even-order distortion cancels.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::exec;
use crate::signal::{ifft_in_place, ElectricalWaveform, OpticalEnvelope, SamplingGrid, Unit};

/// Mach-Zehnder modulator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzmParams {
    /// Half-wave voltage.
    pub v_pi_v: f64,
    /// DC bias; `v_pi / 2` is the quadrature point.
    pub v_bias_v: f64,
    pub insertion_loss_db: f64,
}

impl Default for MzmParams {
    fn default() -> Self {
        Self {
            v_pi_v: 5.0,
            v_bias_v: 2.5,
            insertion_loss_db: 0.0,
        }
    }
}

impl MzmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi_v > 0.0) || !self.v_pi_v.is_finite() {
            return Err(Error::InvalidParam {
                name: "mzm.v_pi_v".into(),
                reason: format!("must be finite and positive, got {}", self.v_pi_v),
            });
        }
        if !self.v_bias_v.is_finite() {
            return Err(Error::InvalidParam {
                name: "mzm.v_bias_v".into(),
                reason: "must be finite".into(),
            });
        }
        if !(self.insertion_loss_db >= 0.0) {
            return Err(Error::InvalidParam {
                name: "mzm.insertion_loss_db".into(),
                reason: format!("must be >= 0, got {}", self.insertion_loss_db),
            });
        }
        Ok(())
    }
}

/// Single-mode fiber span acting as the loop delay element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    /// Group index used for the delay; 1.0 keeps delays on round numbers.
    pub group_index: f64,
    pub light_speed_m_per_s: f64,
}

impl FiberParams {
    pub fn new(length_km: f64, attenuation_db_per_km: f64) -> Self {
        Self {
            length_km,
            attenuation_db_per_km,
            group_index: 1.0,
            light_speed_m_per_s: 3.0e8,
        }
    }

    /// Same span with the group index and light speed of real silica fiber.
    pub fn physical(length_km: f64, attenuation_db_per_km: f64) -> Self {
        Self {
            length_km,
            attenuation_db_per_km,
            group_index: 1.468,
            light_speed_m_per_s: 2.99792458e8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_km >= 0.0) || !self.length_km.is_finite() {
            return Err(Error::InvalidParam {
                name: "fiber.length_km".into(),
                reason: format!("must be finite and >= 0, got {}", self.length_km),
            });
        }
        if !(self.attenuation_db_per_km >= 0.0) {
            return Err(Error::InvalidParam {
                name: "fiber.attenuation_db_per_km".into(),
                reason: format!("must be >= 0, got {}", self.attenuation_db_per_km),
            });
        }
        if !(self.group_index >= 1.0) {
            return Err(Error::InvalidParam {
                name: "fiber.group_index".into(),
                reason: format!("must be >= 1, got {}", self.group_index),
            });
        }
        if !(self.light_speed_m_per_s > 0.0) {
            return Err(Error::InvalidParam {
                name: "fiber.light_speed_m_per_s".into(),
                reason: format!("must be positive, got {}", self.light_speed_m_per_s),
            });
        }
        Ok(())
    }

    /// Group delay of the span.
    pub fn delay_s(&self) -> f64 {
        self.length_km * 1e3 * self.group_index / self.light_speed_m_per_s
    }

    /// Field amplitude ratio after the span, `10^(-att L / 20)`.
    pub fn amplitude_ratio(&self) -> f64 {
        10f64.powf(-self.attenuation_db_per_km * self.length_km / 20.0)
    }
}

impl Default for FiberParams {
    fn default() -> Self {
        Self::new(10.0, 0.2)
    }
}

/// Ideal brick-wall filters on the optical envelope, specified as offsets
/// from the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalFilter {
    /// Keeps offsets at or below the cutoff.
    ShortPass { cutoff_hz: f64 },
    /// Keeps offsets strictly above the cutoff.
    LongPass { cutoff_hz: f64 },
    /// Keeps offsets in `(low_hz, high_hz]`; equals a long-pass at `low_hz`
    /// composed with a short-pass at `high_hz`.
    BandPass { low_hz: f64, high_hz: f64 },
}

/// Continuous-wave laser: a flat envelope carrying `power_dbm` of optical
/// power, zero phase.
pub fn cw_laser(power_dbm: f64, wavelength_nm: f64, grid: SamplingGrid) -> Result<OpticalEnvelope> {
    if !power_dbm.is_finite() {
        return Err(Error::InvalidParam {
            name: "laser.power_dbm".into(),
            reason: "must be finite".into(),
        });
    }
    if !(wavelength_nm > 0.0) {
        return Err(Error::InvalidParam {
            name: "laser.wavelength_nm".into(),
            reason: format!("must be positive, got {wavelength_nm}"),
        });
    }
    let power_w = 1e-3 * 10f64.powf(power_dbm / 10.0);
    let amp = Complex64::new(power_w.sqrt(), 0.0);
    let samples = vec![amp; grid.n_samples()];
    OpticalEnvelope::new(grid, wavelength_nm, samples)
}

/// Drives a Mach-Zehnder modulator with an electrical waveform.
pub fn mz_modulate(
    light: &OpticalEnvelope,
    drive: &ElectricalWaveform,
    params: &MzmParams,
) -> Result<OpticalEnvelope> {
    params.validate()?;
    if light.grid != drive.grid {
        return Err(Error::GridMismatch {
            left: light.grid.to_string(),
            right: drive.grid.to_string(),
        });
    }
    if drive.unit != Unit::Volt {
        return Err(Error::UnitMismatch {
            expected: Unit::Volt,
            actual: drive.unit,
        });
    }
    let loss = 10f64.powf(-params.insertion_loss_db / 20.0);
    let half_pi_over_vpi = FRAC_PI_2 / params.v_pi_v;
    let samples = exec::zip_map(&light.samples, &drive.samples, |a, &v| {
        a * (loss * (half_pi_over_vpi * (params.v_bias_v + v)).cos())
    });
    let mut out = OpticalEnvelope::new(light.grid, light.carrier_wavelength_nm, samples)?;
    out.accumulated_delay_s = light.accumulated_delay_s;
    Ok(out)
}

/// Propagates an envelope along a fiber span: uniform attenuation plus a
/// circular shift by the group delay (the window is treated as one period of
/// a recirculating signal).
pub fn fiber_propagate(light: &OpticalEnvelope, params: &FiberParams) -> Result<OpticalEnvelope> {
    params.validate()?;
    let ratio = params.amplitude_ratio();
    let mut samples = exec::map_collect(&light.samples, |a| a * ratio);
    let delay = params.delay_s();
    let n = light.grid.n_samples();
    let shift = ((delay % light.grid.window_duration_s()) * light.grid.sample_rate_hz()).round()
        as usize
        % n;
    samples.rotate_right(shift);
    let mut out = OpticalEnvelope::new(light.grid, light.carrier_wavelength_nm, samples)?;
    out.accumulated_delay_s = light.accumulated_delay_s + delay;
    Ok(out)
}

/// Square-law photodetector: current `R |a|^2`, in amperes.
pub fn photodetect(
    light: &OpticalEnvelope,
    responsivity_a_per_w: f64,
) -> Result<ElectricalWaveform> {
    if !(responsivity_a_per_w > 0.0) || !responsivity_a_per_w.is_finite() {
        return Err(Error::InvalidParam {
            name: "detector.responsivity_a_per_w".into(),
            reason: format!("must be finite and positive, got {responsivity_a_per_w}"),
        });
    }
    let samples = exec::map_collect(&light.samples, |a| responsivity_a_per_w * a.norm_sqr());
    ElectricalWaveform::new(light.grid, Unit::Ampere, samples)
}

/// Keep/drop decision for every spectrum bin under `filter`, in FFT bin
/// order. Exposed so mask algebra can be tested without transforms.
pub fn filter_mask(grid: SamplingGrid, filter: &OpticalFilter) -> Result<Vec<bool>> {
    let ny = grid.nyquist_hz();
    let check = |name: &str, c: f64| -> Result<()> {
        if !c.is_finite() || c < -ny || c > ny {
            return Err(Error::BadCutoff(format!(
                "{name} must lie within [-{ny}, {ny}] Hz, got {c}"
            )));
        }
        Ok(())
    };
    match filter {
        OpticalFilter::ShortPass { cutoff_hz } => check("cutoff_hz", *cutoff_hz)?,
        OpticalFilter::LongPass { cutoff_hz } => check("cutoff_hz", *cutoff_hz)?,
        OpticalFilter::BandPass { low_hz, high_hz } => {
            check("low_hz", *low_hz)?;
            check("high_hz", *high_hz)?;
            if low_hz >= high_hz {
                return Err(Error::BadCutoff(format!(
                    "band edges must satisfy low < high, got {low_hz} >= {high_hz}"
                )));
            }
        }
    }
    let n = grid.n_samples();
    let mask = (0..n)
        .map(|k| {
            let f = grid.bin_frequency_hz(k);
            match filter {
                OpticalFilter::ShortPass { cutoff_hz } => f <= *cutoff_hz,
                OpticalFilter::LongPass { cutoff_hz } => f > *cutoff_hz,
                OpticalFilter::BandPass { low_hz, high_hz } => f > *low_hz && f <= *high_hz,
            }
        })
        .collect();
    Ok(mask)
}

/// Applies an ideal optical filter to the envelope spectrum.
pub fn optical_filter(light: &OpticalEnvelope, filter: &OpticalFilter) -> Result<OpticalEnvelope> {
    let mask = filter_mask(light.grid, filter)?;
    let mut bins = light.samples.clone();
    crate::signal::fft_in_place(&mut bins);
    exec::map_indexed_mut(&mut bins, |k, b| {
        if !mask[k] {
            *b = Complex64::new(0.0, 0.0);
        }
    });
    ifft_in_place(&mut bins);
    let mut out = OpticalEnvelope::new(light.grid, light.carrier_wavelength_nm, bins)?;
    out.accumulated_delay_s = light.accumulated_delay_s;
    Ok(out)
}
