//! Fourier-domain pulse shaping: a flat optical frequency comb is carved by
//! a complex spectral mask so the output envelope matches a requested
//! waveform.
//!
//! The shaper is passive, so every mask gain is capped at unit magnitude.
//! [`design_mask`] therefore rescales the whole target so its largest
//! required gain sits exactly at 1; the reported `rescale` factor lets the
//! caller recover absolute units.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::signal::{fft_in_place, ifft_in_place, OpticalEnvelope, SamplingGrid};

/// Per-bin complex gains of a passive spectral shaper.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMask {
    grid: SamplingGrid,
    gains: Vec<Complex64>,
}

impl SpectralMask {
    /// Builds a mask, requiring one gain per bin and passive magnitudes
    /// (at most 1, with a hair of rounding headroom).
    pub fn new(grid: SamplingGrid, gains: Vec<Complex64>) -> Result<Self> {
        if gains.len() != grid.n_samples() {
            return Err(Error::InvalidParam {
                name: "mask.gains".into(),
                reason: format!("expected {} gains, got {}", grid.n_samples(), gains.len()),
            });
        }
        for (k, g) in gains.iter().enumerate() {
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(Error::InvalidParam {
                    name: "mask.gains".into(),
                    reason: format!("gain {k} is not finite"),
                });
            }
            if g.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidParam {
                    name: "mask.gains".into(),
                    reason: format!("gain {k} has magnitude {} > 1", g.norm()),
                });
            }
        }
        Ok(Self { grid, gains })
    }

    pub fn grid(&self) -> SamplingGrid {
        self.grid
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }
}

/// A designed mask plus the scale factor that was applied to the target.
/// The synthesized envelope approximates `rescale * target`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskDesign {
    pub mask: SpectralMask,
    pub rescale: f64,
}

/// Flat comb of `n_lines` equal-power lines centered on the carrier, spaced
/// `line_spacing_hz` apart, total power `total_power_w`, all lines in phase.
/// Line offsets are `(i - n_lines/2) * line_spacing_hz`, which must land on
/// exact grid bins inside Nyquist.
pub fn broadband_source(
    grid: SamplingGrid,
    total_power_w: f64,
    n_lines: usize,
    line_spacing_hz: f64,
) -> Result<OpticalEnvelope> {
    if !(total_power_w > 0.0) || !total_power_w.is_finite() {
        return Err(Error::InvalidParam {
            name: "awg.total_power_w".into(),
            reason: format!("must be finite and positive, got {total_power_w}"),
        });
    }
    if n_lines == 0 {
        return Err(Error::InvalidParam {
            name: "awg.n_lines".into(),
            reason: "must be at least 1".into(),
        });
    }
    let df = grid.frequency_resolution_hz();
    let steps = line_spacing_hz / df;
    if !(line_spacing_hz > 0.0) || (steps - steps.round()).abs() > 1e-9 * steps.abs().max(1.0) {
        return Err(Error::InvalidParam {
            name: "awg.line_spacing_hz".into(),
            reason: format!(
                "must be a positive multiple of the {df} Hz bin spacing, got {line_spacing_hz}"
            ),
        });
    }
    let steps = steps.round() as i64;
    let half = (n_lines / 2) as i64;
    let max_offset_bins = (0..n_lines as i64)
        .map(|i| (i - half) * steps)
        .map(i64::abs)
        .max()
        .unwrap();
    let n = grid.n_samples() as i64;
    if max_offset_bins >= n / 2 {
        return Err(Error::CombOverflow(format!(
            "line at {} Hz reaches the Nyquist offset {} Hz",
            max_offset_bins as f64 * df,
            grid.nyquist_hz()
        )));
    }
    let line_amp = (total_power_w / n_lines as f64).sqrt();
    let line_bins: Vec<u64> = (0..n_lines as i64)
        .map(|i| ((i - half) * steps).rem_euclid(n) as u64)
        .collect();
    // Summed directly with angles reduced modulo n in integer arithmetic, so
    // the envelope repeats bit-exactly at the comb period.
    let n_u = grid.n_samples() as u64;
    let indices: Vec<usize> = (0..grid.n_samples()).collect();
    let samples = exec::map_collect(&indices, |&i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &k in &line_bins {
            let angle = std::f64::consts::TAU * ((k * i as u64) % n_u) as f64 / n_u as f64;
            acc += Complex64::new(angle.cos(), angle.sin());
        }
        acc * line_amp
    });
    OpticalEnvelope::new(grid, 1550.0, samples)
}

/// Designs the passive mask that reshapes `source` into `target` (up to the
/// returned rescale).
///
/// Bins where the source is weaker than `clip` (default `1e-6` of its peak
/// bin) are unusable and get zero gain; if the target keeps more than a
/// millionth of its energy on such bins the design is refused.
pub fn design_mask(
    target: &OpticalEnvelope,
    source: &OpticalEnvelope,
    clip: Option<f64>,
) -> Result<MaskDesign> {
    if target.grid != source.grid {
        return Err(Error::GridMismatch {
            left: target.grid.to_string(),
            right: source.grid.to_string(),
        });
    }
    let mut s = source.samples.clone();
    fft_in_place(&mut s);
    let mut t = target.samples.clone();
    fft_in_place(&mut t);

    let s_peak = s.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if s_peak == 0.0 {
        return Err(Error::AllZeroSpectrum);
    }
    let clip = match clip {
        Some(c) => {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::InvalidParam {
                    name: "awg.clip".into(),
                    reason: format!("must be finite and >= 0, got {c}"),
                });
            }
            c
        }
        None => 1e-6 * s_peak,
    };

    let mut target_energy = 0.0f64;
    let mut lost_energy = 0.0f64;
    for (sk, tk) in s.iter().zip(&t) {
        let e = tk.norm_sqr();
        target_energy += e;
        if sk.norm() <= clip {
            lost_energy += e;
        }
    }
    if target_energy == 0.0 {
        return Err(Error::InvalidParam {
            name: "awg.target".into(),
            reason: "target waveform carries no energy".into(),
        });
    }
    let lost_fraction = lost_energy / target_energy;
    if lost_fraction > 1e-6 {
        return Err(Error::UnreachableTarget {
            fraction: lost_fraction,
        });
    }

    let mut raw: Vec<Complex64> = s
        .iter()
        .zip(&t)
        .map(|(sk, tk)| {
            if sk.norm() <= clip {
                Complex64::new(0.0, 0.0)
            } else {
                tk / sk
            }
        })
        .collect();
    let g_max = raw.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if g_max == 0.0 {
        return Err(Error::InvalidParam {
            name: "awg.target".into(),
            reason: "target has no energy on usable source bins".into(),
        });
    }
    let rescale = 1.0 / g_max;
    exec::map_mut(&mut raw, |g| *g *= rescale);
    for g in raw.iter_mut() {
        let m = g.norm();
        if m > 1.0 {
            *g /= m;
        }
    }
    Ok(MaskDesign {
        mask: SpectralMask::new(target.grid, raw)?,
        rescale,
    })
}

/// Runs an envelope through the shaper.
pub fn apply_mask(light: &OpticalEnvelope, mask: &SpectralMask) -> Result<OpticalEnvelope> {
    if light.grid != mask.grid {
        return Err(Error::GridMismatch {
            left: light.grid.to_string(),
            right: mask.grid.to_string(),
        });
    }
    let mut bins = light.samples.clone();
    fft_in_place(&mut bins);
    let gains = &mask.gains;
    exec::map_indexed_mut(&mut bins, |k, b| *b *= gains[k]);
    ifft_in_place(&mut bins);
    let mut out = OpticalEnvelope::new(light.grid, light.carrier_wavelength_nm, bins)?;
    out.accumulated_delay_s = light.accumulated_delay_s;
    Ok(out)
}
