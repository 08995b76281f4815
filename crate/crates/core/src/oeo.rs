//! Closed-loop optoelectronic oscillator built from the photonic and
//! electrical blocks.
//!
//! One loop iteration walks the physical ring once: the drive voltage
//! modulates the laser, the light rides the fiber delay, the detector turns
//! it back into current, the band-pass filter selects the oscillation mode
//! and the saturating amplifier closes the loop. Iterating from a noise seed
//! reproduces the familiar startup: the filter mode with the highest loop
//! gain grows out of the noise until the amplifier pins its amplitude.
//!
//! Steady state requires the round-trip (Barkhausen) condition `|G beta| = 1`;
//! above unity small signals grow until saturation enforces it, below unity
//! the loop rings down. [`calibrate_gain`] finds the amplifier gain that sets
//! the small-signal round-trip magnitude to a chosen startup target.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::electrical::{amplify, bandpass_filter, noise_seed, AmpParams, BpfParams};
use crate::error::{Error, Result};
use crate::photonic::{
    cw_laser, fiber_propagate, mz_modulate, photodetect, FiberParams, MzmParams,
};
use crate::signal::{ElectricalWaveform, SamplingGrid, Unit, Window, DEFAULT_PURITY_GUARD_BINS};

/// Small-signal round-trip gain magnitude targeted when the amplifier gain
/// is left on automatic. Slightly above unity so oscillation starts quickly
/// while the limiter stays gentle enough to keep the drive clean.
pub const DEFAULT_LOOP_GAIN_TARGET: f64 = 1.2;

/// Laser source parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub power_dbm: f64,
    pub wavelength_nm: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        Self {
            power_dbm: 3.0,
            wavelength_nm: 1550.0,
        }
    }
}

/// Photodetector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub responsivity_a_per_w: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 0.9,
        }
    }
}

/// Loop amplifier configuration. With `gain: None` the gain is calibrated at
/// run time so the small-signal round trip hits [`DEFAULT_LOOP_GAIN_TARGET`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpConfig {
    pub gain: Option<f64>,
    pub saturation_v: f64,
}

impl Default for AmpConfig {
    fn default() -> Self {
        Self {
            gain: None,
            saturation_v: 3.0e-3,
        }
    }
}

/// Iteration control for the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub iterations: usize,
    /// RMS of the Gaussian voltage seed that starts the loop.
    pub seed_rms_v: f64,
    pub rng_seed: u64,
}

impl Default for LoopParams {
    fn default() -> Self {
        Self {
            iterations: 6,
            seed_rms_v: 1.5,
            rng_seed: 42,
        }
    }
}

/// Complete description of one oscillator chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub grid: SamplingGrid,
    pub laser: LaserParams,
    pub mzm: MzmParams,
    pub fiber: FiberParams,
    pub detector: DetectorParams,
    pub bpf: BpfParams,
    pub amp: AmpConfig,
    pub loop_params: LoopParams,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            grid: SamplingGrid::new(65.536e9, 1 << 18).expect("default grid is valid"),
            laser: LaserParams::default(),
            mzm: MzmParams::default(),
            fiber: FiberParams::default(),
            detector: DetectorParams::default(),
            bpf: BpfParams::default(),
            amp: AmpConfig::default(),
            loop_params: LoopParams::default(),
        }
    }
}

impl ChainConfig {
    /// Validates every block against the grid before a run.
    pub fn validate(&self) -> Result<()> {
        self.mzm.validate()?;
        self.fiber.validate()?;
        if !(self.detector.responsivity_a_per_w > 0.0)
            || !self.detector.responsivity_a_per_w.is_finite()
        {
            return Err(Error::InvalidParam {
                name: "detector.responsivity_a_per_w".into(),
                reason: format!(
                    "must be finite and positive, got {}",
                    self.detector.responsivity_a_per_w
                ),
            });
        }
        self.bpf.validate(self.grid)?;
        if !self.laser.power_dbm.is_finite() {
            return Err(Error::InvalidParam {
                name: "laser.power_dbm".into(),
                reason: "must be finite".into(),
            });
        }
        if !(self.laser.wavelength_nm > 0.0) {
            return Err(Error::InvalidParam {
                name: "laser.wavelength_nm".into(),
                reason: format!("must be positive, got {}", self.laser.wavelength_nm),
            });
        }
        if let Some(g) = self.amp.gain {
            AmpParams {
                gain: g,
                saturation_v: self.amp.saturation_v,
            }
            .validate()?;
        } else {
            AmpParams {
                gain: 1.0,
                saturation_v: self.amp.saturation_v,
            }
            .validate()?;
        }
        if self.loop_params.iterations == 0 {
            return Err(Error::InvalidParam {
                name: "loop.iterations".into(),
                reason: "must be at least 1".into(),
            });
        }
        if !(self.loop_params.seed_rms_v >= 0.0) || !self.loop_params.seed_rms_v.is_finite() {
            return Err(Error::InvalidParam {
                name: "loop.seed_rms_v".into(),
                reason: format!(
                    "must be finite and >= 0, got {}",
                    self.loop_params.seed_rms_v
                ),
            });
        }
        Ok(())
    }
}

/// Summary of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Strongest line of the final drive spectrum, 0.0 for a silent loop.
    pub fundamental_hz: f64,
    /// Resonator quality factor `2 pi f tau` at the measured fundamental.
    pub q_factor: f64,
    /// Small-signal round-trip gain magnitude at the filter center.
    pub loop_gain_mag: f64,
    /// True when the final drive is pure, its purity has settled and its
    /// amplitude is stationary between the last two iterations.
    pub converged: bool,
    pub purity_per_iteration: Vec<f64>,
    pub rms_per_iteration: Vec<f64>,
}

/// Full record of a run: the report plus every intermediate waveform.
#[derive(Debug, Clone)]
pub struct LoopOutcome {
    pub report: RunReport,
    /// Amplifier output (next loop drive) after each iteration, in volts.
    pub drives: Vec<ElectricalWaveform>,
    /// Raw detector current after each iteration, in amperes.
    pub detector_currents: Vec<ElectricalWaveform>,
}

/// Quality factor of a delay-line resonator, `2 pi f tau`.
pub fn q_factor(f_hz: f64, delay_s: f64) -> f64 {
    TAU * f_hz * delay_s
}

/// Purity threshold an oscillation must reach before the run counts as
/// converged.
pub const CONVERGENCE_PURITY_MIN: f64 = 0.99;
/// Largest allowed purity change between the final two iterations.
pub const CONVERGENCE_PURITY_SLOPE: f64 = 1e-3;
/// Largest allowed relative RMS change between the final two iterations.
pub const CONVERGENCE_RMS_SLOPE: f64 = 0.05;

struct Chain {
    light: crate::signal::OpticalEnvelope,
    mzm: MzmParams,
    fiber: FiberParams,
    detector: DetectorParams,
    bpf: BpfParams,
}

impl Chain {
    fn new(cfg: &ChainConfig) -> Result<Self> {
        Ok(Self {
            light: cw_laser(cfg.laser.power_dbm, cfg.laser.wavelength_nm, cfg.grid)?,
            mzm: cfg.mzm,
            fiber: cfg.fiber,
            detector: cfg.detector,
            bpf: cfg.bpf,
        })
    }

    /// One pass around the ring up to the filter output (before the
    /// amplifier), returning the filtered current and the raw detector
    /// current.
    fn half_round(
        &self,
        drive: &ElectricalWaveform,
    ) -> Result<(ElectricalWaveform, ElectricalWaveform)> {
        let modulated = mz_modulate(&self.light, drive, &self.mzm)?;
        let delayed = fiber_propagate(&modulated, &self.fiber)?;
        let current = photodetect(&delayed, self.detector.responsivity_a_per_w)?;
        let filtered = bandpass_filter(&current, &self.bpf)?;
        Ok((filtered, current))
    }
}

/// Complex ratio of the probe tone after one full round trip to the injected
/// probe, with the amplifier running at `gain`.
fn open_loop_ratio(cfg: &ChainConfig, gain: f64, f_hz: f64) -> Result<Complex64> {
    let grid = cfg.grid;
    let n = grid.n_samples();
    let k = grid.bin_of(f_hz);
    let probe_amp = 1e-4 * cfg.mzm.v_pi_v;
    let samples: Vec<f64> = (0..n)
        .map(|i| probe_amp * (TAU * ((k * i) % n) as f64 / n as f64).cos())
        .collect();
    let probe = ElectricalWaveform::new(grid, Unit::Volt, samples)?;
    let chain = Chain::new(cfg)?;
    let (filtered, _) = chain.half_round(&probe)?;
    let out = amplify(
        &filtered,
        &AmpParams {
            gain,
            saturation_v: cfg.amp.saturation_v,
        },
    )?;
    let s_in = probe.to_spectrum(Window::Rectangular);
    let s_out = out.to_spectrum(Window::Rectangular);
    if s_in.bins[k].norm() == 0.0 {
        return Err(Error::AllZeroSpectrum);
    }
    Ok(s_out.bins[k] / s_in.bins[k])
}

/// Finds the amplifier gain that puts the small-signal round-trip magnitude
/// at `target`. Solved iteratively because even a small probe sees a trace
/// of amplifier compression.
pub fn calibrate_gain(cfg: &ChainConfig, target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidParam {
            name: "loop_gain_target".into(),
            reason: format!("must be finite and positive, got {target}"),
        });
    }
    let f = cfg.bpf.center_hz;
    let mut gain = 1.0;
    let t0 = open_loop_ratio(cfg, gain, f)?.norm();
    if t0 == 0.0 {
        return Err(Error::UnreachableTarget { fraction: target });
    }
    gain = target / t0;
    for _ in 0..8 {
        let t = open_loop_ratio(cfg, gain, f)?.norm();
        if (t - target).abs() <= 1e-9 * target {
            break;
        }
        gain *= target / t;
    }
    Ok(gain)
}

/// Small-signal round-trip transfer at `f_hz` (snapped to the nearest bin)
/// with the configured or auto-calibrated amplifier gain. The frequency must
/// land on a positive bin below Nyquist.
pub fn loop_gain(cfg: &ChainConfig, f_hz: f64) -> Result<Complex64> {
    cfg.validate()?;
    let k = cfg.grid.bin_of(f_hz);
    let n = cfg.grid.n_samples();
    if k == 0 || k >= n / 2 || !(f_hz > 0.0) {
        return Err(Error::BadFrequency {
            f_hz,
            nyquist_hz: cfg.grid.nyquist_hz(),
        });
    }
    let gain = match cfg.amp.gain {
        Some(g) => g,
        None => calibrate_gain(cfg, DEFAULT_LOOP_GAIN_TARGET)?,
    };
    open_loop_ratio(cfg, gain, k as f64 * cfg.grid.frequency_resolution_hz())
}

/// Runs the closed loop from its noise seed and reports every iteration.
pub fn run_loop(cfg: &ChainConfig) -> Result<LoopOutcome> {
    cfg.validate()?;
    let gain = match cfg.amp.gain {
        Some(g) => g,
        None => calibrate_gain(cfg, DEFAULT_LOOP_GAIN_TARGET)?,
    };
    let amp = AmpParams {
        gain,
        saturation_v: cfg.amp.saturation_v,
    };
    let chain = Chain::new(cfg)?;
    let loop_gain_mag = open_loop_ratio(cfg, gain, cfg.bpf.center_hz)?.norm();

    let iterations = cfg.loop_params.iterations;
    let mut drive = noise_seed(
        cfg.grid,
        cfg.loop_params.seed_rms_v,
        cfg.loop_params.rng_seed,
    )?;
    let mut drives = Vec::with_capacity(iterations);
    let mut detector_currents = Vec::with_capacity(iterations);
    let mut purity = Vec::with_capacity(iterations);
    let mut rms = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let (filtered, current) = chain.half_round(&drive)?;
        drive = amplify(&filtered, &amp)?;
        let s = drive.to_spectrum(Window::Rectangular);
        let p = match s.spectral_purity(cfg.bpf.center_hz, DEFAULT_PURITY_GUARD_BINS) {
            Ok(p) => p,
            Err(Error::ZeroTotalPower) => 0.0,
            Err(e) => return Err(e),
        };
        purity.push(p);
        rms.push(drive.rms());
        detector_currents.push(current);
        drives.push(drive.clone());
    }

    let fundamental_hz = match drives[iterations - 1]
        .to_spectrum(Window::Rectangular)
        .fundamental_frequency()
    {
        Ok(f) => f,
        Err(Error::AllZeroSpectrum) => 0.0,
        Err(e) => return Err(e),
    };

    let converged = if iterations >= 2 {
        let p_last = purity[iterations - 1];
        let p_prev = purity[iterations - 2];
        let r_last = rms[iterations - 1];
        let r_prev = rms[iterations - 2];
        let stationary = r_prev > 0.0 && (r_last / r_prev - 1.0).abs() < CONVERGENCE_RMS_SLOPE;
        p_last >= CONVERGENCE_PURITY_MIN
            && (p_last - p_prev).abs() < CONVERGENCE_PURITY_SLOPE
            && stationary
    } else {
        false
    };

    let report = RunReport {
        fundamental_hz,
        q_factor: q_factor(fundamental_hz, cfg.fiber.delay_s()),
        loop_gain_mag,
        converged,
        purity_per_iteration: purity,
        rms_per_iteration: rms,
    };
    Ok(LoopOutcome {
        report,
        drives,
        detector_currents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_cfg() -> ChainConfig {
        ChainConfig {
            grid: SamplingGrid::new(65.536e9, 1 << 12).unwrap(),
            // One-bin passband at 10 GHz on this coarse grid.
            bpf: BpfParams {
                center_hz: 1.0e10,
                bandwidth_hz: 1.6e7,
                stop_atten_db: 80.0,
            },
            ..ChainConfig::default()
        }
    }

    #[test]
    fn q_factor_matches_the_delay_line_formula() {
        let q = q_factor(1.0e10, 1.0e4 / 3.0e8);
        assert_relative_eq!(q, 2.0943951023931955e6, max_relative = 1e-12);
        assert_relative_eq!(q, TAU * 1.0e10 * (1.0e4 / 3.0e8), max_relative = 1e-15);
    }

    #[test]
    fn loop_gain_rejects_off_grid_frequencies() {
        let cfg = small_cfg();
        assert!(matches!(
            loop_gain(&cfg, 0.0),
            Err(Error::BadFrequency { .. })
        ));
        assert!(matches!(
            loop_gain(&cfg, cfg.grid.nyquist_hz() + 1.0),
            Err(Error::BadFrequency { .. })
        ));
    }

    #[test]
    fn loop_gain_scales_linearly_in_the_small_signal_regime() {
        let mut cfg = small_cfg();
        cfg.amp.gain = Some(50.0);
        let t1 = loop_gain(&cfg, 1.0e10).unwrap().norm();
        cfg.amp.gain = Some(100.0);
        let t2 = loop_gain(&cfg, 1.0e10).unwrap().norm();
        assert_relative_eq!(t2 / t1, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn calibrated_gain_hits_the_requested_target() {
        let cfg = small_cfg();
        for target in [1.0, 1.2, 1.5] {
            let mut c = cfg;
            c.amp.gain = Some(calibrate_gain(&cfg, target).unwrap());
            let t = loop_gain(&c, 1.0e10).unwrap().norm();
            assert_relative_eq!(t, target, max_relative = 1e-6);
        }
    }

    #[test]
    fn run_reports_every_iteration() {
        let mut cfg = small_cfg();
        cfg.loop_params = LoopParams {
            iterations: 3,
            seed_rms_v: 0.5,
            rng_seed: 1,
        };
        let out = run_loop(&cfg).unwrap();
        assert_eq!(out.report.purity_per_iteration.len(), 3);
        assert_eq!(out.report.rms_per_iteration.len(), 3);
        assert_eq!(out.drives.len(), 3);
        assert_eq!(out.detector_currents.len(), 3);
        assert_eq!(out.drives[0].unit, Unit::Volt);
        assert_eq!(out.detector_currents[0].unit, Unit::Ampere);
        assert!(out.report.loop_gain_mag > 1.0);
    }

    #[test]
    fn single_iteration_never_counts_as_converged() {
        let mut cfg = small_cfg();
        cfg.loop_params = LoopParams {
            iterations: 1,
            seed_rms_v: 0.5,
            rng_seed: 1,
        };
        let out = run_loop(&cfg).unwrap();
        assert!(!out.report.converged);
    }

    #[test]
    fn zero_gain_silences_the_loop() {
        let mut cfg = small_cfg();
        cfg.amp.gain = Some(0.0);
        cfg.loop_params = LoopParams {
            iterations: 2,
            seed_rms_v: 0.5,
            rng_seed: 1,
        };
        let out = run_loop(&cfg).unwrap();
        assert_eq!(out.report.fundamental_hz, 0.0);
        assert_eq!(out.report.purity_per_iteration, vec![0.0, 0.0]);
        assert!(!out.report.converged);
    }

    #[test]
    fn validate_names_the_offending_field() {
        let mut cfg = small_cfg();
        cfg.fiber.length_km = -1.0;
        match cfg.validate() {
            Err(Error::InvalidParam { name, .. }) => assert_eq!(name, "fiber.length_km"),
            other => panic!("expected InvalidParam, got {other:?}"),
        }
    }
}
