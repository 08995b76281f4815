//! Property tests for the invariants the blocks promise: energy bookkeeping,
//! transform linearity, mask algebra, passivity and exact scaling laws.

use num_complex::Complex64;
use proptest::prelude::*;

use photon_sim_core::awg::{apply_mask, SpectralMask};
use photon_sim_core::electrical::{amplify, AmpParams};
use photon_sim_core::oeo::q_factor;
use photon_sim_core::photonic::{filter_mask, mz_modulate, MzmParams, OpticalFilter};
use photon_sim_core::signal::{ElectricalWaveform, OpticalEnvelope, SamplingGrid, Unit, Window};

fn small_grid() -> impl Strategy<Value = SamplingGrid> {
    (
        prop_oneof![Just(256usize), Just(1024), Just(4096)],
        1e8..1e11f64,
    )
        .prop_map(|(n, rate)| SamplingGrid::new(rate, n).unwrap())
}

fn waveform(grid: SamplingGrid) -> impl Strategy<Value = ElectricalWaveform> {
    proptest::collection::vec(-10.0..10.0f64, grid.n_samples())
        .prop_map(move |samples| ElectricalWaveform::new(grid, Unit::Volt, samples).unwrap())
}

fn envelope(grid: SamplingGrid) -> impl Strategy<Value = OpticalEnvelope> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), grid.n_samples()).prop_map(
        move |pairs| {
            let samples = pairs
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            OpticalEnvelope::new(grid, 1550.0, samples).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds_for_random_waveforms(
        w in small_grid().prop_flat_map(waveform)
    ) {
        let time_energy: f64 = w.samples.iter().map(|x| x * x).sum();
        let s = w.to_spectrum(Window::Rectangular);
        let freq_energy: f64 =
            s.bins.iter().map(|b| b.norm_sqr()).sum::<f64>() / w.grid.n_samples() as f64;
        let scale = time_energy.max(1e-300);
        prop_assert!(
            ((time_energy - freq_energy) / scale).abs() < 1e-10,
            "time {time_energy} vs freq {freq_energy}"
        );
    }

    #[test]
    fn spectrum_is_linear(
        (a, b, pair) in (
            -3.0..3.0f64,
            -3.0..3.0f64,
            small_grid().prop_flat_map(|g| (waveform(g), waveform(g))),
        )
    ) {
        let (x, y) = pair;
        let grid = x.grid;
        let combined: Vec<f64> = x
            .samples
            .iter()
            .zip(&y.samples)
            .map(|(xi, yi)| a * xi + b * yi)
            .collect();
        let w = ElectricalWaveform::new(grid, Unit::Volt, combined).unwrap();
        let s_sum = w.to_spectrum(Window::Rectangular);
        let sx = x.to_spectrum(Window::Rectangular);
        let sy = y.to_spectrum(Window::Rectangular);
        let scale = s_sum.bins.iter().map(|v| v.norm()).fold(1e-12, f64::max);
        for k in 0..grid.n_samples() {
            let want = a * sx.bins[k] + b * sy.bins[k];
            prop_assert!(
                (s_sum.bins[k] - want).norm() <= 1e-9 * scale,
                "bin {k} differs"
            );
        }
    }

    #[test]
    fn purity_stays_in_unit_interval(
        w in small_grid().prop_flat_map(waveform),
        frac in 0.05..0.95f64,
        guard in 0usize..4,
    ) {
        let s = w.to_spectrum(Window::Rectangular);
        let f0 = frac * w.grid.nyquist_hz();
        match s.spectral_purity(f0, guard) {
            Ok(p) => prop_assert!((0.0..=1.0).contains(&p), "purity {p}"),
            Err(photon_sim_core::Error::ZeroTotalPower) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn complementary_masks_partition_all_bins(
        grid in small_grid(),
        frac in -1.0..1.0f64,
    ) {
        let cutoff = frac * grid.nyquist_hz();
        let sp = filter_mask(grid, &OpticalFilter::ShortPass { cutoff_hz: cutoff }).unwrap();
        let lp = filter_mask(grid, &OpticalFilter::LongPass { cutoff_hz: cutoff }).unwrap();
        for k in 0..grid.n_samples() {
            prop_assert!(sp[k] ^ lp[k], "bin {k} covered twice or not at all");
        }
    }

    #[test]
    fn band_pass_mask_is_the_composition(
        grid in small_grid(),
        lo_frac in -1.0..0.99f64,
        width in 0.01..0.5f64,
    ) {
        let ny = grid.nyquist_hz();
        let lo = lo_frac * ny;
        let hi = (lo_frac + width).min(1.0) * ny;
        prop_assume!(lo < hi);
        let bp = filter_mask(grid, &OpticalFilter::BandPass { low_hz: lo, high_hz: hi }).unwrap();
        let lp = filter_mask(grid, &OpticalFilter::LongPass { cutoff_hz: lo }).unwrap();
        let sp = filter_mask(grid, &OpticalFilter::ShortPass { cutoff_hz: hi }).unwrap();
        for k in 0..grid.n_samples() {
            prop_assert_eq!(bp[k], lp[k] && sp[k], "bin {}", k);
        }
    }

    #[test]
    fn passive_masks_never_add_energy(
        (light, gains) in small_grid().prop_flat_map(|g| {
            let n = g.n_samples();
            (envelope(g), proptest::collection::vec((0.0..1.0f64, -3.2..3.2f64), n))
        })
    ) {
        let grid = light.grid;
        let gains: Vec<Complex64> =
            gains.into_iter().map(|(m, ph)| Complex64::from_polar(m, ph)).collect();
        let mask = SpectralMask::new(grid, gains).unwrap();
        let out = apply_mask(&light, &mask).unwrap();
        let e_in = light.mean_power_w();
        let e_out = out.mean_power_w();
        prop_assert!(e_out <= e_in * (1.0 + 1e-12), "energy grew: {e_in} -> {e_out}");
    }

    #[test]
    fn q_factor_doubles_exactly_with_frequency(
        f in 0.0..1e12f64,
        tau in 0.0..1e-3f64,
    ) {
        prop_assert_eq!(q_factor(2.0 * f, tau), 2.0 * q_factor(f, tau));
        prop_assert_eq!(q_factor(f, 2.0 * tau), 2.0 * q_factor(f, tau));
    }

    #[test]
    fn amplifier_output_is_odd_and_bounded(
        w in small_grid().prop_flat_map(waveform),
        gain in 0.0..1e3f64,
        sat in 1e-4..10.0f64,
    ) {
        let params = AmpParams { gain, saturation_v: sat };
        let out = amplify(&w, &params).unwrap();
        let negated = ElectricalWaveform::new(
            w.grid,
            w.unit,
            w.samples.iter().map(|x| -x).collect(),
        )
        .unwrap();
        let out_neg = amplify(&negated, &params).unwrap();
        for k in 0..w.samples.len() {
            prop_assert!(out.samples[k].abs() <= sat);
            prop_assert_eq!(out.samples[k], -out_neg.samples[k]);
        }
    }

    #[test]
    fn modulator_never_amplifies_the_field(
        (light, drive) in small_grid().prop_flat_map(|g| (envelope(g), waveform(g)))
    ) {
        let out = mz_modulate(&light, &drive, &MzmParams::default()).unwrap();
        for k in 0..light.samples.len() {
            prop_assert!(out.samples[k].norm() <= light.samples[k].norm() * (1.0 + 1e-12));
        }
    }
}
