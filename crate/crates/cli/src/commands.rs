//! The four subcommands: closed-loop runs, parameter sweeps, comb shaping
//! and small-signal gain probes. All file outputs are written atomically
//! (temp file plus rename) so interrupted runs never leave half files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use photon_sim_core::awg::{apply_mask, broadband_source, design_mask};
use photon_sim_core::oeo::{
    calibrate_gain, loop_gain, run_loop, ChainConfig, RunReport, DEFAULT_LOOP_GAIN_TARGET,
};
use photon_sim_core::signal::{OpticalEnvelope, Window};

use crate::config::{apply_override, extract, load_config, FullConfig};
use crate::error::{CliError, Result};

/// Writes `content` to `path` atomically.
fn write_atomic(
    path: &Path,
    write_body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let file = fs::File::create(&tmp)?;
        let mut out = BufWriter::new(file);
        write_body(&mut out)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_time_csv(path: &Path, sample_rate_hz: f64, samples: &[f64]) -> Result<()> {
    write_atomic(path, |out| {
        writeln!(out, "time_s,value")?;
        for (i, v) in samples.iter().enumerate() {
            writeln!(out, "{},{}", i as f64 / sample_rate_hz, v)?;
        }
        Ok(())
    })
}

fn write_complex_time_csv(path: &Path, sample_rate_hz: f64, samples: &[Complex64]) -> Result<()> {
    write_atomic(path, |out| {
        writeln!(out, "time_s,re,im")?;
        for (i, v) in samples.iter().enumerate() {
            writeln!(out, "{},{},{}", i as f64 / sample_rate_hz, v.re, v.im)?;
        }
        Ok(())
    })
}

fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    write_atomic(path, |out| {
        writeln!(out, "fundamental_hz = {}", report.fundamental_hz)?;
        writeln!(out, "q_factor = {}", report.q_factor)?;
        writeln!(out, "loop_gain_mag = {}", report.loop_gain_mag)?;
        writeln!(out, "converged = {}", report.converged)?;
        for (i, p) in report.purity_per_iteration.iter().enumerate() {
            writeln!(out, "purity[{}] = {}", i + 1, p)?;
        }
        for (i, r) in report.rms_per_iteration.iter().enumerate() {
            writeln!(out, "rms_v[{}] = {}", i + 1, r)?;
        }
        Ok(())
    })
}

/// Runs the loop for `cfg` and writes the per-iteration artifacts plus
/// `report.txt` into `dir`.
fn run_to_dir(cfg: &ChainConfig, dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(dir)?;
    let outcome = run_loop(cfg)?;
    let fs_hz = cfg.grid.sample_rate_hz();
    for (i, drive) in outcome.drives.iter().enumerate() {
        let k = i + 1;
        write_time_csv(
            &dir.join(format!("iter{k}_time.csv")),
            fs_hz,
            &drive.samples,
        )?;
        let spectrum = drive.to_spectrum(Window::Rectangular);
        write_atomic(&dir.join(format!("iter{k}_spectrum.csv")), |out| {
            spectrum.write_csv(out)
        })?;
    }
    write_report(&dir.join("report.txt"), &outcome.report)?;
    Ok(outcome.report)
}

pub fn cmd_run(config: &Path, out_dir: &Path, overrides: &[String]) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let report = run_to_dir(&cfg.chain, out_dir)?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence)
    }
}

struct SweepRow {
    value: f64,
    report: RunReport,
}

fn sweep_threads(n_runs: usize) -> Result<usize> {
    let cap = match std::env::var("PHOTON_SIM_THREADS") {
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                return Err(CliError::Validation(format!(
                    "PHOTON_SIM_THREADS must be a positive integer, got '{raw}'"
                )))
            }
        },
        Err(_) => usize::MAX,
    };
    Ok(cap.min(n_runs.max(1)))
}

#[cfg(feature = "parallel")]
fn run_sweep_jobs(jobs: Vec<(f64, ChainConfig, PathBuf)>, threads: usize) -> Vec<Result<SweepRow>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("sweep thread pool");
    pool.install(|| {
        jobs.into_par_iter()
            .map(|(value, cfg, dir)| {
                let report = run_to_dir(&cfg, &dir)?;
                Ok(SweepRow { value, report })
            })
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_sweep_jobs(
    jobs: Vec<(f64, ChainConfig, PathBuf)>,
    _threads: usize,
) -> Vec<Result<SweepRow>> {
    jobs.into_iter()
        .map(|(value, cfg, dir)| {
            let report = run_to_dir(&cfg, &dir)?;
            Ok(SweepRow { value, report })
        })
        .collect()
}

pub fn cmd_sweep(
    config: &Path,
    out_dir: &Path,
    overrides: &[String],
    param: &str,
    values: &[String],
) -> Result<()> {
    let tokens: Vec<&str> = values
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(CliError::Validation(
            "sweep needs at least one value".into(),
        ));
    }
    if !param.contains('.') {
        return Err(CliError::Validation(format!(
            "sweep parameter '{param}' is not a section.key path"
        )));
    }

    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", config.display())))?;
    let mut base: toml::Table = text
        .parse()
        .map_err(|e| CliError::Parse(format!("config {}: {e}", config.display())))?;
    for item in overrides {
        apply_override(&mut base, item)?;
    }

    let mut jobs = Vec::with_capacity(tokens.len());
    for token in &tokens {
        let value: f64 = token
            .parse()
            .map_err(|_| CliError::Parse(format!("sweep value '{token}' is not a number")))?;
        let mut table = base.clone();
        apply_override(&mut table, &format!("{param}={token}"))?;
        let cfg = extract(&table)?;
        cfg.chain.validate()?;
        jobs.push((value, cfg.chain, out_dir.join(format!("{param}={token}"))));
    }

    fs::create_dir_all(out_dir)?;
    let threads = sweep_threads(jobs.len())?;
    let results = run_sweep_jobs(jobs, threads);

    let mut rows = Vec::with_capacity(results.len());
    let mut failure: Option<CliError> = None;
    let mut any_unconverged = false;
    for r in results {
        match r {
            Ok(row) => {
                any_unconverged |= !row.report.converged;
                rows.push(row);
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }

    write_atomic(&out_dir.join("sweep.csv"), |out| {
        writeln!(out, "value,fundamental_hz,q_factor,purity_final,converged")?;
        for row in &rows {
            let purity_final = row
                .report
                .purity_per_iteration
                .last()
                .copied()
                .unwrap_or(0.0);
            writeln!(
                out,
                "{},{},{},{},{}",
                row.value,
                row.report.fundamental_hz,
                row.report.q_factor,
                purity_final,
                row.report.converged
            )?;
        }
        Ok(())
    })?;

    if any_unconverged {
        Err(CliError::NonConvergence)
    } else {
        Ok(())
    }
}

fn read_target_csv(path: &Path, cfg: &FullConfig) -> Result<OpticalEnvelope> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Parse(format!("cannot read target {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "time_s,re,im" => {}
        Some(Ok(h)) => {
            return Err(CliError::Parse(format!(
                "target CSV must start with 'time_s,re,im', got '{h}'"
            )))
        }
        Some(Err(e)) => return Err(CliError::Io(e)),
        None => return Err(CliError::Parse("target CSV is empty".into())),
    }
    let mut samples = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| CliError::Parse(format!("target row {}: missing {name}", row + 2)))?
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("target row {}: bad {name}", row + 2)))
        };
        let _t = next("time_s")?;
        let re = next("re")?;
        let im = next("im")?;
        samples.push(Complex64::new(re, im));
    }
    let n = cfg.chain.grid.n_samples();
    if samples.len() != n {
        return Err(CliError::Validation(format!(
            "target has {} samples but the grid needs {n}",
            samples.len()
        )));
    }
    Ok(OpticalEnvelope::new(
        cfg.chain.grid,
        cfg.chain.laser.wavelength_nm,
        samples,
    )?)
}

pub fn cmd_awg(config: &Path, out_dir: &Path, overrides: &[String], target: &Path) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let target_env = read_target_csv(target, &cfg)?;
    let grid = cfg.chain.grid;
    let source = broadband_source(
        grid,
        cfg.awg.total_power_w,
        cfg.awg.n_lines,
        cfg.awg.line_spacing_hz,
    )?;
    let design = design_mask(&target_env, &source, cfg.awg.clip)?;
    let shaped = apply_mask(&source, &design.mask)?;

    let mut err_energy = 0.0f64;
    let mut ref_energy = 0.0f64;
    for (got, want) in shaped.samples.iter().zip(&target_env.samples) {
        let scaled = want * design.rescale;
        err_energy += (got - scaled).norm_sqr();
        ref_energy += scaled.norm_sqr();
    }
    let rms_error_rel = (err_energy / ref_energy).sqrt();

    fs::create_dir_all(out_dir)?;
    write_complex_time_csv(
        &out_dir.join("awg_time.csv"),
        grid.sample_rate_hz(),
        &shaped.samples,
    )?;

    let n = grid.n_samples();
    write_atomic(&out_dir.join("awg_mask.csv"), |out| {
        writeln!(out, "freq_hz,gain_mag,gain_phase_rad")?;
        let ordered = (n / 2 + 1..n).chain(0..=n / 2);
        for k in ordered {
            let g = design.mask.gains()[k];
            writeln!(out, "{},{},{}", grid.bin_frequency_hz(k), g.norm(), g.arg())?;
        }
        Ok(())
    })?;

    write_atomic(&out_dir.join("awg_report.txt"), |out| {
        writeln!(out, "rescale = {}", design.rescale)?;
        writeln!(out, "rms_error_rel = {}", rms_error_rel)?;
        writeln!(out, "n_lines = {}", cfg.awg.n_lines)?;
        writeln!(out, "line_spacing_hz = {}", cfg.awg.line_spacing_hz)?;
        writeln!(out, "total_power_w = {}", cfg.awg.total_power_w)?;
        Ok(())
    })?;
    Ok(())
}

pub fn cmd_loop_gain(config: &Path, overrides: &[String], freq: Option<f64>) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let mut chain = cfg.chain;
    let gain = match chain.amp.gain {
        Some(g) => g,
        None => calibrate_gain(&chain, DEFAULT_LOOP_GAIN_TARGET)?,
    };
    chain.amp.gain = Some(gain);
    let f = freq.unwrap_or(chain.bpf.center_hz);
    let t = loop_gain(&chain, f)?;
    println!("f_hz = {f}");
    println!("loop_gain_mag = {}", t.norm());
    println!("loop_gain_phase_rad = {}", t.arg());
    println!("gain = {gain}");
    Ok(())
}
