//! Command-line front end for the exciter-chain simulator.
//!
//! Exit codes: 0 success, 2 parse/usage error, 3 validation error,
//! 4 loop did not converge (outputs still written), 5 I/O error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "photon-sim",
    version,
    about = "Optoelectronic oscillator and pulse-shaper simulator",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the closed oscillator loop and write per-iteration CSVs plus
    /// a run report.
    Run {
        /// Chain config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override one config value, e.g. --set fiber.length_km=25.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Re-run the loop once per value of one numeric parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Dotted config path to sweep, e.g. fiber.length_km.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Shape a flat comb source onto a target waveform read from CSV.
    Awg {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Target envelope CSV with header time_s,re,im and one row per
        /// grid sample.
        #[arg(long)]
        target: PathBuf,
    },
    /// Print the small-signal round-trip gain at one frequency.
    LoopGain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Probe frequency in Hz; defaults to the filter center.
        #[arg(long)]
        freq: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out, set } => commands::cmd_run(config, out, set),
        Command::Sweep {
            config,
            out,
            set,
            param,
            values,
        } => commands::cmd_sweep(config, out, set, param, values),
        Command::Awg {
            config,
            out,
            set,
            target,
        } => commands::cmd_awg(config, out, set, target),
        Command::LoopGain { config, set, freq } => commands::cmd_loop_gain(config, set, *freq),
    };
    if let Err(e) = result {
        eprintln!("photon-sim: {e}");
        std::process::exit(e.exit_code());
    }
}
