//! Config file handling: INI-style sections of `key = value` pairs with
//! documented defaults, strict unknown-key rejection, and dotted-path
//! overrides from the command line.

use std::path::Path;

use photon_sim_core::oeo::ChainConfig;
use photon_sim_core::signal::SamplingGrid;

use crate::error::{CliError, Result};

/// Pulse-shaper settings, read from the `[awg]` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgSettings {
    pub n_lines: usize,
    pub line_spacing_hz: f64,
    pub total_power_w: f64,
    /// Source bins weaker than this amplitude are treated as empty;
    /// `None` uses one millionth of the strongest bin.
    pub clip: Option<f64>,
}

impl Default for AwgSettings {
    fn default() -> Self {
        Self {
            n_lines: 64,
            line_spacing_hz: 1.0e8,
            total_power_w: 1.0e-3,
            clip: None,
        }
    }
}

/// Everything a command needs: the chain description plus shaper settings.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FullConfig {
    pub chain: ChainConfig,
    pub awg: AwgSettings,
}

/// Loads a config file, applies `--set` overrides, and validates the result.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<FullConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Parse(format!("config {}: {e}", path.display())))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let cfg = extract(&table)?;
    cfg.chain.validate()?;
    Ok(cfg)
}

/// Applies one `section.key=value` override onto the raw config table.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("override '{item}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| CliError::Parse(format!("override key '{key}' is not section.key")))?;
    let value: toml::Value = {
        let snippet: toml::Table = format!("x = {raw}")
            .parse()
            .map_err(|_| CliError::Parse(format!("override value '{raw}' is not a number")))?;
        snippet["x"].clone()
    };
    if !matches!(value, toml::Value::Integer(_) | toml::Value::Float(_)) {
        return Err(CliError::Parse(format!(
            "override value '{raw}' is not a number"
        )));
    }
    let section_tbl = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match section_tbl {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(CliError::Parse(format!(
            "config section '{section}' is not a table"
        ))),
    }
}

fn as_f64(section: &str, key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Validation(format!(
            "{section}.{key} must be a number"
        ))),
    }
}

fn as_count(section: &str, key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::Float(x) if x.fract() == 0.0 && *x >= 0.0 => Ok(*x as usize),
        _ => Err(CliError::Validation(format!(
            "{section}.{key} must be a non-negative integer"
        ))),
    }
}

fn as_seed(section: &str, key: &str, v: &toml::Value) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        toml::Value::Float(x) if x.fract() == 0.0 && *x >= 0.0 => Ok(*x as u64),
        _ => Err(CliError::Validation(format!(
            "{section}.{key} must be a non-negative integer"
        ))),
    }
}

/// Builds a config from a parsed table, starting from defaults and rejecting
/// any key the schema does not know.
pub fn extract(table: &toml::Table) -> Result<FullConfig> {
    let mut cfg = FullConfig::default();
    let mut grid_rate = cfg.chain.grid.sample_rate_hz();
    let mut grid_n = cfg.chain.grid.n_samples();

    for (section, value) in table {
        let tbl = match value {
            toml::Value::Table(t) => t,
            _ => {
                return Err(CliError::Validation(format!(
                    "'{section}' must be a [section] of key = value pairs"
                )))
            }
        };
        for (key, v) in tbl {
            let s = section.as_str();
            match (s, key.as_str()) {
                ("grid", "sample_rate_hz") => grid_rate = as_f64(s, key, v)?,
                ("grid", "n_samples") => grid_n = as_count(s, key, v)?,
                ("laser", "power_dbm") => cfg.chain.laser.power_dbm = as_f64(s, key, v)?,
                ("laser", "wavelength_nm") => cfg.chain.laser.wavelength_nm = as_f64(s, key, v)?,
                ("mzm", "v_pi_v") => cfg.chain.mzm.v_pi_v = as_f64(s, key, v)?,
                ("mzm", "v_bias_v") => cfg.chain.mzm.v_bias_v = as_f64(s, key, v)?,
                ("mzm", "insertion_loss_db") => {
                    cfg.chain.mzm.insertion_loss_db = as_f64(s, key, v)?
                }
                ("fiber", "length_km") => cfg.chain.fiber.length_km = as_f64(s, key, v)?,
                ("fiber", "attenuation_db_per_km") => {
                    cfg.chain.fiber.attenuation_db_per_km = as_f64(s, key, v)?
                }
                ("fiber", "group_index") => cfg.chain.fiber.group_index = as_f64(s, key, v)?,
                ("fiber", "light_speed_m_per_s") => {
                    cfg.chain.fiber.light_speed_m_per_s = as_f64(s, key, v)?
                }
                ("detector", "responsivity_a_per_w") => {
                    cfg.chain.detector.responsivity_a_per_w = as_f64(s, key, v)?
                }
                ("bpf", "center_hz") => cfg.chain.bpf.center_hz = as_f64(s, key, v)?,
                ("bpf", "bandwidth_hz") => cfg.chain.bpf.bandwidth_hz = as_f64(s, key, v)?,
                ("bpf", "stop_atten_db") => cfg.chain.bpf.stop_atten_db = as_f64(s, key, v)?,
                ("amp", "gain") => cfg.chain.amp.gain = Some(as_f64(s, key, v)?),
                ("amp", "saturation_v") => cfg.chain.amp.saturation_v = as_f64(s, key, v)?,
                ("loop", "iterations") => cfg.chain.loop_params.iterations = as_count(s, key, v)?,
                ("loop", "seed_rms_v") => cfg.chain.loop_params.seed_rms_v = as_f64(s, key, v)?,
                ("loop", "rng_seed") => cfg.chain.loop_params.rng_seed = as_seed(s, key, v)?,
                ("awg", "n_lines") => cfg.awg.n_lines = as_count(s, key, v)?,
                ("awg", "line_spacing_hz") => cfg.awg.line_spacing_hz = as_f64(s, key, v)?,
                ("awg", "total_power_w") => cfg.awg.total_power_w = as_f64(s, key, v)?,
                ("awg", "clip") => cfg.awg.clip = Some(as_f64(s, key, v)?),
                _ => {
                    return Err(CliError::Validation(format!(
                        "unknown config key {s}.{key}"
                    )));
                }
            }
        }
    }

    cfg.chain.grid = SamplingGrid::new(grid_rate, grid_n)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FullConfig> {
        let table: toml::Table = text.parse().expect("test config is valid syntax");
        let cfg = extract(&table)?;
        cfg.chain.validate()?;
        Ok(cfg)
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, FullConfig::default());
        assert_eq!(cfg.chain.grid.n_samples(), 1 << 18);
        assert_eq!(cfg.chain.mzm.v_pi_v, 5.0);
        assert_eq!(cfg.chain.loop_params.iterations, 6);
    }

    #[test]
    fn partial_config_fills_the_rest() {
        let cfg = parse("[fiber]\nlength_km = 10\n\n[laser]\npower_dbm = 3\n").unwrap();
        assert_eq!(cfg.chain.fiber.length_km, 10.0);
        assert_eq!(cfg.chain.laser.power_dbm, 3.0);
        assert_eq!(cfg.chain.mzm.v_pi_v, 5.0);
        assert_eq!(cfg.chain.bpf.center_hz, 1.0e10);
        assert_eq!(cfg.chain.loop_params.iterations, 6);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse("[fiber]\nlenght_km = 10\n").unwrap_err();
        match err {
            CliError::Validation(msg) => assert!(msg.contains("fiber.lenght_km"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
        let err = parse("[fibre]\nlength_km = 10\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn invalid_values_are_named() {
        let err = parse("[fiber]\nlength_km = -1\n").unwrap_err();
        match err {
            CliError::Validation(msg) => assert!(msg.contains("fiber.length_km"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn overrides_take_effect() {
        let mut table: toml::Table = "[fiber]\nlength_km = 10\n".parse().unwrap();
        apply_override(&mut table, "fiber.length_km=25").unwrap();
        apply_override(&mut table, "amp.gain = 0").unwrap();
        let cfg = extract(&table).unwrap();
        assert_eq!(cfg.chain.fiber.length_km, 25.0);
        assert_eq!(cfg.chain.amp.gain, Some(0.0));
    }

    #[test]
    fn malformed_overrides_are_parse_errors() {
        let mut table = toml::Table::new();
        assert!(matches!(
            apply_override(&mut table, "fiber.length_km"),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            apply_override(&mut table, "length_km=10"),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            apply_override(&mut table, "fiber.length_km=ten"),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn gain_defaults_to_auto() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.chain.amp.gain, None);
        let cfg = parse("[amp]\ngain = 1200.0\n").unwrap();
        assert_eq!(cfg.chain.amp.gain, Some(1200.0));
    }
}
