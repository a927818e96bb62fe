//! Flat `key = value` configuration with dotted keys.
//!
//! Sources are applied in order: defaults, config file, `COCASA_*`
//! environment variables, then explicit overrides.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::Denominator;
use crate::pipeline::PipelineConfig;
use crate::scalar::Real;

pub const ENV_PREFIX: &str = "COCASA_";

/// Every recognised key, in the order [`to_text`] writes them.
pub const KEYS: &[&str] = &[
    "filterbank.channels",
    "filterbank.cf_min_hz",
    "filterbank.cf_max_hz",
    "hair_cell.a",
    "hair_cell.b",
    "hair_cell.g",
    "hair_cell.y",
    "hair_cell.l",
    "hair_cell.r",
    "hair_cell.x",
    "hair_cell.m",
    "hair_cell.h",
    "hair_cell.input_gain",
    "envelope.cutoff_hz",
    "frame.shift_ms",
    "frame.len_ms",
    "pitch.min_hz",
    "pitch.max_hz",
    "tracker.beta",
    "tracker.sigma",
    "tracker.self_bonus",
    "tracker.floor",
    "tracker.octave_cost",
    "tracker.exclusion_ratio",
    "tracker.lag_stride",
    "enrich.lag_threshold",
    "enrich.octave_cost",
    "refine.min_run",
    "harmonic.frame_len_ms",
    "harmonic.max_freq_hz",
    "harmonic.band_width_hz",
    "harmonic.peak_ratio",
    "harmonic.neighbor_tol_hz",
    "harmonic.order_ratio",
    "harmonic.subharmonics",
    "harmonic.match_tol_hz",
    "harmonic.zero_pad",
    "harmonic.floor_db",
    "label.ah_threshold",
    "label.ae_threshold",
    "label.type1_cf_cutoff_hz",
    "segregate.group_unlabeled",
    "eval.voicing_threshold",
    "eval.strict",
];

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

/// Set one key from its textual value.
pub fn set<T: Real>(cfg: &mut PipelineConfig<T>, key: &str, value: &str) -> Result<()> {
    let real = |v: &str| -> Result<T> {
        let x: f64 = parse(key, v)?;
        if !x.is_finite() {
            return Err(Error::Config(format!("{key}: value must be finite")));
        }
        Ok(T::lit(x))
    };
    let p = &mut cfg.peripheral;
    match key {
        "filterbank.channels" => p.filterbank.n_channels = parse(key, value)?,
        "filterbank.cf_min_hz" => p.filterbank.cf_min = real(value)?,
        "filterbank.cf_max_hz" => p.filterbank.cf_max = real(value)?,
        "hair_cell.a" => p.hair_cell.a = real(value)?,
        "hair_cell.b" => p.hair_cell.b = real(value)?,
        "hair_cell.g" => p.hair_cell.g = real(value)?,
        "hair_cell.y" => p.hair_cell.y = real(value)?,
        "hair_cell.l" => p.hair_cell.l = real(value)?,
        "hair_cell.r" => p.hair_cell.r = real(value)?,
        "hair_cell.x" => p.hair_cell.x = real(value)?,
        "hair_cell.m" => p.hair_cell.m = real(value)?,
        "hair_cell.h" => p.hair_cell.h = real(value)?,
        "hair_cell.input_gain" => p.hair_cell.input_gain = real(value)?,
        "envelope.cutoff_hz" => p.envelope.cutoff_hz = real(value)?,
        "frame.shift_ms" => p.frame.frame_shift_ms = real(value)?,
        "frame.len_ms" => p.frame.frame_len_ms = real(value)?,
        "pitch.min_hz" => cfg.pitch_min_hz = real(value)?,
        "pitch.max_hz" => cfg.pitch_max_hz = real(value)?,
        "tracker.beta" => cfg.tracker.beta = real(value)?,
        "tracker.sigma" => cfg.tracker.sigma = real(value)?,
        "tracker.self_bonus" => cfg.tracker.self_bonus = real(value)?,
        "tracker.floor" => cfg.tracker.floor = real(value)?,
        "tracker.octave_cost" => cfg.tracker.octave_cost = real(value)?,
        "tracker.exclusion_ratio" => cfg.tracker.exclusion_ratio = real(value)?,
        "tracker.lag_stride" => cfg.tracker.lag_stride = parse(key, value)?,
        "enrich.lag_threshold" => cfg.enrichment.lag_threshold = parse(key, value)?,
        "enrich.octave_cost" => cfg.enrichment.octave_cost = real(value)?,
        "refine.min_run" => cfg.min_run = parse(key, value)?,
        "harmonic.frame_len_ms" => cfg.harmonic.frame_len_ms = real(value)?,
        "harmonic.max_freq_hz" => cfg.harmonic.max_freq = real(value)?,
        "harmonic.band_width_hz" => cfg.harmonic.band_width = real(value)?,
        "harmonic.peak_ratio" => cfg.harmonic.peak_ratio = real(value)?,
        "harmonic.neighbor_tol_hz" => cfg.harmonic.neighbor_tol = real(value)?,
        "harmonic.order_ratio" => cfg.harmonic.order_ratio = real(value)?,
        "harmonic.subharmonics" => {
            cfg.harmonic.subharmonics = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse(key, s))
                .collect::<Result<_>>()?
        }
        "harmonic.match_tol_hz" => cfg.harmonic.harmonic_match_tol = real(value)?,
        "harmonic.zero_pad" => cfg.harmonic.zero_pad = parse(key, value)?,
        "harmonic.floor_db" => cfg.harmonic.floor_db = real(value)?,
        "label.ah_threshold" => cfg.label.ah_threshold = real(value)?,
        "label.ae_threshold" => cfg.label.ae_threshold = real(value)?,
        "label.type1_cf_cutoff_hz" => cfg.label.type1_cf_cutoff = real(value)?,
        "segregate.group_unlabeled" => cfg.group_unlabeled = parse_bool(key, value)?,
        "eval.voicing_threshold" => cfg.voicing_threshold = real(value)?,
        "eval.strict" => {
            cfg.denominator = if parse_bool(key, value)? { Denominator::Strict } else { Denominator::Voiced }
        }
        _ => return Err(Error::Config(format!("unknown key {key:?}"))),
    }
    Ok(())
}

/// Current value of one key, formatted as [`set`] accepts it.
pub fn get<T: Real>(cfg: &PipelineConfig<T>, key: &str) -> Result<String> {
    let p = &cfg.peripheral;
    let r = |x: T| format!("{}", x.as_f64());
    Ok(match key {
        "filterbank.channels" => p.filterbank.n_channels.to_string(),
        "filterbank.cf_min_hz" => r(p.filterbank.cf_min),
        "filterbank.cf_max_hz" => r(p.filterbank.cf_max),
        "hair_cell.a" => r(p.hair_cell.a),
        "hair_cell.b" => r(p.hair_cell.b),
        "hair_cell.g" => r(p.hair_cell.g),
        "hair_cell.y" => r(p.hair_cell.y),
        "hair_cell.l" => r(p.hair_cell.l),
        "hair_cell.r" => r(p.hair_cell.r),
        "hair_cell.x" => r(p.hair_cell.x),
        "hair_cell.m" => r(p.hair_cell.m),
        "hair_cell.h" => r(p.hair_cell.h),
        "hair_cell.input_gain" => r(p.hair_cell.input_gain),
        "envelope.cutoff_hz" => r(p.envelope.cutoff_hz),
        "frame.shift_ms" => r(p.frame.frame_shift_ms),
        "frame.len_ms" => r(p.frame.frame_len_ms),
        "pitch.min_hz" => r(cfg.pitch_min_hz),
        "pitch.max_hz" => r(cfg.pitch_max_hz),
        "tracker.beta" => r(cfg.tracker.beta),
        "tracker.sigma" => r(cfg.tracker.sigma),
        "tracker.self_bonus" => r(cfg.tracker.self_bonus),
        "tracker.floor" => r(cfg.tracker.floor),
        "tracker.octave_cost" => r(cfg.tracker.octave_cost),
        "tracker.exclusion_ratio" => r(cfg.tracker.exclusion_ratio),
        "tracker.lag_stride" => cfg.tracker.lag_stride.to_string(),
        "enrich.lag_threshold" => cfg.enrichment.lag_threshold.to_string(),
        "enrich.octave_cost" => r(cfg.enrichment.octave_cost),
        "refine.min_run" => cfg.min_run.to_string(),
        "harmonic.frame_len_ms" => r(cfg.harmonic.frame_len_ms),
        "harmonic.max_freq_hz" => r(cfg.harmonic.max_freq),
        "harmonic.band_width_hz" => r(cfg.harmonic.band_width),
        "harmonic.peak_ratio" => r(cfg.harmonic.peak_ratio),
        "harmonic.neighbor_tol_hz" => r(cfg.harmonic.neighbor_tol),
        "harmonic.order_ratio" => r(cfg.harmonic.order_ratio),
        "harmonic.subharmonics" => cfg.harmonic.subharmonics.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        "harmonic.match_tol_hz" => r(cfg.harmonic.harmonic_match_tol),
        "harmonic.zero_pad" => cfg.harmonic.zero_pad.to_string(),
        "harmonic.floor_db" => r(cfg.harmonic.floor_db),
        "label.ah_threshold" => r(cfg.label.ah_threshold),
        "label.ae_threshold" => r(cfg.label.ae_threshold),
        "label.type1_cf_cutoff_hz" => r(cfg.label.type1_cf_cutoff),
        "segregate.group_unlabeled" => cfg.group_unlabeled.to_string(),
        "eval.voicing_threshold" => r(cfg.voicing_threshold),
        "eval.strict" => (cfg.denominator == Denominator::Strict).to_string(),
        _ => return Err(Error::Config(format!("unknown key {key:?}"))),
    })
}

/// Apply every `key = value` line of `text`. `#` starts a comment.
pub fn apply_text<T: Real>(cfg: &mut PipelineConfig<T>, text: &str) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", n + 1)));
        };
        set(cfg, k.trim(), v.trim()).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
    }
    Ok(())
}

/// Environment variable name for a dotted key.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_ascii_uppercase())
}

/// Apply `COCASA_*` variables from `vars`; unknown names under the prefix are rejected.
pub fn apply_env<T: Real>(cfg: &mut PipelineConfig<T>, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    for (name, value) in vars {
        let Some(_) = name.strip_prefix(ENV_PREFIX) else { continue };
        match KEYS.iter().find(|k| env_name(k) == name) {
            Some(k) => set(cfg, k, &value)?,
            None => return Err(Error::Config(format!("unknown environment variable {name}"))),
        }
    }
    Ok(())
}

/// Defaults, then `file`, then the process environment, then `overrides` (`key=value`).
pub fn load<T: Real>(file: Option<&Path>, overrides: &[String]) -> Result<PipelineConfig<T>> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        apply_text(&mut cfg, &text)?;
    }
    let mut env: Vec<(String, String)> = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    env.sort();
    apply_env(&mut cfg, env)?;
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
        set(&mut cfg, k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Every key with its current value, one `key = value` line each.
pub fn to_text<T: Real>(cfg: &PipelineConfig<T>) -> String {
    KEYS.iter().map(|k| format!("{k} = {}\n", get(cfg, k).expect("listed key"))).collect()
}
