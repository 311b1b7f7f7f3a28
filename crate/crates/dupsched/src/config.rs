//! Run configuration.
//!
//! Values come from defaults, then an optional flat `key = value` file, then
//! command-line flags. The master seed may also be set through
//! `DUPSCHED_SEED`, which sits between the file and the flags.

use std::path::{Path, PathBuf};

use dupsched_core::engine::{EngineConfig, GammaRule};
use dupsched_core::sketch::SketchParams;
use thiserror::Error;

pub const SEED_ENV: &str = "DUPSCHED_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value for {key}: {value:?}")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub machines: u32,
    pub rho: u64,
    /// Fixed gamma; overrides `gamma_rule` when set.
    pub gamma: Option<f64>,
    pub gamma_rule: GammaRule,
    pub stale_constant: f64,
    pub sketch: SketchParams,
    pub max_reseeds: u32,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub bench_repetitions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let engine = EngineConfig::new(1, 2);
        Self {
            machines: 1,
            rho: 2,
            gamma: None,
            gamma_rule: engine.gamma,
            stale_constant: engine.stale_constant,
            sketch: engine.sketch,
            max_reseeds: engine.max_reseeds,
            seed: 0,
            input: None,
            output: None,
            log: None,
            bench_repetitions: 3,
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { line, key: key.into(), value: value.into() })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Applies `key = value` lines on top of the current values. `#` starts
    /// a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError::Syntax { line, reason: format!("expected key = value, got {body:?}") })?;
            self.set(line, key, value)?;
        }
        Ok(())
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "machines" => self.machines = parse_value(line, key, value)?,
            "rho" => self.rho = parse_value(line, key, value)?,
            "gamma" => self.gamma = Some(parse_value(line, key, value)?),
            "gamma_rule" => {
                self.gamma_rule = match value {
                    "inv_sqrt_ln_rho" => GammaRule::InverseSqrtLnRho,
                    "inv_sqrt_rho" => GammaRule::InverseSqrtRho,
                    _ => return Err(ConfigError::BadValue { line, key: key.into(), value: value.into() }),
                }
            }
            "stale_constant" => self.stale_constant = parse_value(line, key, value)?,
            "max_reseeds" => self.max_reseeds = parse_value(line, key, value)?,
            "seed" | "sketch.master_seed" => self.seed = parse_value(line, key, value)?,
            "sketch.epsilon" => self.sketch.epsilon = parse_value(line, key, value)?,
            "sketch.c" => self.sketch.c = parse_value(line, key, value)?,
            "sketch.d" => self.sketch.failure_exponent = parse_value(line, key, value)?,
            "sketch.r_override" => self.sketch.trials = Some(parse_value(line, key, value)?),
            "input" => self.input = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "log" => self.log = Some(value.into()),
            "bench.repetitions" => self.bench_repetitions = parse_value(line, key, value)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
        Ok(())
    }

    pub fn engine(&self) -> Result<EngineConfig, ConfigError> {
        let config = EngineConfig {
            machines: self.machines,
            rho: self.rho,
            gamma: self.gamma.map_or(self.gamma_rule, GammaRule::Fixed),
            stale_constant: self.stale_constant,
            sketch: self.sketch,
            max_reseeds: self.max_reseeds,
        };
        config.check().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_once_machines_and_rho_are_set() {
        let c = RunConfig { machines: 4, rho: 16, ..RunConfig::default() };
        let e = c.engine().unwrap();
        assert_eq!(e.gamma, GammaRule::InverseSqrtLnRho);
        assert_eq!(e.sketch, SketchParams::default());
    }

    #[test]
    fn file_values_apply() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nmachines = 3\nrho=8  # trailing\n\nsketch.epsilon = 0.25\nsketch.r_override = 5\ngamma = 0.1\nseed = 99\n")
            .unwrap();
        assert_eq!((c.machines, c.rho, c.seed), (3, 8, 99));
        assert_eq!(c.sketch.epsilon, 0.25);
        assert_eq!(c.sketch.trials, Some(5));
        assert_eq!(c.engine().unwrap().gamma, GammaRule::Fixed(0.1));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("colour = red"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(c.apply_text("\nrho = two"), Err(ConfigError::BadValue { line: 2, .. })));
        assert!(matches!(c.apply_text("rho"), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn invalid_parameters_are_reported() {
        let mut c = RunConfig { rho: 1, ..RunConfig::default() };
        assert!(c.engine().is_err());
        c.rho = 4;
        c.gamma = Some(0.3);
        assert!(c.engine().is_err());
    }
}
