//! Service configuration.
//!
//! Values come from three layers, highest precedence first: environment
//! variables, the TOML config file, built-in defaults.
//!
//! | key                      | env var                       | default            |
//! |--------------------------|-------------------------------|--------------------|
//! | `network`                | `ALTROUTE_NETWORK`            | `network.bin`      |
//! | `listen`                 | `ALTROUTE_LISTEN`             | `127.0.0.1:8080`   |
//! | `store`                  | `ALTROUTE_STORE`              | `ratings.jsonl`    |
//! | `city`                   | `ALTROUTE_CITY`               | `default`          |
//! | `static_dir`             | `ALTROUTE_STATIC_DIR`         | none               |
//! | `provider_fixtures`      | `ALTROUTE_PROVIDER_FIXTURES`  | none               |
//! | `cache_ttl_secs`         | `ALTROUTE_CACHE_TTL_SECS`     | `86400`            |
//! | `id_seed`                | `ALTROUTE_ID_SEED`            | clock at startup   |
//! | `engines.penalty_factor` | `ALTROUTE_PENALTY_FACTOR`     | `1.4`              |
//! | `engines.stretch_bound`  | `ALTROUTE_STRETCH_BOUND`      | `1.4`              |
//! | `engines.theta`          | `ALTROUTE_THETA`              | `0.5`              |
//! | `labels.policy`          | `ALTROUTE_LABEL_POLICY`       | `fixed`            |
//! | `labels.seed`            | `ALTROUTE_LABEL_SEED`         | `0`                |

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use altroute_core::engines::dissimilarity::DEFAULT_THETA;
use altroute_core::engines::penalty::DEFAULT_PENALTY_FACTOR;
use altroute_core::engines::DEFAULT_STRETCH_BOUND;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineParams {
    pub penalty_factor: f64,
    pub stretch_bound: f64,
    pub theta: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            penalty_factor: DEFAULT_PENALTY_FACTOR,
            stretch_bound: DEFAULT_STRETCH_BOUND,
            theta: DEFAULT_THETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Fixed,
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelSettings {
    pub policy: PolicyKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub network: PathBuf,
    pub listen: String,
    pub store: PathBuf,
    pub city: String,
    pub static_dir: Option<PathBuf>,
    pub provider_fixtures: Option<PathBuf>,
    pub cache_ttl_secs: u64,
    pub id_seed: Option<u64>,
    pub engines: EngineParams,
    pub labels: LabelSettings,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            network: PathBuf::from("network.bin"),
            listen: "127.0.0.1:8080".into(),
            store: PathBuf::from("ratings.jsonl"),
            city: "default".into(),
            static_dir: None,
            provider_fixtures: None,
            cache_ttl_secs: 24 * 60 * 60,
            id_seed: None,
            engines: EngineParams::default(),
            labels: LabelSettings::default(),
        }
    }
}

fn parsed<T: FromStr>(var: &str, value: String) -> Result<T, ServiceError> {
    value
        .trim()
        .parse()
        .map_err(|_| ServiceError::Config(format!("{var}={value:?} is not valid")))
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    /// Reads the optional file, then applies overrides from `env`.
    pub fn load(
        file: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ServiceError> {
        let mut cfg = match file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(env)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`ServiceConfig::load`] with the process environment.
    pub fn load_from_process(file: Option<&Path>) -> Result<Self, ServiceError> {
        Self::load(file, |k| std::env::var(k).ok())
    }

    fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), ServiceError> {
        if let Some(v) = env("ALTROUTE_NETWORK") {
            self.network = v.into();
        }
        if let Some(v) = env("ALTROUTE_LISTEN") {
            self.listen = v;
        }
        if let Some(v) = env("ALTROUTE_STORE") {
            self.store = v.into();
        }
        if let Some(v) = env("ALTROUTE_CITY") {
            self.city = v;
        }
        if let Some(v) = env("ALTROUTE_STATIC_DIR") {
            self.static_dir = Some(v.into());
        }
        if let Some(v) = env("ALTROUTE_PROVIDER_FIXTURES") {
            self.provider_fixtures = Some(v.into());
        }
        if let Some(v) = env("ALTROUTE_CACHE_TTL_SECS") {
            self.cache_ttl_secs = parsed("ALTROUTE_CACHE_TTL_SECS", v)?;
        }
        if let Some(v) = env("ALTROUTE_ID_SEED") {
            self.id_seed = Some(parsed("ALTROUTE_ID_SEED", v)?);
        }
        if let Some(v) = env("ALTROUTE_PENALTY_FACTOR") {
            self.engines.penalty_factor = parsed("ALTROUTE_PENALTY_FACTOR", v)?;
        }
        if let Some(v) = env("ALTROUTE_STRETCH_BOUND") {
            self.engines.stretch_bound = parsed("ALTROUTE_STRETCH_BOUND", v)?;
        }
        if let Some(v) = env("ALTROUTE_THETA") {
            self.engines.theta = parsed("ALTROUTE_THETA", v)?;
        }
        if let Some(v) = env("ALTROUTE_LABEL_POLICY") {
            self.labels.policy = match v.trim() {
                "fixed" => PolicyKind::Fixed,
                "shuffle" => PolicyKind::Shuffle,
                _ => {
                    return Err(ServiceError::Config(format!(
                        "ALTROUTE_LABEL_POLICY={v:?} is not valid"
                    )))
                }
            };
        }
        if let Some(v) = env("ALTROUTE_LABEL_SEED") {
            self.labels.seed = parsed("ALTROUTE_LABEL_SEED", v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let e = &self.engines;
        if !(e.penalty_factor > 1.0 && e.penalty_factor.is_finite()) {
            return Err(ServiceError::Config("penalty_factor must exceed 1".into()));
        }
        if !(e.stretch_bound >= 1.0 && e.stretch_bound.is_finite()) {
            return Err(ServiceError::Config(
                "stretch_bound must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&e.theta) {
            return Err(ServiceError::Config("theta must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
