//! Server configuration, read from a JSON file.

use std::path::{Path, PathBuf};

use chrono::FixedOffset;
use serde::{Deserialize, Serialize};

use crate::audio::HttpTtsConfig;
use crate::model::{Validate, Violation, Violations};
use crate::osc;
use crate::timing::DEFAULT_DELAY_BUDGET_MS;
use crate::venue::parse_timezone;

pub const DATA_DIR_ENV: &str = "TELEBRAIN_DATA_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscConfig {
    #[serde(default = "default_listen_port")]
    pub listen_port: u16,
    #[serde(default = "default_send_port")]
    pub default_send_port: u16,
}

fn default_listen_port() -> u16 {
    osc::DEFAULT_LISTEN_PORT
}

fn default_send_port() -> u16 {
    osc::DEFAULT_SEND_PORT
}

impl Default for OscConfig {
    fn default() -> Self {
        Self {
            listen_port: default_listen_port(),
            default_send_port: default_send_port(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_http_port")]
    pub http_port: u16,
    #[serde(default)]
    pub osc: OscConfig,
    #[serde(default = "default_budget")]
    pub delay_budget_ms: u64,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    /// `UTC` or `+HH:MM`.
    #[serde(default = "default_timezone")]
    pub timezone: String,
    /// Seeds every performance's RNG; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Network TTS; the offline tone stub is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tts: Option<HttpTtsConfig>,
}

fn default_http_port() -> u16 {
    8080
}

fn default_budget() -> u64 {
    DEFAULT_DELAY_BUDGET_MS
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("telebrain-data")
}

fn default_timezone() -> String {
    "UTC".into()
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            http_port: default_http_port(),
            osc: OscConfig::default(),
            delay_budget_ms: default_budget(),
            data_dir: default_data_dir(),
            timezone: default_timezone(),
            rng_seed: None,
            tts: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(#[from] Violations),
}

impl ServerConfig {
    /// Reads and validates a config file, then applies the data-dir
    /// environment override.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.apply_env();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV).filter(|d| !d.is_empty()) {
            self.data_dir = PathBuf::from(dir);
        }
    }

    pub fn timezone_offset(&self) -> FixedOffset {
        parse_timezone(&self.timezone).unwrap_or(FixedOffset::east_opt(0).expect("zero offset"))
    }
}

impl Validate for ServerConfig {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        if self.http_port == 0 {
            out.push(Violation::new("http_port", "port must be in [1,65535]"));
        }
        if self.osc.listen_port == 0 {
            out.push(Violation::new("osc.listen_port", "port must be in [1,65535]"));
        }
        if self.osc.default_send_port == 0 {
            out.push(Violation::new("osc.default_send_port", "port must be in [1,65535]"));
        }
        if self.delay_budget_ms == 0 {
            out.push(Violation::new("delay_budget_ms", "delay budget must be > 0"));
        }
        if parse_timezone(&self.timezone).is_none() {
            out.push(Violation::new("timezone", "timezone must be UTC or +HH:MM"));
        }
        if let Some(tts) = &self.tts {
            if tts.endpoint.trim().is_empty() {
                out.push(Violation::new("tts.endpoint", "endpoint must be non-empty"));
            }
            if tts.timeout_ms == 0 {
                out.push(Violation::new("tts.timeout_ms", "timeout must be > 0"));
            }
        }
    }
}
