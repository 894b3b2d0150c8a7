use std::path::PathBuf;

use metaforge::llm::{BackendConfig, LlmError};
use metaforge::pipeline::{PipelineConfig, Track};

pub const ENV_PORT: &str = "MF_PORT";
pub const ENV_DATA_DIR: &str = "MF_DATA_DIR";
pub const ENV_TRACK: &str = "MF_TRACK";
pub const ENV_PLANTUML_SERVER: &str = "MF_PLANTUML_SERVER";
pub const ENV_UI_DIR: &str = "MF_UI_DIR";
pub const ENV_CORS_ORIGIN: &str = "MF_CORS_ORIGIN";

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    /// Session snapshots are written here when set.
    pub data_dir: Option<PathBuf>,
    pub backend: BackendConfig,
    pub pipeline: PipelineConfig,
    /// Base URL of a PlantUML render server used for PNG output.
    pub plantuml_server: Option<String>,
    /// Static UI assets served under `/ui`.
    pub ui_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{ENV_PORT}: `{0}` is not a port number")]
    Port(String),
    #[error("{ENV_TRACK}: `{0}` is not one of dual, puml-first")]
    Track(String),
    #[error(transparent)]
    Backend(#[from] LlmError),
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let non_empty = |k: &str| lookup(k).filter(|v| !v.trim().is_empty());
        let port = match non_empty(ENV_PORT) {
            Some(p) => p.trim().parse().map_err(|_| ConfigError::Port(p))?,
            None => DEFAULT_PORT,
        };
        let track = match non_empty(ENV_TRACK).as_deref().map(str::trim) {
            None | Some("dual") => Track::Dual,
            Some("puml-first") => Track::PumlFirst,
            Some(other) => return Err(ConfigError::Track(other.to_string())),
        };
        Ok(ServiceConfig {
            port,
            data_dir: non_empty(ENV_DATA_DIR).map(PathBuf::from),
            backend: BackendConfig::from_lookup(&lookup)?,
            pipeline: PipelineConfig {
                track,
                ..Default::default()
            },
            plantuml_server: non_empty(ENV_PLANTUML_SERVER).map(|s| s.trim_end_matches('/').to_string()),
            ui_dir: non_empty(ENV_UI_DIR).map(PathBuf::from),
            cors_origin: non_empty(ENV_CORS_ORIGIN),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn defaults() {
        let c = ServiceConfig::from_lookup(lookup(&[("MF_FIXTURE_DIR", "llm")])).unwrap();
        assert_eq!(c.port, DEFAULT_PORT);
        assert!(c.data_dir.is_none());
        assert_eq!(c.pipeline.track, Track::Dual);
    }

    #[test]
    fn overrides_and_errors() {
        let c = ServiceConfig::from_lookup(lookup(&[
            ("MF_FIXTURE_DIR", "llm"),
            (ENV_PORT, "9000"),
            (ENV_TRACK, "puml-first"),
            (ENV_PLANTUML_SERVER, "http://render.local/plantuml/"),
        ]))
        .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.pipeline.track, Track::PumlFirst);
        assert_eq!(c.plantuml_server.as_deref(), Some("http://render.local/plantuml"));
        assert!(matches!(ServiceConfig::from_lookup(lookup(&[(ENV_PORT, "x")])), Err(ConfigError::Port(_))));
        assert!(matches!(ServiceConfig::from_lookup(lookup(&[])), Err(ConfigError::Backend(_))));
        assert!(matches!(ServiceConfig::from_lookup(lookup(&[(ENV_TRACK, "fast")])), Err(ConfigError::Track(_))));
    }
}
