//! TOML configuration for the CLI. Flags given on the command line override
//! anything read from the file; secrets only ever come from the environment
//! variable the config names, never from the file itself.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

pub const DEFAULT_CONFIG_NAME: &str = "pictor.toml";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub remote: RemoteSection,
    #[serde(default)]
    pub engine: EngineSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub max_steps: Option<u32>,
    pub max_rounds: Option<u32>,
    pub parse_retries: Option<u32>,
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    toml::from_str(text).context("parsing config")
}

/// Loads `path` when given; otherwise `pictor.toml` in the working directory
/// if present, else defaults.
pub fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let chosen = match path {
        Some(p) => p.to_path_buf(),
        None => {
            let fallback = Path::new(DEFAULT_CONFIG_NAME);
            if !fallback.is_file() {
                return Ok(FileConfig::default());
            }
            fallback.to_path_buf()
        }
    };
    let text = std::fs::read_to_string(&chosen)
        .with_context(|| format!("reading {}", chosen.display()))?;
    parse_config(&text).with_context(|| chosen.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let cfg = parse_config(
            r#"
            [remote]
            endpoint = "http://127.0.0.1:9000/v1/chat/completions"
            model = "local-vlm"
            token_env = "VLM_TOKEN"
            timeout_secs = 30
            max_retries = 2

            [engine]
            max_steps = 8
            max_rounds = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.remote.model.as_deref(), Some("local-vlm"));
        assert_eq!(cfg.engine.max_steps, Some(8));
        assert_eq!(cfg.engine.parse_retries, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("[remote]\ntoken = \"inline-secret\"\n").is_err());
    }

    #[test]
    fn missing_file_falls_back_to_defaults() {
        let cfg = load_config(None).unwrap();
        assert_eq!(cfg, FileConfig::default());
    }
}
