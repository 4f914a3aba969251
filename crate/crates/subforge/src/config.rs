//! Configuration files: flat TOML whose keys are exactly the
//! [`PipelineConfig`] field names. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use subforge_core::{PipelineConfig, RawConfig};

use crate::Error;

/// Environment variable consulted when no `--config` is given.
pub const CONFIG_ENV: &str = "SUBFORGE_CONFIG";

pub fn parse_config(text: &str) -> Result<PipelineConfig, String> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
    raw.validate().map_err(|e| e.to_string())
}

pub fn to_toml(cfg: &PipelineConfig) -> String {
    toml::to_string(&RawConfig::from(cfg.clone())).expect("config serializes")
}

pub fn load_config_file(path: &Path) -> Result<PipelineConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|message| Error::Config { path: path.to_path_buf(), message })
}

/// Explicit path first, then [`CONFIG_ENV`], then built-in defaults.
pub fn resolve_config(explicit: Option<&Path>) -> Result<PipelineConfig, Error> {
    let path = explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    match path {
        Some(p) => load_config_file(&p),
        None => Ok(PipelineConfig::default()),
    }
}
