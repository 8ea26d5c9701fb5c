//! Loading society configs and presets from TOML (hand-written) or JSON (machine round-trips).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use socnet::society::DerivedType;
use socnet::SocietyConfig;

use crate::preset::ExperimentPreset;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

impl ConfigFormat {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Ok(ConfigFormat::Toml),
            Some("json") => Ok(ConfigFormat::Json),
            _ => Err(HarnessError::Format(path.to_path_buf())),
        }
    }
}

/// A validated config together with the quantities derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedConfig {
    pub config: SocietyConfig,
    pub derived: Vec<DerivedType>,
}

impl LoadedConfig {
    pub fn new(config: SocietyConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let derived = config.derived();
        Ok(Self { config, derived })
    }

    /// Human-readable echo of `L*(0)` and `h` per type.
    pub fn echo(&self) -> String {
        let mut s = String::from("type  share   gamma   L*(0)  cross  h\n");
        for (d, p) in self.derived.iter().zip(&self.config.profiles) {
            s.push_str(&format!(
                "{:<5} {:<7.4} {:<7.4} {:<6} {:<6} {:.4}\n",
                d.type_id.0, p.pop_share, p.opportunism, d.gregariousness, d.max_cross_links, d.homophily
            ));
        }
        s
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Read { path: path.to_path_buf(), source })
}

pub fn parse<T: DeserializeOwned>(text: &str, format: ConfigFormat, path: &Path) -> Result<T, HarnessError> {
    let parsed = match format {
        ConfigFormat::Toml => toml::from_str(text).map_err(|e| e.to_string()),
        ConfigFormat::Json => serde_json::from_str(text).map_err(|e| e.to_string()),
    };
    parsed.map_err(|message| HarnessError::Parse { path: path.to_path_buf(), message })
}

/// Parses and validates a society config, reporting every violated invariant.
pub fn load_config(path: &Path) -> Result<LoadedConfig, HarnessError> {
    let format = ConfigFormat::from_path(path)?;
    let config: SocietyConfig = parse(&read(path)?, format, path)?;
    LoadedConfig::new(config)
}

pub fn load_preset(path: &Path) -> Result<ExperimentPreset, HarnessError> {
    let format = ConfigFormat::from_path(path)?;
    let preset: ExperimentPreset = parse(&read(path)?, format, path)?;
    preset.validate()?;
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
horizon = 100
seed = 3
replication_count = 2

[[profiles]]
alpha_same = 1.0
alpha_diff = 0.0
link_cost = 0.3
opportunism = 0.5
pop_share = 1.0
curve = { family = "sqrt-like", scale = 1.0 }
"#;

    #[test]
    fn minimal_toml_loads() {
        let cfg: SocietyConfig = parse(MINIMAL, ConfigFormat::Toml, Path::new("x.toml")).unwrap();
        let loaded = LoadedConfig::new(cfg).unwrap();
        assert_eq!(loaded.derived[0].gregariousness, 3);
        assert_eq!(loaded.derived[0].homophily, 1.0);
        assert!(loaded.echo().contains("1.0000"));
    }

    #[test]
    fn bad_share_is_named() {
        let text = MINIMAL.replace("pop_share = 1.0", "pop_share = 0.9");
        let cfg: SocietyConfig = parse(&text, ConfigFormat::Toml, Path::new("x.toml")).unwrap();
        let err = LoadedConfig::new(cfg).unwrap_err();
        assert!(err.is_config_error());
        assert!(err.to_string().contains("pop_share"));
    }

    #[test]
    fn unknown_extension() {
        assert!(matches!(ConfigFormat::from_path(Path::new("a.yaml")), Err(HarnessError::Format(_))));
    }
}
