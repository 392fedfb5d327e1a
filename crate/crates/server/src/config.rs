use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::DEFAULT_SNAPSHOT_HZ;
use crate::hub::DEFAULT_BACKLOG;

/// Server settings, read from a TOML file and then overridden by
/// `CHOREO_BIND`, `CHOREO_PORT`, `CHOREO_TOKEN`, `CHOREO_PROFILE` and
/// `CHOREO_CUE_SHEET`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    pub token: Option<String>,
    /// Robot profile TOML; the built-in UR5e profile when absent.
    pub profile: Option<PathBuf>,
    pub cue_sheet: Option<PathBuf>,
    pub snapshot_hz: f64,
    pub backlog: usize,
    pub noise_std_n: f64,
    pub seed: u64,
    /// Cue index to force-script CSV.
    pub force_scripts: BTreeMap<String, PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1".into(),
            port: 8760,
            token: None,
            profile: None,
            cue_sheet: None,
            snapshot_hz: DEFAULT_SNAPSHOT_HZ,
            backlog: DEFAULT_BACKLOG,
            noise_std_n: 0.0,
            seed: 0,
            force_scripts: BTreeMap::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("{0}")]
    Invalid(String),
}

impl ServerConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })
    }

    /// Reads `path` if given, resolving relative paths against its directory.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.profile.as_mut().map(fix);
        cfg.cue_sheet.as_mut().map(fix);
        cfg.force_scripts.values_mut().for_each(fix);
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("CHOREO_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("CHOREO_PORT") {
            self.port = v.parse().map_err(|_| ConfigError::Invalid(format!("CHOREO_PORT=`{v}` is not a port")))?;
        }
        if let Some(v) = var("CHOREO_TOKEN") {
            self.token = Some(v);
        }
        if let Some(v) = var("CHOREO_PROFILE") {
            self.profile = Some(v.into());
        }
        if let Some(v) = var("CHOREO_CUE_SHEET") {
            self.cue_sheet = Some(v.into());
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        match &self.token {
            Some(t) if !t.is_empty() => {}
            _ => return Err(ConfigError::Invalid("an operator token is required (token or CHOREO_TOKEN)".into())),
        }
        if self.cue_sheet.is_none() {
            return Err(ConfigError::Invalid("a cue sheet is required (cue_sheet or CHOREO_CUE_SHEET)".into()));
        }
        if !(self.snapshot_hz > 0.0) {
            return Err(ConfigError::Invalid(format!("snapshot_hz must be positive, got {}", self.snapshot_hz)));
        }
        for key in self.force_scripts.keys() {
            key.parse::<usize>().map_err(|_| ConfigError::Invalid(format!("force_scripts key `{key}` is not a cue index")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_file() {
        let mut cfg = ServerConfig::from_toml_str("port = 9000\ntoken = \"a\"\n", Path::new("x.toml")).unwrap();
        let env: BTreeMap<&str, &str> = [("CHOREO_PORT", "9100"), ("CHOREO_CUE_SHEET", "/s.csv")].into();
        cfg.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.port, 9100);
        assert_eq!(cfg.token.as_deref(), Some("a"));
        assert_eq!(cfg.cue_sheet, Some(PathBuf::from("/s.csv")));
        cfg.check().unwrap();
    }

    #[test]
    fn missing_token_or_bad_keys_fail() {
        let mut cfg = ServerConfig { cue_sheet: Some("s.csv".into()), ..Default::default() };
        assert!(cfg.check().is_err());
        cfg.token = Some("t".into());
        cfg.force_scripts.insert("four".into(), "f.csv".into());
        assert!(cfg.check().is_err());
        assert!(ServerConfig::from_toml_str("colour = 1", Path::new("x")).is_err());
        assert!(cfg.apply_env(|k| (k == "CHOREO_PORT").then(|| "x".into())).is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("serve.toml");
        std::fs::write(&path, "token = \"t\"\ncue_sheet = \"show.csv\"\n[force_scripts]\n4 = \"f.csv\"\n").unwrap();
        let cfg = ServerConfig::load(Some(&path)).unwrap();
        assert_eq!(cfg.cue_sheet, Some(dir.path().join("show.csv")));
        assert_eq!(cfg.force_scripts["4"], dir.path().join("f.csv"));
    }
}
