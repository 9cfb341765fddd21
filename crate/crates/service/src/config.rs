//! Service configuration file (JSON). The `COOP_CONFIG` environment
//! variable overrides the path given on the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alerts::AlertRule;
use crate::ServiceError;
use coopwatch_core::inference::PostprocessConfig;

pub const CONFIG_ENV_VAR: &str = "COOP_CONFIG";

fn default_listen_addr() -> String {
    "127.0.0.1:8080".into()
}

fn default_rotate_bytes() -> u64 {
    10 * 1024 * 1024
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Path to `classes.txt`.
    pub class_map_path: PathBuf,
    /// Replay fixture (JSON Lines) backing the detector.
    pub replay_fixture_path: PathBuf,
    #[serde(default)]
    pub postprocess: PostprocessConfig,
    #[serde(default)]
    pub alert_rule: AlertRule,
    pub log_dir: PathBuf,
    #[serde(default = "default_listen_addr")]
    pub listen_addr: String,
    #[serde(default = "default_rotate_bytes")]
    pub log_rotate_bytes: u64,
}

impl ServiceConfig {
    /// Resolve the config path (environment override first), then load and
    /// validate. Relative paths inside the file are taken relative to the
    /// file's directory.
    pub fn load(cli_path: &Path) -> Result<Self, ServiceError> {
        let path = match std::env::var_os(CONFIG_ENV_VAR) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => cli_path.to_path_buf(),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ServiceError::Io { path: path.display().to_string(), source: e })?;
        let mut config: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            config.class_map_path = absolutize(base, &config.class_map_path);
            config.replay_fixture_path = absolutize(base, &config.replay_fixture_path);
            config.log_dir = absolutize(base, &config.log_dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        self.alert_rule.validate().map_err(ServiceError::InvalidConfig)?;
        self.postprocess
            .validate()
            .map_err(|e| ServiceError::InvalidConfig(e.to_string()))?;
        if self.log_rotate_bytes == 0 {
            return Err(ServiceError::InvalidConfig("log_rotate_bytes must be positive".into()));
        }
        Ok(())
    }
}

fn absolutize(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // load() consults the process-wide env var, so tests touching it must
    // not interleave
    static ENV_LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());

    fn write_config(dir: &Path) -> PathBuf {
        let path = dir.join("cfg.json");
        std::fs::write(
            &path,
            r#"{
                "class_map_path": "classes.txt",
                "replay_fixture_path": "replay.jsonl",
                "log_dir": "logs"
            }"#,
        )
        .unwrap();
        path
    }

    #[test]
    fn loads_with_defaults_and_relative_paths() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path());
        let cfg = ServiceConfig::load(&path).unwrap();
        assert_eq!(cfg.class_map_path, dir.path().join("classes.txt"));
        assert_eq!(cfg.listen_addr, "127.0.0.1:8080");
        assert_eq!(cfg.alert_rule, AlertRule::default());
        assert_eq!(cfg.postprocess, PostprocessConfig::default());
    }

    #[test]
    fn env_var_overrides_cli_path() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let real = write_config(dir.path());
        // the env var should win over a bogus CLI path
        std::env::set_var(CONFIG_ENV_VAR, &real);
        let cfg = ServiceConfig::load(Path::new("/nonexistent/cfg.json"));
        std::env::remove_var(CONFIG_ENV_VAR);
        assert!(cfg.is_ok());
    }

    #[test]
    fn invalid_rule_is_rejected() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{
                "class_map_path": "classes.txt",
                "replay_fixture_path": "replay.jsonl",
                "log_dir": "logs",
                "alert_rule": {"min_hits": 9, "window_size": 5}
            }"#,
        )
        .unwrap();
        assert!(matches!(
            ServiceConfig::load(&path),
            Err(ServiceError::InvalidConfig(_))
        ));
    }
}
