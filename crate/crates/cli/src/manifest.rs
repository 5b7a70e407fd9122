//! Per-language run manifest: a config snapshot plus, for every command
//! that ran, its artifacts and the fingerprints of the data it consumed.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use taxacc_core::Language;

use crate::config::RunConfig;
use crate::errors::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommandRecord {
    pub completed_unix: u64,
    pub artifacts: Vec<String>,
    pub input_fingerprints: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub language: Language,
    pub task: String,
    pub strategy: String,
    pub seed: u64,
    pub config: RunConfig,
    pub commands: BTreeMap<String, CommandRecord>,
}

impl RunManifest {
    pub fn load_or_new(path: &Path, config: &RunConfig) -> Result<RunManifest, CliError> {
        if path.exists() {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
            let mut manifest: RunManifest = serde_json::from_str(&raw)
                .map_err(|e| CliError::data(format!("corrupt manifest {}: {e}", path.display())))?;
            // later commands may carry flag overrides; the latest wins
            manifest.refresh(config);
            Ok(manifest)
        } else {
            let mut manifest = RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                language: config.language,
                task: config.task.clone(),
                strategy: config.strategy.clone(),
                seed: config.seed,
                config: config.clone(),
                commands: BTreeMap::new(),
            };
            manifest.refresh(config);
            Ok(manifest)
        }
    }

    fn refresh(&mut self, config: &RunConfig) {
        self.tool_version = env!("CARGO_PKG_VERSION").to_string();
        self.language = config.language;
        self.task = config.task.clone();
        self.strategy = config.strategy.clone();
        self.seed = config.seed;
        self.config = config.clone();
    }

    pub fn record(
        &mut self,
        command: &str,
        artifacts: Vec<String>,
        input_fingerprints: BTreeMap<String, String>,
    ) {
        let completed_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.commands.insert(
            command.to_string(),
            CommandRecord {
                completed_unix,
                artifacts,
                input_fingerprints,
            },
        );
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::data(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(path, body)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}
