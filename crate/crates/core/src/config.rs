//! Run configuration (TOML), artifact metadata and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Split;
use crate::instance::{BuildStats, DatasetConfig, LpOptions, SpecFilter};
use crate::prompt::{PromptId, Task};
use crate::tokens::TokenCounter;

/// Writes `bytes` to a temp file next to `path` and renames it into place,
/// so readers never see a partial artifact.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Every knob of a dataset build. Command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    /// Token budget for the whole input; 0 disables the budget.
    pub budget: usize,
    pub counter: String,
    pub tasks: Vec<Task>,
    /// Explicit prompt ids; empty means every id allowed by the filters.
    pub prompt_ids: Vec<PromptId>,
    pub max_hop: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<bool>,
    pub splits: Vec<Split>,
    pub lp_all_nodes: bool,
    pub lp_mix: f64,
    pub neg_ratio: f64,
    pub lp_exact_level: bool,
    pub cumulative_levels: bool,
    pub resample_epochs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = DatasetConfig::default();
        RunConfig {
            seed: d.seed,
            workers: d.workers,
            budget: d.counter.limit,
            counter: "whitespace".into(),
            tasks: d.tasks,
            prompt_ids: Vec::new(),
            max_hop: d.filter.max_hop,
            features: d.filter.features,
            paths: d.filter.paths,
            splits: d.splits,
            lp_all_nodes: d.lp_all_nodes,
            lp_mix: d.lp_mix_ratio,
            neg_ratio: d.neg_ratio,
            lp_exact_level: d.lp.exact_level,
            cumulative_levels: d.cumulative_levels,
            resample_epochs: d.resample_epochs,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// SHA-256 over the configuration, ignoring the worker count, which
    /// never changes the output.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            workers: 0,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("run config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn counter(&self) -> Result<TokenCounter> {
        let limit = if self.budget == 0 { usize::MAX } else { self.budget };
        TokenCounter::parse(&self.counter, limit)
    }

    pub fn dataset_config(&self) -> Result<DatasetConfig> {
        if !(1..=3).contains(&self.max_hop) {
            return Err(Error::HopOutOfRange {
                hop: self.max_hop as usize,
                min: 1,
                max: 3,
            });
        }
        Ok(DatasetConfig {
            tasks: self.tasks.clone(),
            prompt_ids: (!self.prompt_ids.is_empty()).then(|| self.prompt_ids.clone()),
            filter: SpecFilter {
                max_hop: self.max_hop,
                features: self.features,
                paths: self.paths,
            },
            splits: self.splits.clone(),
            lp_all_nodes: self.lp_all_nodes,
            counter: self.counter()?,
            seed: self.seed,
            lp_mix_ratio: self.lp_mix,
            neg_ratio: self.neg_ratio,
            lp: LpOptions {
                exact_level: self.lp_exact_level,
            },
            cumulative_levels: self.cumulative_levels,
            resample_epochs: self.resample_epochs,
            workers: self.workers,
        })
    }
}

/// Sidecar written next to every dataset artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: String,
    pub instances: usize,
    pub stats: BuildStats,
}

impl ArtifactMeta {
    pub fn new(cfg: &RunConfig, instances: usize, stats: BuildStats) -> Self {
        ArtifactMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            config: cfg.to_toml(),
            instances,
            stats,
        }
    }

    pub fn path_for(artifact: impl AsRef<Path>) -> PathBuf {
        let mut name = artifact.as_ref().as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    pub fn write(&self, artifact: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(ArtifactMeta::path_for(artifact), &json)
    }

    pub fn read(artifact: impl AsRef<Path>) -> Result<ArtifactMeta> {
        let path = ArtifactMeta::path_for(artifact);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
