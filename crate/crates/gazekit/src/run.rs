//! Run directories: configuration snapshot, scaler, training history,
//! parameters and a manifest with input hashes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gazekit_core::evaluation::experiment::{DataOptions, SeedRun};
use gazekit_core::evaluation::RunMetrics;
use gazekit_core::features::Standardizer;
use gazekit_core::regression::{build_regressor, EncoderSpec, TinyTransformer, TokenRegressor, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{read_json, read_standardizer, write_history_csv, write_json, write_standardizer};

pub const CONFIG_FILE: &str = "config.json";
pub const STANDARDIZER_FILE: &str = "standardizer.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const PARAMS_FILE: &str = "model.params";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(Error::io(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

/// What produced a directory and from which inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub seeds: Vec<u64>,
    /// Paths relative to the directory.
    pub outputs: Vec<String>,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, inputs: Vec<InputFile>, seeds: Vec<u64>) -> Self {
        Self {
            command: command.to_string(),
            config,
            inputs,
            seeds,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            finished_unix: 0,
        }
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.finished_unix = unix_now();
        self.outputs.sort();
        self.outputs.dedup();
        write_json(&dir.join(MANIFEST_FILE), &self)
    }
}

/// Settings a single training run was made with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: InputFile,
    pub format: String,
    pub encoder: EncoderSpec,
    pub data: DataOptions,
    pub train: TrainConfig,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Writes everything needed to reload and rescore `run`.
pub fn save_run(dir: &Path, cfg: &RunConfig, scaler: &Standardizer, run: &SeedRun) -> Result<Vec<String>> {
    create_dir(dir)?;
    write_json(&dir.join(CONFIG_FILE), cfg)?;
    write_standardizer(&dir.join(STANDARDIZER_FILE), scaler)?;
    write_history_csv(&dir.join(HISTORY_FILE), &run.history)?;
    let blob = dir.join(PARAMS_FILE);
    fs::write(&blob, run.model.params().to_le_bytes()).map_err(Error::io(&blob))?;
    write_json(&dir.join(METRICS_FILE), &MetricsFile::new(&run.test))?;
    Ok(
        [CONFIG_FILE, STANDARDIZER_FILE, HISTORY_FILE, PARAMS_FILE, METRICS_FILE]
            .map(String::from)
            .to_vec(),
    )
}

/// Test-split scores of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub accuracy: f64,
    pub metrics: RunMetrics,
}

impl MetricsFile {
    pub fn new(m: &RunMetrics) -> Self {
        Self {
            accuracy: m.accuracy(),
            metrics: m.clone(),
        }
    }
}

/// A trained model read back from its run directory.
pub struct LoadedRun {
    pub config: RunConfig,
    pub standardizer: Standardizer,
    pub model: TokenRegressor<TinyTransformer>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let config: RunConfig = read_json(&dir.join(CONFIG_FILE))?;
    let standardizer = read_standardizer(&dir.join(STANDARDIZER_FILE))?;
    let mut model = build_regressor(&config.encoder, config.seed)?;
    let blob = dir.join(PARAMS_FILE);
    let bytes = fs::read(&blob).map_err(Error::io(&blob))?;
    let mut params = model.params().clone();
    params.load_le_bytes(&bytes)?;
    model.load_params(params)?;
    Ok(LoadedRun {
        config,
        standardizer,
        model,
    })
}
