//! Experiment configuration (JSON, schema version 1). See `docs/config.md`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use synmem_core::faultmem::{AccessMode, FailureModel, LayoutScheme, MemoryLayout};
use synmem_core::powerarea::PowerParams;
use synmem_core::quantnet::{FixedPointFormat, NetworkArch, TrainParams};

use crate::error::{io_err, HarnessError, Result};
use crate::synthetic::BlobSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic {
        classes: usize,
        dim: usize,
        seed: u64,
        #[serde(default = "default_noise")]
        noise: f64,
        train: usize,
        test: usize,
    },
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        /// Keep only the first `n` test samples.
        #[serde(default)]
        test_limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub layout: LayoutScheme,
    pub voltage: f64,
}

/// Word accesses charged per evaluation when accounting power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub reads_per_word: u64,
    pub writes_per_word: u64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self {
            reads_per_word: 1,
            writes_per_word: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub voltage: f64,
    /// Per-bank protected-MSB counts to compare.
    pub candidates: Vec<Vec<usize>>,
    /// Layouts reported alongside the candidates.
    #[serde(default)]
    pub references: Vec<LayoutScheme>,
    /// Accuracy-loss budget, in percentage points, for `--search`.
    #[serde(default = "default_max_loss")]
    pub max_loss_pts: f64,
}

fn default_noise() -> f64 {
    BlobSpec::new(2, 1, 0).noise
}

fn default_max_loss() -> f64 {
    1.0
}

fn default_chips() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub arch: NetworkArch,
    #[serde(default)]
    pub word_bits: FixedPointFormat,
    pub dataset: DatasetSource,
    pub training: TrainParams,
    /// Failure-model JSON, relative to the config file.
    pub failure_model: PathBuf,
    /// Power-parameter JSON, relative to the config file; defaults when absent.
    #[serde(default)]
    pub power_params: Option<PathBuf>,
    pub layouts: Vec<LayoutScheme>,
    pub voltages: Vec<f64>,
    #[serde(default = "default_chips")]
    pub chips_per_point: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub access_mode: AccessMode,
    pub baseline: BaselineSpec,
    #[serde(default)]
    pub trace: TraceSpec,
    #[serde(default)]
    pub profiles: Option<ProfileSpec>,
}

/// A config plus the files it references, loaded and validated.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    pub failure_model: FailureModel,
    pub power: PowerParams,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                c.schema_version
            )));
        }
        Ok(c)
    }

    pub fn format(&self) -> FixedPointFormat {
        self.word_bits
    }

    pub fn layout(&self, scheme: &LayoutScheme) -> Result<MemoryLayout> {
        let l = MemoryLayout::new(scheme.clone(), self.word_bits.word_bits())?;
        l.resolve(self.arch.bank_count())?;
        Ok(l)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks everything that does not need the referenced files.
    pub fn validate(&self) -> Result<()> {
        if self.chips_per_point == 0 {
            return Err(HarnessError::Config(
                "chips_per_point must be at least 1".into(),
            ));
        }
        if self.voltages.is_empty() || self.layouts.is_empty() {
            return Err(HarnessError::Config(
                "need at least one voltage and one layout".into(),
            ));
        }
        for l in &self.layouts {
            self.layout(l)?;
        }
        self.layout(&self.baseline.layout)?;
        if let Some(p) = &self.profiles {
            for k in &p.candidates {
                self.layout(&LayoutScheme::SensitivityBanks {
                    k_per_bank: k.clone(),
                })?;
            }
            for l in &p.references {
                self.layout(l)?;
            }
        }
        if self.training.batch == 0 {
            return Err(HarnessError::Config(
                "training.batch must be positive".into(),
            ));
        }
        Ok(())
    }

    fn check_voltages(&self, model: &FailureModel) -> Result<()> {
        let mut all: Vec<f64> = self.voltages.clone();
        all.push(self.baseline.voltage);
        if let Some(p) = &self.profiles {
            all.push(p.voltage);
        }
        let (lo, hi) = model.support();
        for v in all {
            if v.is_nan() || v <= 0.0 || !model.in_support(v) {
                return Err(HarnessError::Config(format!(
                    "voltage {v} outside failure-model support [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

impl LoadedConfig {
    /// Reads `path` and the failure-model and power files it names.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let config = ExperimentConfig::from_json_str(&text)?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_config(config, base_dir)
    }

    pub fn from_config(config: ExperimentConfig, base_dir: PathBuf) -> Result<Self> {
        config.validate()?;
        let fm_path = base_dir.join(&config.failure_model);
        let failure_model =
            FailureModel::from_json_str(&fs::read_to_string(&fm_path).map_err(io_err(&fm_path))?)?;
        let power = match &config.power_params {
            Some(p) => {
                let p = base_dir.join(p);
                PowerParams::from_json_str(&fs::read_to_string(&p).map_err(io_err(&p))?)?
            }
            None => PowerParams::default(),
        };
        config.check_voltages(&failure_model)?;
        Ok(Self {
            config,
            base_dir,
            failure_model,
            power,
        })
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }
}
