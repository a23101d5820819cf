//! Experiment configuration (TOML).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use twon_core::behavior::StubMode;
use twon_core::likelihood::{TrainConfig, DEFAULT_THRESHOLD};
use twon_core::metrics::{DistanceKind, DEFAULT_EPSILON, DEFAULT_K, DEFAULT_MAX_N, DEFAULT_N};
use twon_core::sidecar::RetryPolicy;
use twon_core::{Language, MechanicsConfig};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const SIDECAR_URL_ENV: &str = "TWON_SIDECAR_URL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Post,
    Reply,
    Likelihood,
    Simulate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// Raw samples to preprocess (`ingest`).
    pub corpus: Option<PathBuf>,
    /// Train split, used for Markov training and few-shot histories.
    pub train: Option<PathBuf>,
    /// Test split whose texts are imitated (`evaluate`).
    pub test: Option<PathBuf>,
    /// Pre-generated `EvalPair` lines; replaces the provider in `evaluate`.
    pub generated: Option<PathBuf>,
    pub likelihood_train: Option<PathBuf>,
    pub likelihood_test: Option<PathBuf>,
    /// `{"text", "vector"}` lines; replaces the hashing embedder.
    pub embeddings: Option<PathBuf>,
    pub observations: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// Existing behavior-realism report to attach to simulation bundles.
    pub realism_report: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Stub,
    Markov,
    Remote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubModeConfig {
    Echo,
    ReplyToEach,
    Silent,
}

impl From<StubModeConfig> for StubMode {
    fn from(m: StubModeConfig) -> Self {
        match m {
            StubModeConfig::Echo => StubMode::Echo,
            StubModeConfig::ReplyToEach => StubMode::ReplyToEach,
            StubModeConfig::Silent => StubMode::Silent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub stub_mode: StubModeConfig,
    pub markov_order: usize,
    pub max_tokens: u32,
    pub temperature: f64,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    /// Few-shot pairs per prompt.
    pub max_pairs: usize,
    pub template_version: String,
    /// Upper bound on replies per agent and tick in simulations.
    pub max_replies: usize,
    pub reply_probability: f64,
    /// Party per user id for post prompts.
    pub parties: BTreeMap<String, String>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Stub,
            stub_mode: StubModeConfig::Echo,
            markov_order: 1,
            max_tokens: 64,
            temperature: 0.7,
            endpoint: None,
            timeout_ms: 30_000,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            max_pairs: 5,
            template_version: "v1".into(),
            max_replies: 3,
            reply_probability: 1.0,
            parties: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub n: usize,
    pub k: usize,
    pub max_n: usize,
    pub epsilon: f64,
    pub distance: DistanceKind,
    pub condition: String,
    /// Label categories scored by the sidecar; empty disables label correlations.
    pub label_categories: Vec<String>,
    /// Dimension of the built-in hashing embedder.
    pub embedding_dim: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_N,
            k: DEFAULT_K,
            max_n: DEFAULT_MAX_N,
            epsilon: DEFAULT_EPSILON,
            distance: DistanceKind::Euclidean,
            condition: "base".into(),
            label_categories: Vec::new(),
            embedding_dim: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub min_chars: usize,
    pub top_k: usize,
    pub train_fraction: f64,
    pub history_cap: usize,
    pub reply_pairs_cap: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            min_chars: twon_core::ingest::DEFAULT_MIN_CHARS,
            top_k: twon_core::ingest::DEFAULT_TOP_K,
            train_fraction: twon_core::ingest::DEFAULT_TRAIN_FRACTION,
            history_cap: 10,
            reply_pairs_cap: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub threshold: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            lr: t.lr,
            weight_decay: t.weight_decay,
            epochs: t.epochs,
            batch_size: t.batch_size,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl ScorerConfig {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningPost {
    pub agent: String,
    pub text: String,
    /// Addressee; broadcast when absent.
    #[serde(default)]
    pub to: Option<String>,
    #[serde(default)]
    pub topic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub agents: Vec<String>,
    pub ticks: u64,
    pub openings: Vec<OpeningPost>,
    /// Weight of the set term in the mechanics loss.
    pub alpha: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            agents: Vec::new(),
            ticks: 10,
            openings: Vec::new(),
            alpha: twon_core::mechanics::DEFAULT_ALPHA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Family members of the fitted search: built-ins with this `k` ...
    pub k: usize,
    /// ... and one `random_k` member per seed.
    pub random_seeds: Vec<u64>,
    /// Explicit family; replaces the built-ins when non-empty.
    pub family: Vec<MechanicsConfig>,
    pub alpha: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: 10,
            random_seeds: vec![0, 1, 2],
            family: Vec::new(),
            alpha: twon_core::mechanics::DEFAULT_ALPHA,
        }
    }
}

impl FitConfig {
    pub fn family(&self) -> Vec<MechanicsConfig> {
        if self.family.is_empty() {
            MechanicsConfig::builtin_family(self.k, &self.random_seeds)
        } else {
            self.family.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub task: TaskKind,
    pub language: Language,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub data: DataPaths,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default = "MechanicsConfig::identity")]
    pub mechanics: MechanicsConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default)]
    pub scorer: ScorerConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

/// A parsed config together with the exact text it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let source = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_source(&source, base_dir)
    }

    pub fn from_source(source: &str, base_dir: PathBuf) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| CliError::Config(e.to_string()))?;
        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(Self {
            config,
            source: source.to_owned(),
            base_dir,
        })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    /// Resolves a data path the current command cannot run without.
    pub fn required(&self, field: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        let path = path
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("data.{field} is required for this command")))?;
        self.existing(field, path)
    }

    pub fn optional(&self, field: &str, path: &Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
        path.as_ref().map(|p| self.existing(field, p)).transpose()
    }

    fn existing(&self, field: &str, path: &Path) -> Result<PathBuf, CliError> {
        let resolved = self.resolve(path);
        if !resolved.exists() {
            return Err(CliError::Config(format!(
                "data.{field}: {} does not exist",
                resolved.display()
            )));
        }
        Ok(resolved)
    }

    /// Sidecar endpoint, with the environment taking precedence over the config.
    pub fn sidecar_url(&self) -> Result<String, CliError> {
        std::env::var(SIDECAR_URL_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .or_else(|| self.config.provider.endpoint.clone())
            .ok_or_else(|| {
                CliError::Config(format!(
                    "provider.endpoint or {SIDECAR_URL_ENV} must be set for remote models"
                ))
            })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        c.mechanics
            .validate()
            .map_err(|e| CliError::Config(format!("mechanics: {e}")))?;
        if c.metrics.n == 0 || c.metrics.k == 0 {
            return Err(CliError::Config("metrics.n and metrics.k must be positive".into()));
        }
        if !(1..=4).contains(&c.metrics.max_n) || c.metrics.epsilon.is_nan() || c.metrics.epsilon <= 0.0 {
            return Err(CliError::Config(
                "metrics.max_n must be in 1..=4 and metrics.epsilon positive".into(),
            ));
        }
        if c.metrics.embedding_dim == 0 {
            return Err(CliError::Config("metrics.embedding_dim must be positive".into()));
        }
        if !(0.0..=1.0).contains(&c.provider.reply_probability) {
            return Err(CliError::Config("provider.reply_probability must be in [0, 1]".into()));
        }
        Ok(())
    }
}
