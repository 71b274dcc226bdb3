use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backends::{resolve_backends, ExecutionLimits, RegistryError};
use crate::classify::ClassifyParams;
use crate::llm::{GenParams, MutationMode, ParamsError, DEFAULT_API_KEY_ENV};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusSource {
    Manifest { manifest: PathBuf },
    Directory { root: PathBuf, keyword: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// Chat-completions URL; `JSONORACLE_ENDPOINT` overrides it.
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API token.
    pub api_key_env: String,
    pub in_flight: usize,
    pub verbose: bool,
    pub retry_attempts: u32,
    pub initial_backoff_ms: u64,
    /// A scenario file; when set, no network is used.
    pub mock_scenario: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            in_flight: 4,
            verbose: false,
            retry_attempts: 3,
            initial_backoff_ms: 500,
            mock_scenario: None,
        }
    }
}

fn default_rounds() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusSource,
    pub backends: Vec<String>,
    #[serde(default)]
    pub generation: GenParams,
    #[serde(default)]
    pub mutation: MutationMode,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub limits: ExecutionLimits,
    /// Bug signatures reviewed as intended behaviour.
    #[serde(default)]
    pub suppress: Vec<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub llm: LlmConfig,
    #[serde(default)]
    pub classify: ClassifyParams,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path} at line {line}, column {column}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("at least 2 backends are required, got {0}")]
    TooFewBackends(usize),
    #[error(transparent)]
    Backend(#[from] RegistryError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("rounds must be at least 1")]
    Rounds,
    #[error("llm.in_flight must be at least 1")]
    InFlight,
    #[error("llm.retry_attempts must be at least 1")]
    RetryAttempts,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mock_scenario: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mutation: Option<MutationMode>,
    pub output_dir: Option<PathBuf>,
    pub rounds: Option<usize>,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Format {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut cfg.corpus {
            CorpusSource::Manifest { manifest } => rebase(base, manifest),
            CorpusSource::Directory { root, .. } => rebase(base, root),
        }
        rebase(base, &mut cfg.output_dir);
        if let Some(m) = &mut cfg.llm.mock_scenario {
            rebase(base, m);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = &o.mock_scenario {
            self.llm.mock_scenario = Some(m.clone());
        }
        if let Some(s) = o.seed {
            self.generation.seed = s;
        }
        if let Some(m) = o.mutation {
            self.mutation = m;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(r) = o.rounds {
            self.rounds = r;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.backends.len() < 2 {
            return Err(ConfigError::TooFewBackends(self.backends.len()));
        }
        resolve_backends(&self.backends)?;
        self.generation.validate()?;
        if self.rounds == 0 {
            return Err(ConfigError::Rounds);
        }
        if self.llm.in_flight == 0 {
            return Err(ConfigError::InFlight);
        }
        if self.llm.retry_attempts == 0 {
            return Err(ConfigError::RetryAttempts);
        }
        Ok(())
    }

    /// The config as echoed in reports: everything except the output location.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("output_dir");
        }
        v
    }
}
