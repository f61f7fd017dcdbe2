use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::RepairPolicy;
use crate::ingestion::MIN_WINDOW_CHARS;
use crate::model::Iri;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Run configuration. Loaded from a flat TOML file whose keys are the field
/// names below; any key may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub base_iri: Iri,
    pub extraction_model: String,
    pub entailment_model: String,
    pub embedding_model: String,
    pub fuzzy_threshold: f64,
    pub max_chars_per_request: usize,
    pub max_entailment_pairs: usize,
    pub strict_validation: bool,
    pub repair_policy: RepairPolicy,
    /// Concurrent LLM requests per backend.
    pub max_in_flight: usize,
    pub embedding_batch_size: usize,
    pub temperature: f64,
    pub llm_api_key_env: String,
    pub embedding_api_key_env: String,
    pub llm_base_url: Option<String>,
    pub embedding_base_url: Option<String>,
    /// Directory with `extraction.txt` / `entailment.txt` overriding the
    /// bundled prompts.
    pub prompt_dir: Option<PathBuf>,
    pub cassette: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            base_iri: Iri::new("https://example.org/onto#").expect("default base IRI"),
            extraction_model: "gemini-3-flash-preview".into(),
            entailment_model: "claude-opus-4-5".into(),
            embedding_model: "text-embedding-3-small".into(),
            fuzzy_threshold: 0.94,
            max_chars_per_request: 8192,
            max_entailment_pairs: 2000,
            strict_validation: false,
            repair_policy: RepairPolicy::AutoAdd,
            max_in_flight: 4,
            embedding_batch_size: 64,
            temperature: 0.0,
            llm_api_key_env: "ONTOEKG_LLM_API_KEY".into(),
            embedding_api_key_env: "ONTOEKG_EMBEDDING_API_KEY".into(),
            llm_base_url: None,
            embedding_base_url: None,
            prompt_dir: None,
            cassette: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.fuzzy_threshold) {
            return Err(ConfigError::Invalid(format!("fuzzy_threshold {} is outside [0, 1]", self.fuzzy_threshold)));
        }
        if self.max_chars_per_request < MIN_WINDOW_CHARS {
            return Err(ConfigError::Invalid(format!(
                "max_chars_per_request must be at least {MIN_WINDOW_CHARS}"
            )));
        }
        for (name, value) in [
            ("max_entailment_pairs", self.max_entailment_pairs),
            ("max_in_flight", self.max_in_flight),
            ("embedding_batch_size", self.embedding_batch_size),
        ] {
            if value == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        if self.extraction_model.trim().is_empty() || self.entailment_model.trim().is_empty() {
            return Err(ConfigError::Invalid("model names must not be empty".into()));
        }
        Ok(())
    }
}
