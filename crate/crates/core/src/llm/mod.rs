//! Chat-completion and embedding backends.
//!
//! Pipeline stages talk to [`ChatBackend`] and [`EmbeddingBackend`] only.
//! Live HTTP adapters, cassette record/replay wrappers and scripted test
//! doubles all implement the same traits, so a whole run can be replayed
//! offline and bit-for-bit.

mod cassette;
mod embed;
mod http;
mod mock;
mod schema;
mod structured;

pub use cassette::{CassetteChat, CassetteEmbedder, CassetteEntry, CassetteMode, CassetteStore, MatchMode, Recorded};
pub use embed::{cosine, normalize, CachedEmbedder, EmbeddingBackend, FixedEmbedder, HashEmbedder, IdentityEmbedder};
pub use http::{HttpSettings, OpenAiChat, OpenAiEmbedder, RetryPolicy};
pub use mock::{FnBackend, ScriptedBackend};
pub use schema::Shape;
pub use structured::{call_structured, repair_message, StructuredError, StructuredOutcome, MAX_REPAIR_RETRIES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Set to any non-empty value to refuse every non-loopback HTTP request.
pub const OFFLINE_ENV: &str = "ONTOEKG_OFFLINE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("HTTP error: {0}")]
    Http(String),
    #[error("cassette miss: no recorded response for request {hash}")]
    CassetteMiss { hash: String },
    #[error("scripted backend has no responses left")]
    ScriptExhausted,
    #[error("network access refused: {0}")]
    NetworkForbidden(String),
    #[error("embedding failure: {0}")]
    Embedding(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("missing API key: environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("cassette I/O: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    Record,
    Replay,
    Mock,
}

impl BackendMode {
    pub fn is_offline(self) -> bool {
        matches!(self, BackendMode::Replay | BackendMode::Mock)
    }
}

impl fmt::Display for BackendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendMode::Live => "live",
            BackendMode::Record => "record",
            BackendMode::Replay => "replay",
            BackendMode::Mock => "mock",
        })
    }
}

impl FromStr for BackendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BackendMode::Live),
            "record" => Ok(BackendMode::Record),
            "replay" => Ok(BackendMode::Replay),
            "mock" => Ok(BackendMode::Mock),
            other => Err(format!("unknown LLM mode {other:?} (expected live|record|replay|mock)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model: String,
    pub system_prompt: String,
    pub user_content: String,
    pub response_schema: Shape,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, system_prompt: impl Into<String>, user_content: impl Into<String>, schema: Shape) -> Self {
        ChatRequest {
            model: model.into(),
            system_prompt: system_prompt.into(),
            user_content: user_content.into(),
            response_schema: schema,
            temperature: 0.0,
        }
    }

    /// Content hash over (model, system prompt, user content, schema).
    pub fn cassette_key(&self) -> String {
        content_hash(&[
            "chat",
            &self.model,
            &self.system_prompt,
            &self.user_content,
            &self.response_schema.fingerprint(),
        ])
    }
}

pub(crate) fn content_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        // length-prefix each field so concatenations cannot collide
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    /// Present iff `content` validates against the request schema.
    pub parsed: Option<Value>,
    pub usage: Usage,
}

impl ChatResponse {
    pub fn from_content(content: String, usage: Usage, schema: &Shape) -> Self {
        let parsed = schema.parse(&content).ok();
        ChatResponse { content, parsed, usage }
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;
    fn mode(&self) -> BackendMode;
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (**self).complete(request)
    }

    fn mode(&self) -> BackendMode {
        (**self).mode()
    }
}

/// Refuses live traffic when [`OFFLINE_ENV`] is set, except to loopback
/// hosts (used by local test servers).
pub fn check_network(url: &str) -> Result<(), BackendError> {
    let offline = std::env::var(OFFLINE_ENV).map(|v| !v.is_empty()).unwrap_or(false);
    if !offline {
        return Ok(());
    }
    let authority = url.split_once("://").map(|(_, rest)| rest).unwrap_or(url);
    let authority = authority.split('/').next().unwrap_or("");
    let host = match authority.strip_prefix('[') {
        Some(v6) => v6.split(']').next().unwrap_or(""),
        None => authority.split(':').next().unwrap_or(""),
    };
    if matches!(host, "127.0.0.1" | "localhost" | "::1") {
        Ok(())
    } else {
        Err(BackendError::NetworkForbidden(format!("{OFFLINE_ENV} is set; refusing request to {url}")))
    }
}
