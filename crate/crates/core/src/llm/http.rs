//! Adapters for OpenAI-compatible `chat/completions` and `embeddings`
//! endpoints (OpenAI, OpenRouter, LiteLLM, the Gemini compatibility layer,
//! and similar gateways).

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use rand::Rng;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{check_network, BackendError, BackendMode, ChatBackend, ChatRequest, ChatResponse, EmbeddingBackend, Usage};

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, base_delay: Duration::from_secs(1) }
    }
}

impl RetryPolicy {
    /// Exponential backoff with up to 50% random jitter.
    fn delay(&self, attempt: u32) -> Duration {
        let base = self.base_delay.saturating_mul(1 << attempt.min(16));
        let jitter = rand::thread_rng().gen_range(0.0..=0.5);
        base.mul_f64(1.0 + jitter)
    }
}

#[derive(Debug, Clone)]
pub struct HttpSettings {
    pub base_url: String,
    pub api_key: String,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl HttpSettings {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        HttpSettings {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            timeout: Duration::from_secs(120),
        }
    }

    /// Reads the API key from `key_env`.
    pub fn from_env(base_url: impl Into<String>, key_env: &str) -> Result<Self, BackendError> {
        let key = std::env::var(key_env).map_err(|_| BackendError::MissingApiKey(key_env.to_string()))?;
        Ok(Self::new(base_url, key))
    }
}

/// Counting gate bounding concurrent requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(slots: usize) -> Self {
        Gate { free: Mutex::new(slots.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("gate lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate lock");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate lock") += 1;
        self.0.cv.notify_one();
    }
}

struct HttpCore {
    client: Client,
    settings: HttpSettings,
    gate: Gate,
}

impl HttpCore {
    fn new(settings: HttpSettings) -> Result<Self, BackendError> {
        check_network(&settings.base_url)?;
        let client = Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| BackendError::Http(e.to_string()))?;
        let gate = Gate::new(settings.max_in_flight);
        Ok(HttpCore { client, settings, gate })
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, BackendError> {
        let url = format!("{}/{path}", self.settings.base_url);
        check_network(&url)?;
        let _permit = self.gate.acquire();
        let attempts = self.settings.retry.attempts.max(1);
        let mut last = BackendError::Http("no attempt made".into());
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(self.settings.retry.delay(attempt - 1));
            }
            let sent = self.client.post(&url).bearer_auth(&self.settings.api_key).json(body).send();
            let response = match sent {
                Ok(r) => r,
                Err(e) => {
                    last = BackendError::Http(e.to_string());
                    continue;
                }
            };
            let status = response.status();
            if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
                let text = response.text().unwrap_or_default();
                return Err(BackendError::Auth(format!("{status}: {}", truncate(&text))));
            }
            if status == StatusCode::TOO_MANY_REQUESTS {
                last = BackendError::RateLimited { attempts: attempt + 1 };
                continue;
            }
            if status.is_server_error() {
                last = BackendError::Http(format!("{status}"));
                continue;
            }
            let text = response.text().map_err(|e| BackendError::Http(e.to_string()))?;
            if !status.is_success() {
                return Err(BackendError::Http(format!("{status}: {}", truncate(&text))));
            }
            return serde_json::from_str(&text).map_err(|e| BackendError::Http(format!("malformed response body: {e}")));
        }
        Err(last)
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(300) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

pub(crate) fn chat_body(request: &ChatRequest) -> Value {
    json!({
        "model": request.model,
        "temperature": request.temperature,
        "messages": [
            {"role": "system", "content": request.system_prompt},
            {"role": "user", "content": request.user_content},
        ],
        "response_format": {
            "type": "json_schema",
            "json_schema": {
                "name": "response",
                "strict": true,
                "schema": request.response_schema.to_json_schema(),
            }
        }
    })
}

pub(crate) fn parse_chat_body(body: &Value) -> Result<(String, Usage), BackendError> {
    let content = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Http("response has no choices[0].message.content".into()))?;
    let usage = Usage {
        prompt_tokens: body.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: body.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    };
    Ok((content.to_string(), usage))
}

pub(crate) fn parse_embedding_body(body: &Value, expected: usize) -> Result<Vec<Vec<f64>>, BackendError> {
    let data = body
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| BackendError::Embedding("response has no data array".into()))?;
    let mut rows: Vec<(u64, Vec<f64>)> = data
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let index = item.get("index").and_then(Value::as_u64).unwrap_or(i as u64);
            let vector = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| BackendError::Embedding("item without embedding".into()))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| BackendError::Embedding("non-numeric component".into())))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok((index, vector))
        })
        .collect::<Result<_, BackendError>>()?;
    rows.sort_by_key(|(i, _)| *i);
    if rows.len() != expected {
        return Err(BackendError::Embedding(format!("expected {expected} embeddings, got {}", rows.len())));
    }
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}

pub struct OpenAiChat {
    core: HttpCore,
}

impl OpenAiChat {
    pub fn new(settings: HttpSettings) -> Result<Self, BackendError> {
        Ok(OpenAiChat { core: HttpCore::new(settings)? })
    }
}

impl ChatBackend for OpenAiChat {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let body = self.core.post("chat/completions", &chat_body(request))?;
        let (content, usage) = parse_chat_body(&body)?;
        Ok(ChatResponse::from_content(content, usage, &request.response_schema))
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Live
    }
}

pub struct OpenAiEmbedder {
    core: HttpCore,
    model: String,
}

impl OpenAiEmbedder {
    pub fn new(settings: HttpSettings, model: impl Into<String>) -> Result<Self, BackendError> {
        Ok(OpenAiEmbedder { core: HttpCore::new(settings)?, model: model.into() })
    }
}

impl EmbeddingBackend for OpenAiEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = self.core.post("embeddings", &json!({"model": self.model, "input": texts}))?;
        parse_embedding_body(&body, texts.len())
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Live
    }
}
