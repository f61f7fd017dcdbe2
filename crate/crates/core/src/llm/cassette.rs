//! Record/replay of backend traffic as JSON Lines.
//!
//! Each line is one [`CassetteEntry`]. Entries are looked up by a content
//! hash of the request, so reordering calls (or running them concurrently)
//! does not invalidate a cassette. [`MatchMode::Sequence`] replays chat
//! entries in file order instead, for prompts that are not reproducible.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{content_hash, BackendError, BackendMode, ChatBackend, ChatRequest, ChatResponse, EmbeddingBackend, Usage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub key: String,
    pub model: String,
    #[serde(flatten)]
    pub response: Recorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recorded {
    Chat {
        content: String,
        #[serde(default)]
        usage: Usage,
    },
    Embedding {
        text: String,
        vector: Vec<f64>,
    },
}

#[derive(Debug, Default)]
struct State {
    entries: Vec<CassetteEntry>,
    index: HashMap<String, usize>,
    chat_cursor: usize,
}

impl State {
    fn push(&mut self, entry: CassetteEntry) {
        self.index.insert(entry.key.clone(), self.entries.len());
        self.entries.push(entry);
    }
}

/// Shared, write-serialized cassette file.
#[derive(Debug)]
pub struct CassetteStore {
    path: Option<PathBuf>,
    state: Mutex<State>,
}

impl CassetteStore {
    pub fn in_memory() -> Self {
        CassetteStore { path: None, state: Mutex::new(State::default()) }
    }

    /// Opens an existing cassette; fails if the file is missing or malformed.
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path).map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
        let mut state = State::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CassetteEntry = serde_json::from_str(line)
                .map_err(|e| BackendError::Io(format!("{}:{}: {e}", path.display(), n + 1)))?;
            state.push(entry);
        }
        Ok(CassetteStore { path: Some(path.to_path_buf()), state: Mutex::new(state) })
    }

    /// Opens a cassette for recording, creating it if needed. New entries
    /// are appended.
    pub fn open_or_create(path: &Path) -> Result<Self, BackendError> {
        if path.exists() {
            return Self::open(path);
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| BackendError::Io(format!("{}: {e}", parent.display())))?;
        }
        fs::write(path, "").map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
        Ok(CassetteStore { path: Some(path.to_path_buf()), state: Mutex::new(State::default()) })
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cassette lock").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<CassetteEntry> {
        self.state.lock().expect("cassette lock").entries.clone()
    }

    pub fn get(&self, key: &str) -> Option<CassetteEntry> {
        let state = self.state.lock().expect("cassette lock");
        state.index.get(key).map(|&i| state.entries[i].clone())
    }

    fn next_chat(&self) -> Option<CassetteEntry> {
        let mut state = self.state.lock().expect("cassette lock");
        while state.chat_cursor < state.entries.len() {
            let i = state.chat_cursor;
            state.chat_cursor += 1;
            if matches!(state.entries[i].response, Recorded::Chat { .. }) {
                return Some(state.entries[i].clone());
            }
        }
        None
    }

    pub fn append(&self, entry: CassetteEntry) -> Result<(), BackendError> {
        let mut state = self.state.lock().expect("cassette lock");
        if let Some(path) = &self.path {
            let line = serde_json::to_string(&entry).map_err(|e| BackendError::Io(e.to_string()))?;
            let mut file = OpenOptions::new()
                .append(true)
                .create(true)
                .open(path)
                .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
            writeln!(file, "{line}").map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
        }
        state.push(entry);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    #[default]
    ByKey,
    Sequence,
}

pub enum CassetteMode {
    Record(Arc<dyn ChatBackend>),
    Replay(MatchMode),
}

pub struct CassetteChat {
    store: Arc<CassetteStore>,
    mode: CassetteMode,
}

impl CassetteChat {
    pub fn replay(store: Arc<CassetteStore>) -> Self {
        CassetteChat { store, mode: CassetteMode::Replay(MatchMode::ByKey) }
    }

    pub fn replay_sequence(store: Arc<CassetteStore>) -> Self {
        CassetteChat { store, mode: CassetteMode::Replay(MatchMode::Sequence) }
    }

    pub fn record(store: Arc<CassetteStore>, inner: Arc<dyn ChatBackend>) -> Self {
        CassetteChat { store, mode: CassetteMode::Record(inner) }
    }
}

impl ChatBackend for CassetteChat {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let key = request.cassette_key();
        match &self.mode {
            CassetteMode::Replay(match_mode) => {
                let entry = match match_mode {
                    MatchMode::ByKey => self.store.get(&key),
                    MatchMode::Sequence => self.store.next_chat(),
                };
                match entry.map(|e| e.response) {
                    Some(Recorded::Chat { content, usage }) => {
                        Ok(ChatResponse::from_content(content, usage, &request.response_schema))
                    }
                    _ => Err(BackendError::CassetteMiss { hash: key }),
                }
            }
            CassetteMode::Record(inner) => {
                let response = inner.complete(request)?;
                self.store.append(CassetteEntry {
                    key,
                    model: request.model.clone(),
                    response: Recorded::Chat { content: response.content.clone(), usage: response.usage },
                })?;
                Ok(response)
            }
        }
    }

    fn mode(&self) -> BackendMode {
        match self.mode {
            CassetteMode::Record(_) => BackendMode::Record,
            CassetteMode::Replay(_) => BackendMode::Replay,
        }
    }
}

pub struct CassetteEmbedder {
    store: Arc<CassetteStore>,
    model: String,
    inner: Option<Arc<dyn EmbeddingBackend>>,
}

impl CassetteEmbedder {
    pub fn replay(store: Arc<CassetteStore>, model: impl Into<String>) -> Self {
        CassetteEmbedder { store, model: model.into(), inner: None }
    }

    pub fn record(store: Arc<CassetteStore>, model: impl Into<String>, inner: Arc<dyn EmbeddingBackend>) -> Self {
        CassetteEmbedder { store, model: model.into(), inner: Some(inner) }
    }

    fn key(&self, text: &str) -> String {
        content_hash(&["embedding", &self.model, text])
    }
}

impl EmbeddingBackend for CassetteEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        match &self.inner {
            None => texts
                .iter()
                .map(|t| {
                    let key = self.key(t);
                    match self.store.get(&key).map(|e| e.response) {
                        Some(Recorded::Embedding { vector, .. }) => Ok(vector),
                        _ => Err(BackendError::CassetteMiss { hash: key }),
                    }
                })
                .collect(),
            Some(inner) => {
                let vectors = inner.embed(texts)?;
                for (text, vector) in texts.iter().zip(&vectors) {
                    self.store.append(CassetteEntry {
                        key: self.key(text),
                        model: self.model.clone(),
                        response: Recorded::Embedding { text: text.clone(), vector: vector.clone() },
                    })?;
                }
                Ok(vectors)
            }
        }
    }

    fn mode(&self) -> BackendMode {
        if self.inner.is_some() {
            BackendMode::Record
        } else {
            BackendMode::Replay
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{HashEmbedder, ScriptedBackend, Shape};

    fn request(user: &str) -> ChatRequest {
        ChatRequest::new("m", "sys", user, Shape::object([("holds", Shape::Bool)]))
    }

    #[test]
    fn record_then_replay_by_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let inner = Arc::new(ScriptedBackend::new([r#"{"holds":true}"#, r#"{"holds":false}"#]));
        {
            let store = Arc::new(CassetteStore::open_or_create(&path).unwrap());
            let rec = CassetteChat::record(store, inner.clone());
            assert_eq!(rec.mode(), BackendMode::Record);
            rec.complete(&request("a")).unwrap();
            rec.complete(&request("b")).unwrap();
        }
        let store = Arc::new(CassetteStore::open(&path).unwrap());
        assert_eq!(store.len(), 2);
        let replay = CassetteChat::replay(store);
        // order does not matter when matching by key
        assert_eq!(replay.complete(&request("b")).unwrap().content, r#"{"holds":false}"#);
        let a = replay.complete(&request("a")).unwrap();
        assert_eq!(a.content, r#"{"holds":true}"#);
        assert!(a.parsed.is_some());
        assert_eq!(inner.remaining(), 0);
    }

    #[test]
    fn replay_miss_names_the_hash() {
        let replay = CassetteChat::replay(Arc::new(CassetteStore::in_memory()));
        let req = request("absent");
        assert_eq!(replay.complete(&req).unwrap_err(), BackendError::CassetteMiss { hash: req.cassette_key() });
    }

    #[test]
    fn sequence_mode_ignores_keys() {
        let store = Arc::new(CassetteStore::in_memory());
        for content in ["first", "second"] {
            store
                .append(CassetteEntry {
                    key: content.into(),
                    model: "m".into(),
                    response: Recorded::Chat { content: content.into(), usage: Usage::default() },
                })
                .unwrap();
        }
        let replay = CassetteChat::replay_sequence(store);
        assert_eq!(replay.complete(&request("x")).unwrap().content, "first");
        assert_eq!(replay.complete(&request("y")).unwrap().content, "second");
        assert!(replay.complete(&request("z")).is_err());
    }

    #[test]
    fn entry_line_format() {
        let entry = CassetteEntry {
            key: "k".into(),
            model: "m".into(),
            response: Recorded::Chat { content: "{}".into(), usage: Usage { prompt_tokens: 1, completion_tokens: 2 } },
        };
        let line = serde_json::to_string(&entry).unwrap();
        assert_eq!(line, r#"{"key":"k","model":"m","chat":{"content":"{}","usage":{"prompt_tokens":1,"completion_tokens":2}}}"#);
        assert_eq!(serde_json::from_str::<CassetteEntry>(&line).unwrap(), entry);
    }

    #[test]
    fn embeddings_record_and_replay() {
        let store = Arc::new(CassetteStore::in_memory());
        let texts = vec!["Policy".to_string(), "Asset".to_string()];
        let rec = CassetteEmbedder::record(store.clone(), "emb", Arc::new(HashEmbedder::default()));
        let recorded = rec.embed(&texts).unwrap();
        let replay = CassetteEmbedder::replay(store, "emb");
        assert_eq!(replay.embed(&texts).unwrap(), recorded);
        assert!(matches!(replay.embed(&["Other".to_string()]), Err(BackendError::CassetteMiss { .. })));
    }
}
