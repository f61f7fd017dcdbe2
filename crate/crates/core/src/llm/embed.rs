use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{BackendError, BackendMode};

pub trait EmbeddingBackend: Send + Sync {
    /// One vector per input text, in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError>;

    fn mode(&self) -> BackendMode {
        BackendMode::Mock
    }
}

impl<T: EmbeddingBackend + ?Sized> EmbeddingBackend for Arc<T> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        (**self).embed(texts)
    }

    fn mode(&self) -> BackendMode {
        (**self).mode()
    }
}

/// L2-normalizes `v`. Zero or non-finite vectors are rejected.
pub fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>, BackendError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(BackendError::Embedding("cannot normalize a zero or non-finite vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// Cosine similarity of two unit vectors (their dot product).
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Deterministic offline embedder: signed feature hashing of character
/// trigrams over the lowercased alphanumeric form of the text. Equal strings
/// get equal vectors; strings differing only in case, spacing or punctuation
/// collapse together; unrelated strings are close to orthogonal.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dims: usize,
}

impl HashEmbedder {
    pub const DEFAULT_DIMS: usize = 256;

    pub fn new(dims: usize) -> Self {
        HashEmbedder { dims: dims.max(8) }
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let mut key: String = text.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        if key.is_empty() {
            key = text.to_string();
        }
        let padded: Vec<char> = std::iter::once('^').chain(key.chars()).chain(std::iter::once('$')).collect();
        let mut v = vec![0.0; self.dims];
        for gram in padded.windows(3.min(padded.len())) {
            let s: String = gram.iter().collect();
            let h = fnv1a(s.as_bytes());
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[(h % self.dims as u64) as usize] += sign;
        }
        if v.iter().all(|x| *x == 0.0) {
            // features cancelled out; fall back to a single deterministic axis
            v[(fnv1a(key.as_bytes()) % self.dims as u64) as usize] = 1.0;
        }
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(Self::DEFAULT_DIMS)
    }
}

impl EmbeddingBackend for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        texts.iter().map(|t| normalize(self.vector(t))).collect()
    }
}

/// Equal strings map to the same one-hot vector, distinct strings to
/// orthogonal ones. Fuzzy matching with this embedder degenerates to exact
/// matching.
#[derive(Debug)]
pub struct IdentityEmbedder {
    capacity: usize,
    axes: Mutex<HashMap<String, usize>>,
}

impl IdentityEmbedder {
    pub fn new(capacity: usize) -> Self {
        IdentityEmbedder { capacity, axes: Mutex::new(HashMap::new()) }
    }
}

impl Default for IdentityEmbedder {
    fn default() -> Self {
        IdentityEmbedder::new(4096)
    }
}

impl EmbeddingBackend for IdentityEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        let mut axes = self.axes.lock().expect("axis table lock");
        texts
            .iter()
            .map(|t| {
                let next = axes.len();
                let axis = *axes.entry(t.clone()).or_insert(next);
                if axis >= self.capacity {
                    return Err(BackendError::Embedding(format!(
                        "identity embedder capacity {} exhausted",
                        self.capacity
                    )));
                }
                let mut v = vec![0.0; self.capacity];
                v[axis] = 1.0;
                Ok(v)
            })
            .collect()
    }
}

/// Hand-set vectors for fixtures; unknown texts are an error.
#[derive(Debug, Clone, Default)]
pub struct FixedEmbedder {
    vectors: HashMap<String, Vec<f64>>,
}

impl FixedEmbedder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, text: impl Into<String>, vector: Vec<f64>) -> Self {
        self.vectors.insert(text.into(), vector);
        self
    }
}

impl EmbeddingBackend for FixedEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(t)
                    .cloned()
                    .ok_or_else(|| BackendError::Embedding(format!("no fixture vector for {t:?}")))
            })
            .collect()
    }
}

/// Batches requests to an inner embedder, normalizes results, checks that
/// dimensions agree and caches vectors by text for the life of the value.
pub struct CachedEmbedder {
    inner: Arc<dyn EmbeddingBackend>,
    batch_size: usize,
    cache: Mutex<HashMap<String, Vec<f64>>>,
}

impl CachedEmbedder {
    pub fn new(inner: Arc<dyn EmbeddingBackend>, batch_size: usize) -> Self {
        CachedEmbedder { inner, batch_size: batch_size.max(1), cache: Mutex::new(HashMap::new()) }
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("embedding cache lock").len()
    }
}

impl EmbeddingBackend for CachedEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut missing: Vec<String> = {
            let cache = self.cache.lock().expect("embedding cache lock");
            texts.iter().filter(|t| !cache.contains_key(*t)).cloned().collect()
        };
        missing.sort();
        missing.dedup();

        for batch in missing.chunks(self.batch_size) {
            let vectors = self.inner.embed(batch)?;
            if vectors.len() != batch.len() {
                return Err(BackendError::Embedding(format!(
                    "expected {} vectors, got {}",
                    batch.len(),
                    vectors.len()
                )));
            }
            let mut cache = self.cache.lock().expect("embedding cache lock");
            let mut dims = cache.values().next().map(Vec::len);
            for (text, v) in batch.iter().zip(vectors) {
                let expected = *dims.get_or_insert(v.len());
                if v.len() != expected {
                    return Err(BackendError::DimensionMismatch { expected, got: v.len() });
                }
                cache.insert(text.clone(), normalize(v)?);
            }
        }

        let cache = self.cache.lock().expect("embedding cache lock");
        Ok(texts.iter().map(|t| cache[t].clone()).collect())
    }

    fn mode(&self) -> BackendMode {
        self.inner.mode()
    }
}
