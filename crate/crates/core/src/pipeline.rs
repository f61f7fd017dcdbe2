//! End-to-end orchestration: backend wiring, the stage functions behind each
//! CLI command, and the files a run writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::entailment::{
    apply_hierarchy, build_hierarchy, generate_candidate_pairs, judge_all, Conflict, EntailmentError, JudgeSettings,
    SubsumptionVerdict,
};
use crate::extraction::{assemble, extract_schema, reify_datatypes, resolve_references, ExtractionError, ExtractionResult, Repair};
use crate::fanout::try_map_bounded;
use crate::ingestion::{load_corpus, Document, IngestError};
use crate::llm::{
    BackendError, BackendMode, CachedEmbedder, CassetteChat, CassetteEmbedder, CassetteStore, ChatBackend,
    EmbeddingBackend, HashEmbedder, HttpSettings, IdentityEmbedder, OpenAiChat, OpenAiEmbedder,
};
use crate::model::Ontology;
use crate::prompts::Prompts;
use crate::serialization::{emit_turtle, to_triples};
use crate::validate::{has_fatal, validate_ontology, Violation};

pub const LLM_BASE_URL_ENV: &str = "ONTOEKG_LLM_BASE_URL";
pub const EMBEDDING_BASE_URL_ENV: &str = "ONTOEKG_EMBEDDING_BASE_URL";
const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("no readable documents under {0}")]
    EmptyCorpus(PathBuf),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Entailment(#[from] EntailmentError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Errors caused by how the tool was invoked rather than by a stage.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            PipelineError::Usage(_)
                | PipelineError::Ingest(IngestError::MissingPath(_))
                | PipelineError::Backend(BackendError::MissingApiKey(_))
        )
    }
}

/// Chat and embedding backends for one run.
pub struct Backends {
    pub chat: Arc<dyn ChatBackend>,
    pub embedder: Arc<dyn EmbeddingBackend>,
    pub mode: BackendMode,
}

fn base_url(configured: &Option<String>, env: &str) -> String {
    configured
        .clone()
        .or_else(|| std::env::var(env).ok().filter(|v| !v.trim().is_empty()))
        .unwrap_or_else(|| DEFAULT_BASE_URL.to_string())
}

fn builtin_embedder(model: &str) -> Option<Arc<dyn EmbeddingBackend>> {
    match model {
        "builtin:hash" => Some(Arc::new(HashEmbedder::default())),
        "builtin:identity" => Some(Arc::new(IdentityEmbedder::default())),
        _ => None,
    }
}

fn live_chat(cfg: &PipelineConfig) -> Result<Arc<dyn ChatBackend>, BackendError> {
    let mut settings = HttpSettings::from_env(base_url(&cfg.llm_base_url, LLM_BASE_URL_ENV), &cfg.llm_api_key_env)?;
    settings.max_in_flight = cfg.max_in_flight;
    Ok(Arc::new(OpenAiChat::new(settings)?))
}

fn live_embedder(cfg: &PipelineConfig) -> Result<Arc<dyn EmbeddingBackend>, BackendError> {
    let mut settings =
        HttpSettings::from_env(base_url(&cfg.embedding_base_url, EMBEDDING_BASE_URL_ENV), &cfg.embedding_api_key_env)?;
    settings.max_in_flight = cfg.max_in_flight;
    Ok(Arc::new(OpenAiEmbedder::new(settings, &cfg.embedding_model)?))
}

impl Backends {
    /// Wires backends for `mode`.
    ///
    /// * `live`: HTTP adapters; API keys come from the configured env vars.
    /// * `record`: HTTP adapters whose traffic is appended to the cassette.
    /// * `replay`: responses looked up in the cassette by request hash.
    /// * `mock`: chat responses taken from the cassette in file order; the
    ///   offline hash embedder unless a builtin embedder is configured.
    ///
    /// An `embedding_model` of `builtin:hash` or `builtin:identity` selects
    /// the offline embedders in every mode.
    ///
    /// Live services are contacted lazily, so e.g. `validate` never needs
    /// credentials.
    pub fn from_config(cfg: &PipelineConfig, mode: BackendMode, needs: Needs) -> Result<Self, PipelineError> {
        let cassette = || -> Result<&Path, PipelineError> {
            cfg.cassette
                .as_deref()
                .ok_or_else(|| PipelineError::Usage(format!("--llm-mode {mode} requires --cassette")))
        };
        let builtin = builtin_embedder(&cfg.embedding_model);
        let unused_chat = || -> Arc<dyn ChatBackend> { Arc::new(crate::llm::ScriptedBackend::default()) };
        let unused_embedder = || -> Arc<dyn EmbeddingBackend> { Arc::new(HashEmbedder::default()) };

        let (chat, embedder): (Arc<dyn ChatBackend>, Arc<dyn EmbeddingBackend>) = match mode {
            BackendMode::Live => {
                let chat = if needs.chat { live_chat(cfg)? } else { unused_chat() };
                let embedder = match builtin {
                    Some(e) => e,
                    None if needs.embeddings => live_embedder(cfg)?,
                    None => unused_embedder(),
                };
                (chat, embedder)
            }
            BackendMode::Record => {
                let store = Arc::new(CassetteStore::open_or_create(cassette()?)?);
                let chat: Arc<dyn ChatBackend> =
                    if needs.chat { Arc::new(CassetteChat::record(store.clone(), live_chat(cfg)?)) } else { unused_chat() };
                let embedder: Arc<dyn EmbeddingBackend> = match builtin {
                    Some(e) => e,
                    None if needs.embeddings => {
                        Arc::new(CassetteEmbedder::record(store, &cfg.embedding_model, live_embedder(cfg)?))
                    }
                    None => unused_embedder(),
                };
                (chat, embedder)
            }
            BackendMode::Replay => {
                let needs_store = needs.chat || (needs.embeddings && builtin.is_none());
                let store = if needs_store { Some(Arc::new(CassetteStore::open(cassette()?)?)) } else { None };
                let chat: Arc<dyn ChatBackend> = match (&store, needs.chat) {
                    (Some(s), true) => Arc::new(CassetteChat::replay(s.clone())),
                    _ => unused_chat(),
                };
                let embedder: Arc<dyn EmbeddingBackend> = match (builtin, &store) {
                    (Some(e), _) => e,
                    (None, Some(s)) => Arc::new(CassetteEmbedder::replay(s.clone(), &cfg.embedding_model)),
                    (None, None) => unused_embedder(),
                };
                (chat, embedder)
            }
            BackendMode::Mock => {
                let chat: Arc<dyn ChatBackend> = if needs.chat {
                    Arc::new(CassetteChat::replay_sequence(Arc::new(CassetteStore::open(cassette()?)?)))
                } else {
                    unused_chat()
                };
                (chat, builtin.unwrap_or_else(unused_embedder))
            }
        };
        let embedder = Arc::new(CachedEmbedder::new(embedder, cfg.embedding_batch_size));
        Ok(Backends { chat, embedder, mode })
    }
}

/// Which backends a command will call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub chat: bool,
    pub embeddings: bool,
}

impl Needs {
    pub const CHAT: Needs = Needs { chat: true, embeddings: false };
    pub const EMBEDDINGS: Needs = Needs { chat: false, embeddings: true };
    pub const NONE: Needs = Needs { chat: false, embeddings: false };
}

/// Intermediate artifact written by `extract` and read by `entail`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionArtifact {
    pub documents: Vec<DocumentExtraction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentExtraction {
    pub document: String,
    pub retries: usize,
    #[serde(flatten)]
    pub result: ExtractionResult,
}

/// One line of the repair log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedRepair {
    pub document: String,
    #[serde(flatten)]
    pub repair: Repair,
}

pub fn load_documents(input: &Path) -> Result<Vec<Document>, PipelineError> {
    let corpus = load_corpus(input)?;
    if corpus.documents.is_empty() {
        return Err(PipelineError::EmptyCorpus(input.to_path_buf()));
    }
    Ok(corpus.documents)
}

/// Runs extraction over `docs`, up to `max_in_flight` documents at a time.
pub fn run_extraction(
    docs: &[Document],
    chat: &dyn ChatBackend,
    cfg: &PipelineConfig,
    prompts: &Prompts,
) -> Result<ExtractionArtifact, PipelineError> {
    let documents = try_map_bounded(docs, cfg.max_in_flight, |doc| {
        let out = extract_schema(doc, chat, cfg, &prompts.extraction)?;
        log::info!(
            "{}: {} classes, {} properties ({} retries)",
            doc.id,
            out.result.classes.len(),
            out.result.properties.len(),
            out.retries
        );
        Ok::<_, ExtractionError>(DocumentExtraction { document: doc.id.clone(), retries: out.retries, result: out.result })
    })?;
    Ok(ExtractionArtifact { documents })
}

/// Reifies datatypes and resolves references per document, then merges all
/// documents into one ontology without hierarchy.
pub fn assemble_artifact(artifact: &ExtractionArtifact, cfg: &PipelineConfig) -> (Ontology, Vec<LoggedRepair>) {
    let mut classes = Vec::new();
    let mut properties = Vec::new();
    let mut repairs = Vec::new();
    for doc in &artifact.documents {
        let resolved = resolve_references(reify_datatypes(doc.result.clone()), cfg.repair_policy);
        classes.extend(resolved.classes);
        properties.extend(resolved.properties);
        repairs.extend(resolved.repairs.into_iter().map(|repair| LoggedRepair { document: doc.document.clone(), repair }));
    }
    (assemble(&cfg.base_iri, &classes, &properties), repairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentOutcome {
    pub verdicts: Vec<SubsumptionVerdict>,
    pub conflicts: Vec<Conflict>,
    pub truncated: usize,
}

/// Judges candidate pairs (reusing any matching `prior` verdicts), builds the
/// hierarchy and adds it to `o`.
pub fn run_entailment(
    o: &mut Ontology,
    chat: &dyn ChatBackend,
    cfg: &PipelineConfig,
    prompts: &Prompts,
    prior: &[SubsumptionVerdict],
) -> Result<EntailmentOutcome, PipelineError> {
    let classes: Vec<_> = o.classes.values().cloned().collect();
    let candidates = generate_candidate_pairs(&classes, cfg.max_entailment_pairs);
    let known: BTreeMap<_, _> = prior.iter().map(|v| (&v.query, v)).collect();
    let pending: Vec<_> = candidates.queries.iter().filter(|q| !known.contains_key(q)).cloned().collect();
    log::info!("{} candidate pairs, {} to judge", candidates.queries.len(), pending.len());
    let settings = JudgeSettings { model: &cfg.entailment_model, system_prompt: &prompts.entailment, temperature: cfg.temperature };
    let judged = judge_all(&pending, chat, settings, cfg.max_in_flight)?;
    let fresh: BTreeMap<_, _> = judged.into_iter().map(|j| (j.verdict.query.clone(), j.verdict)).collect();
    let verdicts: Vec<SubsumptionVerdict> = candidates
        .queries
        .iter()
        .map(|q| fresh.get(q).cloned().unwrap_or_else(|| known[q].clone()))
        .collect();
    let hierarchy = build_hierarchy(&verdicts);
    apply_hierarchy(o, &hierarchy.edges);
    Ok(EntailmentOutcome { verdicts, conflicts: hierarchy.conflicts, truncated: candidates.truncated })
}

/// Everything a `build` or `entail` run produces.
#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub ontology: Ontology,
    pub turtle: String,
    pub repairs: Vec<LoggedRepair>,
    pub conflicts: Vec<Conflict>,
    pub violations: Vec<Violation>,
    pub verdicts: Vec<SubsumptionVerdict>,
    pub manifest: Manifest,
}

impl BuildOutput {
    /// Strict runs fail on fatal violations and on any hierarchy conflict.
    pub fn fails_strict(&self) -> bool {
        has_fatal(&self.violations) || !self.conflicts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub llm_mode: BackendMode,
    pub extraction_model: String,
    pub entailment_model: String,
    pub embedding_model: String,
    pub extraction_prompt_sha256: String,
    pub entailment_prompt_sha256: String,
    pub documents: Vec<String>,
    pub classes: usize,
    pub properties: usize,
    pub subclass_edges: usize,
    pub repairs: usize,
    pub conflicts: usize,
    pub truncated_pairs: usize,
    pub violations: usize,
}

/// Entailment, validation and serialization over an extraction artifact.
pub fn entail_artifact(
    artifact: &ExtractionArtifact,
    backends: &Backends,
    cfg: &PipelineConfig,
    prompts: &Prompts,
    prior: &[SubsumptionVerdict],
) -> Result<BuildOutput, PipelineError> {
    let (mut ontology, repairs) = assemble_artifact(artifact, cfg);
    let entailment = run_entailment(&mut ontology, backends.chat.as_ref(), cfg, prompts, prior)?;
    let violations = validate_ontology(&ontology);
    for v in &violations {
        log::warn!("{}: {}", v.code.as_str(), v.message);
    }
    let turtle = emit_turtle(&to_triples(&ontology), &ontology.base_iri);
    let manifest = Manifest {
        llm_mode: backends.mode,
        extraction_model: cfg.extraction_model.clone(),
        entailment_model: cfg.entailment_model.clone(),
        embedding_model: cfg.embedding_model.clone(),
        extraction_prompt_sha256: prompts.extraction_hash(),
        entailment_prompt_sha256: prompts.entailment_hash(),
        documents: artifact.documents.iter().map(|d| d.document.clone()).collect(),
        classes: ontology.classes.len(),
        properties: ontology.properties.len(),
        subclass_edges: ontology.hierarchy.len(),
        repairs: repairs.len(),
        conflicts: entailment.conflicts.len(),
        truncated_pairs: entailment.truncated,
        violations: violations.len(),
    };
    Ok(BuildOutput {
        ontology,
        turtle,
        repairs,
        conflicts: entailment.conflicts,
        violations,
        verdicts: entailment.verdicts,
        manifest,
    })
}

/// The full pipeline over a file or directory of `.txt` documents.
pub fn build(input: &Path, backends: &Backends, cfg: &PipelineConfig, prompts: &Prompts) -> Result<BuildOutput, PipelineError> {
    let docs = load_documents(input)?;
    let artifact = run_extraction(&docs, backends.chat.as_ref(), cfg, prompts)?;
    entail_artifact(&artifact, backends, cfg, prompts, &[])
}

/// Sibling path `<dir>/<stem><suffix>` of `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ontology".into());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Write { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| PipelineError::Write { path: path.to_path_buf(), source })
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|i| serde_json::to_string(i).expect("log records serialize") + "\n").collect()
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifacts serialize") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    write(path, &to_pretty_json(value))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::Usage(format!("{} does not exist", path.display())));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| PipelineError::Artifact { path: path.to_path_buf(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Artifact { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes the repair log, conflict log, verdicts and manifest next to `out`,
/// and the Turtle file itself unless `write_turtle` is false.
pub fn write_outputs(out: &Path, output: &BuildOutput, write_turtle: bool) -> Result<(), PipelineError> {
    write(&sibling(out, ".repairs.jsonl"), &jsonl(&output.repairs))?;
    write(&sibling(out, ".conflicts.jsonl"), &jsonl(&output.conflicts))?;
    write_json(&sibling(out, ".verdicts.json"), &output.verdicts)?;
    write_json(&sibling(out, ".manifest.json"), &output.manifest)?;
    if write_turtle {
        write(out, &output.turtle)?;
    }
    Ok(())
}
