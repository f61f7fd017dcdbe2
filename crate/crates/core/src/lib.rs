//! Ontology construction from enterprise text with a two-stage LLM pipeline
//! (element extraction, then pairwise subsumption judgments), deterministic
//! RDF/Turtle serialization, and exact/fuzzy triple-matching evaluation.

pub mod config;
pub mod entailment;
pub mod evaluation;
pub mod extraction;
pub mod fanout;
pub mod graph;
pub mod ingestion;
pub mod llm;
pub mod model;
pub mod pipeline;
pub mod prompts;
pub mod serialization;
pub mod validate;

pub use model::{canonicalize, mint_class_iri, mint_property_iri, CanonicalForm, Iri, Label, Ontology};
pub use validate::{validate_ontology, Violation, ViolationCode};
