//! Schema-constrained extraction of classes and properties, datatype
//! reification and reference resolution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::ingestion::{window, Document};
use crate::llm::{call_structured, ChatBackend, ChatRequest, Shape, StructuredError};
use crate::model::{normalize_key, Iri, Label, Ontology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCandidate {
    pub label: Label,
    pub description: String,
    /// Set by [`reify_datatypes`]; never part of an LLM response.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reified_datatype: bool,
}

impl ClassCandidate {
    pub fn new(label: Label, description: impl Into<String>) -> Self {
        ClassCandidate { label, description: description.into(), reified_datatype: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCandidate {
    pub label: Label,
    pub description: String,
    pub domain: Label,
    pub range: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub classes: Vec<ClassCandidate>,
    pub properties: Vec<PropertyCandidate>,
}

impl ExtractionResult {
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.properties.is_empty()
    }

    pub fn extend(&mut self, other: ExtractionResult) {
        self.classes.extend(other.classes);
        self.properties.extend(other.properties);
    }
}

/// The strict response schema the extraction model must follow.
pub fn extraction_shape() -> Shape {
    Shape::object([
        (
            "classes",
            Shape::array(Shape::object([("label", Shape::String), ("description", Shape::String)])),
        ),
        (
            "properties",
            Shape::array(Shape::object([
                ("label", Shape::String),
                ("description", Shape::String),
                ("domain", Shape::String),
                ("range", Shape::String),
            ])),
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("extraction failed for document {document}: {source}")]
pub struct ExtractionError {
    pub document: String,
    #[source]
    pub source: StructuredError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub result: ExtractionResult,
    /// Repair retries summed over all windows of the document.
    pub retries: usize,
}

/// Extracts candidates from one document, one request per window, and
/// concatenates the per-window results.
pub fn extract_schema(
    doc: &Document,
    backend: &dyn ChatBackend,
    cfg: &PipelineConfig,
    system_prompt: &str,
) -> Result<Extraction, ExtractionError> {
    let mut out = Extraction { result: ExtractionResult::default(), retries: 0 };
    for segment in window(doc, cfg.max_chars_per_request) {
        let mut request = ChatRequest::new(&cfg.extraction_model, system_prompt, segment, extraction_shape());
        request.temperature = cfg.temperature;
        let outcome = call_structured::<ExtractionResult, _>(backend, &request, |_| Ok(()))
            .map_err(|source| ExtractionError { document: doc.id.clone(), source })?;
        out.retries += outcome.retries;
        out.result.extend(outcome.value);
    }
    Ok(out)
}

/// Canonical class label for a datatype range, if `label` names one.
pub fn datatype_class(label: &str) -> Option<&'static str> {
    let lower = label.trim().to_ascii_lowercase();
    let bare = lower.strip_prefix("xsd:").unwrap_or(&lower);
    Some(match bare {
        "string" | "text" => "Text",
        "integer" | "int" | "number" => "Integer",
        "decimal" | "float" => "Float",
        "boolean" => "Boolean",
        "date" => "Date",
        "datetime" => "DateTime",
        "url" | "uri" => "URL",
        _ => return None,
    })
}

/// Rewrites datatype ranges to their canonical class labels and makes sure
/// each such class exists and is flagged as a reified datatype.
pub fn reify_datatypes(mut r: ExtractionResult) -> ExtractionResult {
    let mut needed: Vec<&'static str> = Vec::new();
    for p in &mut r.properties {
        if let Some(canonical) = datatype_class(p.range.as_str()) {
            p.range = Label::new(canonical).expect("canonical datatype labels are valid");
            if !needed.contains(&canonical) {
                needed.push(canonical);
            }
        }
    }
    for canonical in needed {
        let key = normalize_key(canonical);
        let mut found = false;
        for c in r.classes.iter_mut().filter(|c| c.label.key() == key) {
            c.reified_datatype = true;
            found = true;
        }
        if !found {
            let mut class = ClassCandidate::new(Label::new(canonical).expect("valid"), "");
            class.reified_datatype = true;
            r.classes.push(class);
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairPolicy {
    /// Create the missing class with an empty description.
    #[default]
    AutoAdd,
    /// Remove the property.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepairKind {
    AutoAdd,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repair {
    pub kind: RepairKind,
    pub property: Label,
    pub missing: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolved {
    pub classes: Vec<ClassCandidate>,
    pub properties: Vec<PropertyCandidate>,
    pub repairs: Vec<Repair>,
}

/// Makes every property's domain and range name a class, by adding the
/// missing classes or dropping the property. One repair is recorded per
/// missing label.
pub fn resolve_references(r: ExtractionResult, policy: RepairPolicy) -> Resolved {
    let mut known: BTreeSet<String> = r.classes.iter().map(|c| c.label.key()).collect();
    let mut out = Resolved { classes: r.classes, properties: Vec::new(), repairs: Vec::new() };
    for p in r.properties {
        let mut missing: Vec<Label> = Vec::new();
        for end in [&p.domain, &p.range] {
            if !known.contains(&end.key()) && !missing.iter().any(|m| m.key() == end.key()) {
                missing.push(end.clone());
            }
        }
        match policy {
            RepairPolicy::AutoAdd => {
                for label in missing {
                    known.insert(label.key());
                    out.classes.push(ClassCandidate::new(label.clone(), ""));
                    out.repairs.push(Repair { kind: RepairKind::AutoAdd, property: p.label.clone(), missing: label });
                }
                out.properties.push(p);
            }
            RepairPolicy::Drop if !missing.is_empty() => {
                for label in missing {
                    out.repairs.push(Repair { kind: RepairKind::Drop, property: p.label.clone(), missing: label });
                }
            }
            RepairPolicy::Drop => out.properties.push(p),
        }
    }
    out
}

/// Builds an ontology (without hierarchy) from resolved candidates. Classes
/// with equal normalized labels merge; properties whose ends are unknown are
/// skipped with a warning.
pub fn assemble(base_iri: &Iri, classes: &[ClassCandidate], properties: &[PropertyCandidate]) -> Ontology {
    let mut o = Ontology::new(base_iri.clone());
    for c in classes {
        o.add_class(c.label.clone(), &c.description, c.reified_datatype);
    }
    for p in properties {
        let domain = o.class_by_label(&p.domain).map(|c| c.iri.clone());
        let range = o.class_by_label(&p.range).map(|c| c.iri.clone());
        match (domain, range) {
            (Some(domain), Some(range)) => {
                o.add_property(p.label.clone(), &p.description, domain, range);
            }
            _ => log::warn!("property {} references an unknown class; skipped", p.label.as_str()),
        }
    }
    o
}
