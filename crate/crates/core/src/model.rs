//! The ontology data model: labels, IRIs, classes, object properties and the
//! subclass hierarchy, plus IRI minting and label normalization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::serialization::{to_triples, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid label {0:?}: must contain at least one alphanumeric character")]
    InvalidLabel(String),
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
}

/// Human-readable term naming a class or property, e.g. `Employee`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(text: impl AsRef<str>) -> Result<Self, ModelError> {
        let trimmed = text.as_ref().trim();
        if trimmed.is_empty() || !trimmed.chars().any(char::is_alphanumeric) {
            return Err(ModelError::InvalidLabel(text.as_ref().to_string()));
        }
        Ok(Label(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Matching key: lowercase alphanumerics only, so case, whitespace,
    /// underscores and punctuation are ignored.
    pub fn key(&self) -> String {
        normalize_key(&self.0)
    }

    /// Alphanumeric runs of the label, splitting camelCase humps.
    fn words(&self) -> Vec<String> {
        split_words(&self.0)
    }
}

impl TryFrom<String> for Label {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Label::new(value)
    }
}

impl From<Label> for String {
    fn from(label: Label) -> Self {
        label.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn normalize_key(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn split_words(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        // Existing camel humps ("hasAccessTo") are kept as word starts.
        let mut current = String::new();
        let mut prev_lower = false;
        for c in run.chars() {
            if c.is_uppercase() && prev_lower && !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = c.is_lowercase() || c.is_numeric();
            current.push(c);
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    words
}

/// Absolute IRI identifying an ontology element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        let Some(colon) = value.find(':') else {
            return Err(ModelError::InvalidIri(value, "missing scheme"));
        };
        let scheme = &value[..colon];
        let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(ModelError::InvalidIri(value, "malformed scheme"));
        }
        if value
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(ModelError::InvalidIri(value, "contains a character not allowed in IRIs"));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`, or the whole IRI if neither occurs.
    pub fn local_name(&self) -> &str {
        let cut = self.0.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
        let local = &self.0[cut..];
        if local.is_empty() {
            &self.0
        } else {
            local
        }
    }

    /// Namespace part (everything up to and including the last `#` or `/`).
    pub fn namespace(&self) -> &str {
        let cut = self.0.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
        &self.0[..cut]
    }
}

impl TryFrom<String> for Iri {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn mint(base: &Iri, local: String, taken: &BTreeSet<Iri>) -> Iri {
    let first = Iri(format!("{}{}", base.as_str(), local));
    if !taken.contains(&first) {
        return first;
    }
    (2u64..)
        .map(|n| Iri(format!("{}{}{}", base.as_str(), local, n)))
        .find(|candidate| !taken.contains(candidate))
        .expect("unbounded suffix search")
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn decapitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `base` + PascalCase local name, suffixed with the smallest free integer ≥ 2
/// when already taken.
pub fn mint_class_iri(base: &Iri, label: &Label, taken: &BTreeSet<Iri>) -> Iri {
    let local: String = label.words().iter().map(|w| capitalize(w)).collect();
    mint(base, local, taken)
}

/// Like [`mint_class_iri`] but with a camelCase local name.
pub fn mint_property_iri(base: &Iri, label: &Label, taken: &BTreeSet<Iri>) -> Iri {
    let words = label.words();
    let local: String = words
        .iter()
        .enumerate()
        .map(|(i, w)| if i == 0 { decapitalize(w) } else { capitalize(w) })
        .collect();
    mint(base, local, taken)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyClass {
    pub iri: Iri,
    pub label: Label,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub is_reified_datatype: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyProperty {
    pub iri: Iri,
    pub label: Label,
    #[serde(default)]
    pub description: String,
    pub domain: Iri,
    pub range: Iri,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubclassEdge {
    pub sub: Iri,
    pub sup: Iri,
}

/// A T-Box: classes, object properties and subclass edges under one base IRI.
///
/// Collections are keyed by IRI, so two ontologies built from the same
/// elements in a different order compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    pub base_iri: Iri,
    pub classes: BTreeMap<Iri, OntologyClass>,
    pub properties: BTreeMap<Iri, OntologyProperty>,
    pub hierarchy: BTreeSet<SubclassEdge>,
}

/// Totally ordered triple list of an ontology, used for equality checks and
/// golden files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalForm(pub Vec<Triple>);

impl Ontology {
    pub fn new(base_iri: Iri) -> Self {
        Ontology {
            base_iri,
            classes: BTreeMap::new(),
            properties: BTreeMap::new(),
            hierarchy: BTreeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.properties.is_empty() && self.hierarchy.is_empty()
    }

    fn taken(&self) -> BTreeSet<Iri> {
        self.classes.keys().chain(self.properties.keys()).cloned().collect()
    }

    pub fn class_by_label(&self, label: &Label) -> Option<&OntologyClass> {
        let key = label.key();
        self.classes.values().find(|c| c.label.key() == key)
    }

    /// Adds a class, merging with an existing class whose label has the same
    /// normalized key. On merge the first non-empty description is kept.
    pub fn add_class(&mut self, label: Label, description: &str, is_reified_datatype: bool) -> Iri {
        let key = label.key();
        if let Some(existing) = self.classes.values_mut().find(|c| c.label.key() == key) {
            if existing.description.trim().is_empty() && !description.trim().is_empty() {
                existing.description = description.trim().to_string();
            }
            existing.is_reified_datatype |= is_reified_datatype;
            return existing.iri.clone();
        }
        let iri = mint_class_iri(&self.base_iri, &label, &self.taken());
        self.classes.insert(
            iri.clone(),
            OntologyClass {
                iri: iri.clone(),
                label,
                description: description.trim().to_string(),
                is_reified_datatype,
            },
        );
        iri
    }

    /// Adds an object property between two existing classes. A property with
    /// the same normalized label, domain and range is merged instead.
    pub fn add_property(&mut self, label: Label, description: &str, domain: Iri, range: Iri) -> Iri {
        let key = label.key();
        if let Some(existing) = self
            .properties
            .values_mut()
            .find(|p| p.label.key() == key && p.domain == domain && p.range == range)
        {
            if existing.description.trim().is_empty() && !description.trim().is_empty() {
                existing.description = description.trim().to_string();
            }
            return existing.iri.clone();
        }
        let iri = mint_property_iri(&self.base_iri, &label, &self.taken());
        self.properties.insert(
            iri.clone(),
            OntologyProperty {
                iri: iri.clone(),
                label,
                description: description.trim().to_string(),
                domain,
                range,
            },
        );
        iri
    }

    pub fn insert_class(&mut self, class: OntologyClass) {
        self.classes.insert(class.iri.clone(), class);
    }

    pub fn insert_property(&mut self, property: OntologyProperty) {
        self.properties.insert(property.iri.clone(), property);
    }

    pub fn add_edge(&mut self, sub: Iri, sup: Iri) {
        self.hierarchy.insert(SubclassEdge { sub, sup });
    }

    pub fn canonicalize(&self) -> CanonicalForm {
        canonicalize(self)
    }
}

pub fn canonicalize(o: &Ontology) -> CanonicalForm {
    // to_triples already returns the sorted, deduplicated sequence.
    CanonicalForm(to_triples(o))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Iri {
        Iri::new("https://example.org/onto#").unwrap()
    }

    fn label(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn taken(iris: &[&str]) -> BTreeSet<Iri> {
        iris.iter().map(|s| Iri::new(*s).unwrap()).collect()
    }

    #[test]
    fn label_rejects_blank_and_symbol_only() {
        assert!(Label::new("   ").is_err());
        assert!(Label::new("--!").is_err());
        assert_eq!(Label::new("  Employee ").unwrap().as_str(), "Employee");
    }

    #[test]
    fn iri_requires_scheme_and_no_whitespace() {
        assert!(Iri::new("example.org/x").is_err());
        assert!(Iri::new("http://example.org/a b").is_err());
        assert!(Iri::new("1http://x").is_err());
        assert!(Iri::new("urn:x:y").is_ok());
    }

    #[test]
    fn class_iri_is_pascal_case() {
        let iri = mint_class_iri(&base(), &label("data governance policy"), &BTreeSet::new());
        assert_eq!(iri.as_str(), "https://example.org/onto#DataGovernancePolicy");
        let iri = mint_class_iri(&base(), &label("Apple"), &BTreeSet::new());
        assert_eq!(iri.as_str(), "https://example.org/onto#Apple");
    }

    #[test]
    fn class_iri_collision_gets_suffix() {
        let t = taken(&["https://example.org/onto#Policy"]);
        let iri = mint_class_iri(&base(), &label("Policy"), &t);
        assert_eq!(iri.as_str(), "https://example.org/onto#Policy2");
        let t = taken(&["https://example.org/onto#Policy", "https://example.org/onto#Policy2"]);
        assert_eq!(mint_class_iri(&base(), &label("Policy"), &t).local_name(), "Policy3");
    }

    #[test]
    fn property_iri_is_camel_case() {
        let none = BTreeSet::new();
        assert_eq!(mint_property_iri(&base(), &label("hasAccessTo"), &none).local_name(), "hasAccessTo");
        assert_eq!(mint_property_iri(&base(), &label("has access to"), &none).local_name(), "hasAccessTo");
        assert_eq!(
            mint_property_iri(&base(), &label("Operates Vehicle"), &none).as_str(),
            "https://example.org/onto#operatesVehicle"
        );
        let t = taken(&["https://example.org/onto#operates"]);
        assert_eq!(mint_property_iri(&base(), &label("operates"), &t).local_name(), "operates2");
    }

    #[test]
    fn minting_strips_punctuation() {
        let iri = mint_class_iri(&base(), &label("third-party (vendor) contract"), &BTreeSet::new());
        assert_eq!(iri.local_name(), "ThirdPartyVendorContract");
    }

    #[test]
    fn duplicate_labels_merge_keeping_first_description() {
        let mut o = Ontology::new(base());
        let a = o.add_class(label("Data Owner"), "", false);
        let b = o.add_class(label("data_owner"), "Accountable person.", false);
        let c = o.add_class(label("DataOwner"), "Something else.", false);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(o.classes.len(), 1);
        assert_eq!(o.classes[&a].description, "Accountable person.");
    }

    #[test]
    fn class_and_property_share_the_taken_set() {
        let mut o = Ontology::new(base());
        let c = o.add_class(label("3d"), "", false);
        let p = o.add_property(label("3d"), "", c.clone(), c.clone());
        assert_ne!(c, p);
        assert_eq!(p.local_name(), "3d2");
    }

    #[test]
    fn local_name_and_namespace() {
        let iri = Iri::new("http://www.w3.org/2002/07/owl#Class").unwrap();
        assert_eq!(iri.local_name(), "Class");
        assert_eq!(iri.namespace(), "http://www.w3.org/2002/07/owl#");
        let iri = Iri::new("https://schema.org/Text").unwrap();
        assert_eq!(iri.local_name(), "Text");
    }
}
