//! Structural checks for ontologies. Validation reports, it never fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::Digraph;
use crate::model::{normalize_key, Iri, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    Cycle,
    DanglingRef,
    RedundantEdge,
    AmbiguousProperty,
    SuspectedIndividual,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::Cycle => "CYCLE",
            ViolationCode::DanglingRef => "DANGLING_REF",
            ViolationCode::RedundantEdge => "REDUNDANT_EDGE",
            ViolationCode::AmbiguousProperty => "AMBIGUOUS_PROPERTY",
            ViolationCode::SuspectedIndividual => "SUSPECTED_INDIVIDUAL",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::Cycle | ViolationCode::DanglingRef => Severity::Error,
            ViolationCode::RedundantEdge | ViolationCode::AmbiguousProperty => Severity::Warning,
            ViolationCode::SuspectedIndividual => Severity::Advisory,
        }
    }

    /// Codes that make strict mode fail.
    pub fn is_fatal(self) -> bool {
        self.severity() == Severity::Error
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    pub iris: Vec<Iri>,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, iris: Vec<Iri>, message: String) -> Self {
        Violation { code, severity: code.severity(), iris, message }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}] {}", self.code, self.severity, self.message)
    }
}

/// Property labels that shadow RDF/RDFS built-in semantics.
const AMBIGUOUS_PROPERTY_KEYS: &[&str] = &["istypeof", "subclassof", "instanceof", "isa"];

/// Description openings that read as the definition of a kind of thing.
const KIND_MARKERS: &[&str] = &["a ", "an ", "any ", "each ", "every ", "all ", "one of "];
const KIND_PHRASES: &[&str] =
    &["type of", "kind of", "class of", "category of", "instances of", "represents", "refers to"];

fn describes_kind(description: &str) -> bool {
    let d = description.trim().to_lowercase();
    !d.is_empty()
        && (KIND_MARKERS.iter().any(|m| d.starts_with(m)) || KIND_PHRASES.iter().any(|p| d.contains(p)))
}

/// Capitalized multiword label ("Acme Logistics Ltd") whose description does
/// not define a kind.
fn looks_like_individual(label: &str, description: &str) -> bool {
    let words: Vec<&str> = label.split_whitespace().collect();
    words.len() >= 2
        && words
            .iter()
            .all(|w| w.chars().next().is_some_and(|c| c.is_uppercase() || c.is_numeric()))
        && !describes_kind(description)
}

pub fn validate_ontology(o: &Ontology) -> Vec<Violation> {
    let mut out = Vec::new();

    let index: BTreeMap<&Iri, usize> = o.classes.keys().enumerate().map(|(i, iri)| (iri, i)).collect();
    let iris: Vec<&Iri> = o.classes.keys().collect();
    let mut g = Digraph::with_nodes(iris.len());

    for edge in &o.hierarchy {
        let missing: Vec<Iri> = [&edge.sub, &edge.sup]
            .into_iter()
            .filter(|iri| !index.contains_key(iri))
            .cloned()
            .collect();
        if !missing.is_empty() {
            out.push(Violation::new(
                ViolationCode::DanglingRef,
                missing,
                format!("subclass edge {} -> {} references an undeclared class", edge.sub, edge.sup),
            ));
            continue;
        }
        g.add_edge(index[&edge.sub], index[&edge.sup]);
    }

    for p in o.properties.values() {
        for (role, target) in [("domain", &p.domain), ("range", &p.range)] {
            if !index.contains_key(target) {
                out.push(Violation::new(
                    ViolationCode::DanglingRef,
                    vec![p.iri.clone(), target.clone()],
                    format!("property {:?} has {role} {target} which is not a declared class", p.label.as_str()),
                ));
            }
        }
    }

    let mut cyclic = BTreeSet::new();
    for component in g.sccs() {
        let self_loop = component.len() == 1 && g.successors(component[0]).any(|s| s == component[0]);
        if component.len() > 1 || self_loop {
            let members: Vec<Iri> = component.iter().map(|&i| iris[i].clone()).collect();
            let labels: Vec<&str> = component.iter().map(|&i| o.classes[iris[i]].label.as_str()).collect();
            out.push(Violation::new(
                ViolationCode::Cycle,
                members,
                format!("subclass cycle among {}", labels.join(", ")),
            ));
            cyclic.extend(component);
        }
    }

    for (a, b) in g.edges() {
        if cyclic.contains(&a) && cyclic.contains(&b) {
            continue;
        }
        if g.is_redundant(a, b) {
            out.push(Violation::new(
                ViolationCode::RedundantEdge,
                vec![iris[a].clone(), iris[b].clone()],
                format!(
                    "edge {} -> {} is implied by a longer path",
                    o.classes[iris[a]].label,
                    o.classes[iris[b]].label
                ),
            ));
        }
    }

    for p in o.properties.values() {
        if AMBIGUOUS_PROPERTY_KEYS.contains(&normalize_key(p.label.as_str()).as_str()) {
            out.push(Violation::new(
                ViolationCode::AmbiguousProperty,
                vec![p.iri.clone()],
                format!(
                    "property {:?} shadows RDF typing/subsumption; use rdf:type or rdfs:subClassOf instead",
                    p.label.as_str()
                ),
            ));
        }
    }

    for c in o.classes.values() {
        if !c.is_reified_datatype && looks_like_individual(c.label.as_str(), &c.description) {
            out.push(Violation::new(
                ViolationCode::SuspectedIndividual,
                vec![c.iri.clone()],
                format!("class {:?} looks like a named individual rather than a kind", c.label.as_str()),
            ));
        }
    }

    out.sort();
    out
}

pub fn has_fatal(violations: &[Violation]) -> bool {
    violations.iter().any(|v| v.code.is_fatal())
}
