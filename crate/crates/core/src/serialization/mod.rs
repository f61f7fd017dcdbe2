//! RDF triples for an ontology and their Turtle form.

mod parse;
mod turtle;

pub use parse::{parse_turtle, parse_turtle_with, ParseOptions, ParseWarning, ParsedTurtle, TurtleError};
pub use turtle::emit_turtle;

use std::fmt;

use serde::Serialize;

use crate::model::{Iri, Ontology};

pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const RDFS_COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const RDFS_SEE_ALSO: &str = "http://www.w3.org/2000/01/rdf-schema#seeAlso";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";

    /// Marker linked from reified datatype classes via `rdfs:seeAlso`.
    pub const SCHEMA_DATATYPE: &str = "https://schema.org/DataType";

    /// Predicates scored by evaluation unless annotations are requested.
    pub const STRUCTURAL: &[&str] = &[RDF_TYPE, RDFS_SUBCLASS_OF, RDFS_DOMAIN, RDFS_RANGE];
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Iri(Iri),
    Literal { value: String, datatype: Option<Iri> },
}

impl Term {
    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal { value: value.into(), datatype: None }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal { .. } => None,
        }
    }

    pub fn as_literal(&self) -> Option<&str> {
        match self {
            Term::Iri(_) => None,
            Term::Literal { value, .. } => Some(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: &str, object: Term) -> Self {
        Triple { subject, predicate: vocab_iri(predicate), object }
    }

    pub fn is_structural(&self) -> bool {
        vocab::STRUCTURAL.contains(&self.predicate.as_str())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.object {
            Term::Iri(o) => write!(f, "<{}> <{}> <{}>", self.subject, self.predicate, o),
            Term::Literal { value, .. } => write!(f, "<{}> <{}> {:?}", self.subject, self.predicate, value),
        }
    }
}

pub(crate) fn vocab_iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRIs are valid")
}

/// Maps an ontology to RDF triples sorted by (subject, predicate, object).
pub fn to_triples(o: &Ontology) -> Vec<Triple> {
    use vocab::*;

    let mut out = Vec::new();
    for c in o.classes.values() {
        out.push(Triple::new(c.iri.clone(), RDF_TYPE, Term::Iri(vocab_iri(OWL_CLASS))));
        out.push(Triple::new(c.iri.clone(), RDFS_LABEL, Term::literal(c.label.as_str())));
        if !c.description.trim().is_empty() {
            out.push(Triple::new(c.iri.clone(), RDFS_COMMENT, Term::literal(c.description.trim())));
        }
        if c.is_reified_datatype {
            out.push(Triple::new(c.iri.clone(), RDFS_SEE_ALSO, Term::Iri(vocab_iri(SCHEMA_DATATYPE))));
        }
    }
    for e in &o.hierarchy {
        out.push(Triple::new(e.sub.clone(), RDFS_SUBCLASS_OF, Term::Iri(e.sup.clone())));
    }
    for p in o.properties.values() {
        out.push(Triple::new(p.iri.clone(), RDF_TYPE, Term::Iri(vocab_iri(OWL_OBJECT_PROPERTY))));
        out.push(Triple::new(p.iri.clone(), RDFS_LABEL, Term::literal(p.label.as_str())));
        if !p.description.trim().is_empty() {
            out.push(Triple::new(p.iri.clone(), RDFS_COMMENT, Term::literal(p.description.trim())));
        }
        out.push(Triple::new(p.iri.clone(), RDFS_DOMAIN, Term::Iri(p.domain.clone())));
        out.push(Triple::new(p.iri.clone(), RDFS_RANGE, Term::Iri(p.range.clone())));
    }
    out.sort();
    out.dedup();
    out
}
