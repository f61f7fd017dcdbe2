use std::fmt::Write as _;

use super::{vocab, Term, Triple};
use crate::model::Iri;

fn is_plain_local(local: &str) -> bool {
    !local.is_empty() && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Prefixes<'a> {
    table: [(&'a str, &'a str); 4],
}

impl<'a> Prefixes<'a> {
    fn new(base: &'a Iri) -> Self {
        Prefixes {
            table: [("rdf", vocab::RDF), ("rdfs", vocab::RDFS), ("owl", vocab::OWL), ("", base.as_str())],
        }
    }

    fn write_iri(&self, out: &mut String, iri: &Iri) {
        for (prefix, ns) in &self.table {
            if let Some(local) = iri.as_str().strip_prefix(ns) {
                if is_plain_local(local) {
                    let _ = write!(out, "{prefix}:{local}");
                    return;
                }
            }
        }
        let _ = write!(out, "<{}>", iri.as_str());
    }

    fn write_term(&self, out: &mut String, term: &Term) {
        match term {
            Term::Iri(iri) => self.write_iri(out, iri),
            Term::Literal { value, datatype } => {
                out.push('"');
                escape_into(out, value);
                out.push('"');
                if let Some(dt) = datatype {
                    out.push_str("^^");
                    self.write_iri(out, dt);
                }
            }
        }
    }
}

fn escape_into(out: &mut String, value: &str) {
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// Deterministic Turtle: fixed prefix block (rdf, rdfs, owl, base), then one
/// block per subject in sorted order with predicates sorted inside it.
pub fn emit_turtle(triples: &[Triple], base: &Iri) -> String {
    let prefixes = Prefixes::new(base);
    let mut out = String::new();
    for (prefix, ns) in &prefixes.table {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }

    let mut sorted: Vec<&Triple> = triples.iter().collect();
    sorted.sort();
    sorted.dedup();

    let mut i = 0;
    while i < sorted.len() {
        let subject = &sorted[i].subject;
        out.push('\n');
        prefixes.write_iri(&mut out, subject);

        let mut first_predicate = true;
        while i < sorted.len() && &sorted[i].subject == subject {
            let predicate = &sorted[i].predicate;
            out.push_str(if first_predicate { " " } else { " ;\n    " });
            first_predicate = false;
            prefixes.write_iri(&mut out, predicate);
            out.push(' ');
            let mut first_object = true;
            while i < sorted.len() && &sorted[i].subject == subject && &sorted[i].predicate == predicate {
                if !first_object {
                    out.push_str(", ");
                }
                first_object = false;
                prefixes.write_term(&mut out, &sorted[i].object);
                i += 1;
            }
        }
        out.push_str(" .\n");
    }
    out
}
