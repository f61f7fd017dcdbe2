//! Seeded random instances shared by the property tests and the acceptance
//! target.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use ontoekg::entailment::{SubsumptionQuery, SubsumptionVerdict};
use ontoekg::evaluation::EvalTriple;
use ontoekg::{Iri, Label, Ontology};

const WORDS: &[&str] = &[
    "data", "asset", "owner", "policy", "report", "vehicle", "route", "claim", "receipt", "merchant", "employee",
    "incident", "control", "depot", "ledger", "invoice",
];

const DESCRIPTIONS: &[&str] = &[
    "",
    "A plain description.",
    "Quotes \"inside\" and a back\\slash.",
    "Two\nlines",
    "Tab\tand unicode: café, Zürich, 東京.",
    "Ends with a triple quote \"\"\"",
    "  padded  ",
    "Angle <brackets> & ampersands; semicolons.",
];

fn label(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=3);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    match rng.gen_range(0..3) {
        0 => words.join(" "),
        1 => words.join("_"),
        _ => words
            .iter()
            .map(|w| {
                let mut c = w.chars();
                c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
            })
            .collect(),
    }
}

/// A random ontology with `n_classes` class insertions (merges may make the
/// final count smaller), some properties and an acyclic hierarchy.
pub fn ontology(rng: &mut impl Rng, n_classes: usize) -> Ontology {
    let mut o = Ontology::new(Iri::new("https://example.org/gen#").unwrap());
    let mut iris = Vec::new();
    for _ in 0..n_classes {
        let reified = rng.gen_bool(0.1);
        let l = if reified { ["Text", "Date", "Integer"].choose(rng).unwrap().to_string() } else { label(rng) };
        let iri = o.add_class(Label::new(l).unwrap(), DESCRIPTIONS.choose(rng).unwrap(), reified);
        if !iris.contains(&iri) {
            iris.push(iri);
        }
    }
    if iris.is_empty() {
        return o;
    }
    for _ in 0..rng.gen_range(0..=iris.len()) {
        let d = iris.choose(rng).unwrap().clone();
        let r = iris.choose(rng).unwrap().clone();
        let name = format!("has {}", label(rng));
        o.add_property(Label::new(name).unwrap(), DESCRIPTIONS.choose(rng).unwrap(), d, r);
    }
    // edges only point forward in insertion order, so the hierarchy is acyclic
    for i in 0..iris.len() {
        for j in i + 1..iris.len() {
            if rng.gen_bool(0.15) {
                o.add_edge(iris[i].clone(), iris[j].clone());
            }
        }
    }
    o
}

/// Labels `C0`, `C1`, ... for hierarchy tests.
pub fn class_labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| Label::new(format!("C{i}")).unwrap()).collect()
}

pub fn verdict(sub: &Label, sup: &Label, holds: bool) -> SubsumptionVerdict {
    SubsumptionVerdict {
        query: SubsumptionQuery {
            sub_label: sub.clone(),
            sub_description: String::new(),
            sup_label: sup.clone(),
            sup_description: String::new(),
        },
        holds,
        rationale: if holds { "holds".into() } else { String::new() },
    }
}

/// One verdict per ordered pair of distinct labels, each holding with
/// probability `density`.
pub fn verdicts(rng: &mut impl Rng, labels: &[Label], density: f64) -> Vec<SubsumptionVerdict> {
    let mut out = Vec::new();
    for a in labels {
        for b in labels {
            if a != b {
                out.push(verdict(a, b, rng.gen_bool(density)));
            }
        }
    }
    out
}

/// Triples over a small vocabulary so that pred and gold overlap often.
pub fn triples(rng: &mut impl Rng, max: usize, vocab: &[&str]) -> BTreeSet<EvalTriple> {
    const PREDICATES: [&str; 3] = ["type", "subClassOf", "domain"];
    let n = rng.gen_range(0..=max);
    let mut out = BTreeSet::new();
    for _ in 0..n {
        out.insert(EvalTriple::new(
            *vocab.choose(rng).unwrap(),
            *PREDICATES.choose(rng).unwrap(),
            *vocab.choose(rng).unwrap(),
        ));
    }
    out
}
