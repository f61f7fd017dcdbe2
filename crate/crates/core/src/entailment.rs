//! Pairwise subsumption judging and assembly of an acyclic, transitively
//! reduced class hierarchy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fanout::try_map_bounded;
use crate::graph::Digraph;
use crate::llm::{call_structured, ChatBackend, ChatRequest, Shape, StructuredError};
use crate::model::{Label, Ontology, OntologyClass};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsumptionQuery {
    pub sub_label: Label,
    pub sub_description: String,
    pub sup_label: Label,
    pub sup_description: String,
}

impl SubsumptionQuery {
    /// User message sent to the entailment model.
    pub fn render(&self) -> String {
        let desc = |d: &str| if d.trim().is_empty() { "(no description)".to_string() } else { d.trim().to_string() };
        format!(
            "Class A: {}\nDescription of A: {}\n\nClass B: {}\nDescription of B: {}\n\nIs A a subclass of B?",
            self.sub_label.as_str(),
            desc(&self.sub_description),
            self.sup_label.as_str(),
            desc(&self.sup_description),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsumptionVerdict {
    pub query: SubsumptionQuery,
    pub holds: bool,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidates {
    pub queries: Vec<SubsumptionQuery>,
    /// Pairs cut off by the cap.
    pub truncated: usize,
}

/// All ordered pairs of distinct, non-datatype classes sorted by
/// (sub label, sup label), truncated at `cap`.
pub fn generate_candidate_pairs(classes: &[OntologyClass], cap: usize) -> Candidates {
    let mut eligible: Vec<&OntologyClass> = classes.iter().filter(|c| !c.is_reified_datatype).collect();
    eligible.sort_by(|a, b| a.label.cmp(&b.label));
    let mut queries = Vec::new();
    let mut total = 0usize;
    for sub in &eligible {
        for sup in &eligible {
            if sub.label.key() == sup.label.key() {
                continue;
            }
            total += 1;
            if queries.len() < cap {
                queries.push(SubsumptionQuery {
                    sub_label: sub.label.clone(),
                    sub_description: sub.description.clone(),
                    sup_label: sup.label.clone(),
                    sup_description: sup.description.clone(),
                });
            }
        }
    }
    let truncated = total - queries.len();
    if truncated > 0 {
        log::warn!("candidate pairs truncated at {cap}; {truncated} of {total} pairs not judged");
    }
    Candidates { queries, truncated }
}

/// The strict verdict schema.
pub fn verdict_shape() -> Shape {
    Shape::object([("holds", Shape::Bool), ("rationale", Shape::String)])
}

#[derive(Deserialize)]
struct VerdictBody {
    holds: bool,
    rationale: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("judging {sub} ⊑ {sup} failed: {source}")]
pub struct EntailmentError {
    pub sub: String,
    pub sup: String,
    #[source]
    pub source: StructuredError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Judgement {
    pub verdict: SubsumptionVerdict,
    pub retries: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct JudgeSettings<'a> {
    pub model: &'a str,
    pub system_prompt: &'a str,
    pub temperature: f64,
}

pub fn judge_subsumption(
    q: &SubsumptionQuery,
    backend: &dyn ChatBackend,
    settings: JudgeSettings<'_>,
) -> Result<Judgement, EntailmentError> {
    let mut request = ChatRequest::new(settings.model, settings.system_prompt, q.render(), verdict_shape());
    request.temperature = settings.temperature;
    let outcome = call_structured::<VerdictBody, _>(backend, &request, |v| {
        if v.holds && v.rationale.trim().is_empty() {
            Err("rationale must not be empty when holds is true".into())
        } else {
            Ok(())
        }
    })
    .map_err(|source| EntailmentError {
        sub: q.sub_label.as_str().to_string(),
        sup: q.sup_label.as_str().to_string(),
        source,
    })?;
    Ok(Judgement {
        verdict: SubsumptionVerdict { query: q.clone(), holds: outcome.value.holds, rationale: outcome.value.rationale },
        retries: outcome.retries,
    })
}

/// Judges every query with at most `max_in_flight` concurrent requests.
/// Results keep query order; on failure the error for the earliest failing
/// query is returned.
pub fn judge_all(
    queries: &[SubsumptionQuery],
    backend: &dyn ChatBackend,
    settings: JudgeSettings<'_>,
    max_in_flight: usize,
) -> Result<Vec<Judgement>, EntailmentError> {
    try_map_bounded(queries, max_in_flight, |q| judge_subsumption(q, backend, settings))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaxonomyEdge {
    pub sub: Label,
    pub sup: Label,
}

impl TaxonomyEdge {
    pub fn new(sub: Label, sup: Label) -> Self {
        TaxonomyEdge { sub, sup }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConflictKind {
    /// Both directions were judged to hold.
    Mutual,
    /// The edge would have closed a cycle with edges accepted before it.
    CycleRejected,
}

/// One line of the conflict log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub labels: Vec<Label>,
    pub dropped: Vec<TaxonomyEdge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hierarchy {
    pub edges: BTreeSet<TaxonomyEdge>,
    pub conflicts: Vec<Conflict>,
}

/// Assembles positive verdicts into an acyclic, transitively reduced edge
/// set. Mutual pairs are dropped entirely; remaining edges are inserted in
/// sorted order and an edge that would close a cycle is rejected. The result
/// does not depend on the order of `verdicts`.
pub fn build_hierarchy(verdicts: &[SubsumptionVerdict]) -> Hierarchy {
    let mut positive: BTreeSet<TaxonomyEdge> = verdicts
        .iter()
        .filter(|v| v.holds && v.query.sub_label != v.query.sup_label)
        .map(|v| TaxonomyEdge::new(v.query.sub_label.clone(), v.query.sup_label.clone()))
        .collect();

    let mut conflicts = Vec::new();
    let mutual: Vec<TaxonomyEdge> = positive
        .iter()
        .filter(|e| e.sub < e.sup && positive.contains(&TaxonomyEdge::new(e.sup.clone(), e.sub.clone())))
        .cloned()
        .collect();
    for e in mutual {
        let back = TaxonomyEdge::new(e.sup.clone(), e.sub.clone());
        positive.remove(&e);
        positive.remove(&back);
        conflicts.push(Conflict { kind: ConflictKind::Mutual, labels: vec![e.sub.clone(), e.sup.clone()], dropped: vec![e, back] });
    }

    let nodes: BTreeMap<&Label, usize> = positive
        .iter()
        .flat_map(|e| [&e.sub, &e.sup])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let labels: Vec<&Label> = nodes.keys().copied().collect();
    let mut graph = Digraph::with_nodes(nodes.len());
    for e in &positive {
        let (a, b) = (nodes[&e.sub], nodes[&e.sup]);
        if graph.reaches(b, a) {
            conflicts.push(Conflict {
                kind: ConflictKind::CycleRejected,
                labels: vec![e.sub.clone(), e.sup.clone()],
                dropped: vec![e.clone()],
            });
        } else {
            graph.add_edge(a, b);
        }
    }

    let edges = graph
        .transitive_reduction()
        .edges()
        .map(|(a, b)| TaxonomyEdge::new(labels[a].clone(), labels[b].clone()))
        .collect();
    Hierarchy { edges, conflicts }
}

/// Adds hierarchy edges to `o`, resolving labels to class IRIs. Edges that
/// name unknown classes or reified datatypes are skipped.
pub fn apply_hierarchy(o: &mut Ontology, edges: &BTreeSet<TaxonomyEdge>) {
    for e in edges {
        let sub = o.class_by_label(&e.sub).filter(|c| !c.is_reified_datatype).map(|c| c.iri.clone());
        let sup = o.class_by_label(&e.sup).filter(|c| !c.is_reified_datatype).map(|c| c.iri.clone());
        match (sub, sup) {
            (Some(sub), Some(sup)) => o.add_edge(sub, sup),
            _ => log::warn!("hierarchy edge {} ⊑ {} names no eligible class; skipped", e.sub.as_str(), e.sup.as_str()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{FnBackend, ScriptedBackend};
    use crate::model::Iri;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn class(label: &str, datatype: bool) -> OntologyClass {
        OntologyClass {
            iri: Iri::new(format!("https://example.org/onto#{label}")).unwrap(),
            label: l(label),
            description: String::new(),
            is_reified_datatype: datatype,
        }
    }

    fn verdict(sub: &str, sup: &str, holds: bool) -> SubsumptionVerdict {
        SubsumptionVerdict {
            query: SubsumptionQuery {
                sub_label: l(sub),
                sub_description: String::new(),
                sup_label: l(sup),
                sup_description: String::new(),
            },
            holds,
            rationale: if holds { "because".into() } else { String::new() },
        }
    }

    fn edges(pairs: &[(&str, &str)]) -> BTreeSet<TaxonomyEdge> {
        pairs.iter().map(|(a, b)| TaxonomyEdge::new(l(a), l(b))).collect()
    }

    const SETTINGS: JudgeSettings<'static> = JudgeSettings { model: "m", system_prompt: "sys", temperature: 0.0 };

    #[test]
    fn three_classes_six_queries() {
        let c = [class("C", false), class("A", false), class("B", false)];
        let out = generate_candidate_pairs(&c, 2000);
        assert_eq!(out.queries.len(), 6);
        assert_eq!(out.truncated, 0);
        assert_eq!((out.queries[0].sub_label.as_str(), out.queries[0].sup_label.as_str()), ("A", "B"));
    }

    #[test]
    fn apple_fruit_pairs_in_order() {
        let out = generate_candidate_pairs(&[class("Fruit", false), class("Apple", false)], 10);
        let pairs: Vec<_> = out.queries.iter().map(|q| (q.sub_label.as_str(), q.sup_label.as_str())).collect();
        assert_eq!(pairs, [("Apple", "Fruit"), ("Fruit", "Apple")]);
    }

    #[test]
    fn cap_truncates() {
        let c: Vec<_> = (0..10).map(|i| class(&format!("C{i}"), false)).collect();
        let out = generate_candidate_pairs(&c, 20);
        assert_eq!(out.queries.len(), 20);
        assert_eq!(out.truncated, 70);
    }

    #[test]
    fn datatypes_and_singletons_are_excluded() {
        let out = generate_candidate_pairs(&[class("Employee", false), class("Text", true)], 10);
        assert!(out.queries.is_empty());
        assert!(generate_candidate_pairs(&[], 10).queries.is_empty());
    }

    #[test]
    fn judged_verdicts() {
        let q = generate_candidate_pairs(&[class("Apple", false), class("Fruit", false)], 10).queries;
        let backend = ScriptedBackend::new([
            r#"{"holds":true,"rationale":"Every apple is a fruit."}"#,
            r#"{"holds":false,"rationale":"Not every fruit is an apple."}"#,
        ]);
        assert!(judge_subsumption(&q[0], &backend, SETTINGS).unwrap().verdict.holds);
        assert!(!judge_subsumption(&q[1], &backend, SETTINGS).unwrap().verdict.holds);
        assert!(backend.received()[0].user_content.contains("Class A: Apple"));
    }

    #[test]
    fn malformed_then_valid_verdict() {
        let q = generate_candidate_pairs(&[class("Apple", false), class("Fruit", false)], 10).queries;
        let backend = ScriptedBackend::new([r#"{"holds":"yes"}"#, r#"{"holds":true,"rationale":"r"}"#]);
        let j = judge_subsumption(&q[0], &backend, SETTINGS).unwrap();
        assert_eq!(j.retries, 1);
    }

    #[test]
    fn positive_verdict_needs_a_rationale() {
        let q = generate_candidate_pairs(&[class("Apple", false), class("Fruit", false)], 10).queries;
        let backend = ScriptedBackend::new([r#"{"holds":true,"rationale":" "}"#, r#"{"holds":true,"rationale":"ok"}"#]);
        let j = judge_subsumption(&q[0], &backend, SETTINGS).unwrap();
        assert_eq!((j.retries, j.verdict.rationale.as_str()), (1, "ok"));
    }

    #[test]
    fn judge_all_keeps_query_order_under_concurrency() {
        let c: Vec<_> = (0..6).map(|i| class(&format!("C{i}"), false)).collect();
        let q = generate_candidate_pairs(&c, 100).queries;
        let backend = FnBackend::new(|r: &ChatRequest| {
            let holds = r.user_content.contains("Class A: C0\n");
            Ok(format!(r#"{{"holds":{holds},"rationale":"rule"}}"#))
        });
        let judged = judge_all(&q, &backend, SETTINGS, 4).unwrap();
        assert_eq!(judged.len(), q.len());
        for (j, q) in judged.iter().zip(&q) {
            assert_eq!(&j.verdict.query, q);
            assert_eq!(j.verdict.holds, q.sub_label.as_str() == "C0");
        }
    }

    #[test]
    fn judge_all_reports_failures() {
        let q = generate_candidate_pairs(&[class("A", false), class("B", false)], 10).queries;
        let backend = ScriptedBackend::new([r#"{"holds":false,"rationale":""}"#]);
        let err = judge_all(&q, &backend, SETTINGS, 1).unwrap_err();
        assert_eq!((err.sub.as_str(), err.sup.as_str()), ("B", "A"));
    }

    #[test]
    fn mutual_subsumption_drops_both() {
        let h = build_hierarchy(&[verdict("Policy", "GovernanceStandard", true), verdict("GovernanceStandard", "Policy", true)]);
        assert!(h.edges.is_empty());
        assert_eq!(h.conflicts.len(), 1);
        assert_eq!(h.conflicts[0].kind, ConflictKind::Mutual);
        assert_eq!(
            serde_json::to_string(&h.conflicts[0]).unwrap(),
            r#"{"kind":"MUTUAL","labels":["GovernanceStandard","Policy"],"dropped":[{"sub":"GovernanceStandard","sup":"Policy"},{"sub":"Policy","sup":"GovernanceStandard"}]}"#
        );
    }

    #[test]
    fn consistent_pair() {
        let h = build_hierarchy(&[verdict("Apple", "Fruit", true), verdict("Fruit", "Apple", false)]);
        assert_eq!(h.edges, edges(&[("Apple", "Fruit")]));
        assert!(h.conflicts.is_empty());
    }

    #[test]
    fn transitive_edges_are_reduced() {
        let h = build_hierarchy(&[verdict("A", "B", true), verdict("B", "C", true), verdict("A", "C", true)]);
        assert_eq!(h.edges, edges(&[("A", "B"), ("B", "C")]));
    }

    #[test]
    fn three_cycle_rejects_last_sorted_edge() {
        let h = build_hierarchy(&[verdict("A", "B", true), verdict("B", "C", true), verdict("C", "A", true)]);
        assert_eq!(h.edges, edges(&[("A", "B"), ("B", "C")]));
        assert_eq!(h.conflicts.len(), 1);
        assert_eq!(h.conflicts[0].kind, ConflictKind::CycleRejected);
        assert_eq!(h.conflicts[0].dropped, edges(&[("C", "A")]).into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn apply_skips_datatypes() {
        let mut o = Ontology::new(Iri::new("https://example.org/onto#").unwrap());
        o.add_class(l("Employee"), "", false);
        o.add_class(l("Person"), "", false);
        o.add_class(l("Text"), "", true);
        apply_hierarchy(&mut o, &edges(&[("Employee", "Person"), ("Employee", "Text"), ("Ghost", "Person")]));
        assert_eq!(o.hierarchy.len(), 1);
    }
}
