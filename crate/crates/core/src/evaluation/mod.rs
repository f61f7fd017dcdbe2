//! Scoring a predicted ontology against a gold ontology.
//!
//! Triples are compared in label space: each IRI is replaced by the label of
//! the class or property it names (falling back to its local name), so
//! ontologies minted under different base IRIs can be compared.

mod matching;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{cosine, BackendError, EmbeddingBackend};
use crate::model::{Iri, Ontology};
use crate::serialization::{to_triples, Term};

pub use matching::lexicographic_max_matching;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[String; 3]", into = "[String; 3]")]
pub struct EvalTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl EvalTriple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: impl Into<String>) -> Self {
        EvalTriple { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    fn positions(&self) -> [&str; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

impl From<[String; 3]> for EvalTriple {
    fn from([subject, predicate, object]: [String; 3]) -> Self {
        EvalTriple { subject, predicate, object }
    }
}

impl From<EvalTriple> for [String; 3] {
    fn from(t: EvalTriple) -> Self {
        [t.subject, t.predicate, t.object]
    }
}

/// Label-space triples of `o`. Only structural triples (types, subclass
/// edges, domains and ranges) unless `include_annotations` is set.
pub fn to_eval_triples(o: &Ontology, include_annotations: bool) -> BTreeSet<EvalTriple> {
    let names: HashMap<&Iri, &str> = o
        .classes
        .values()
        .map(|c| (&c.iri, c.label.as_str()))
        .chain(o.properties.values().map(|p| (&p.iri, p.label.as_str())))
        .collect();
    let name = |iri: &Iri| -> String { names.get(iri).map_or_else(|| iri.local_name().to_string(), |s| s.to_string()) };
    to_triples(o)
        .into_iter()
        .filter(|t| include_annotations || t.is_structural())
        .map(|t| {
            let object = match &t.object {
                Term::Iri(iri) => name(iri),
                Term::Literal { value, .. } => value.clone(),
            };
            EvalTriple::new(name(&t.subject), t.predicate.local_name(), object)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Exact,
    Fuzzy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub pred: EvalTriple,
    pub gold: EvalTriple,
    /// Lowest per-position similarity (1 for exact matches).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub use_case: String,
    pub mode: ScoreMode,
    pub threshold: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matches: Vec<Match>,
    pub unmatched_pred: Vec<EvalTriple>,
    pub unmatched_gold: Vec<EvalTriple>,
}

impl MatchReport {
    pub fn with_use_case(mut self, use_case: impl Into<String>) -> Self {
        self.use_case = use_case.into();
        self
    }
}

/// (precision, recall, f1). Both sets empty scores 1; exactly one empty
/// scores 0.
pub fn metrics(n_pred: usize, n_gold: usize, matched: usize) -> (f64, f64, f64) {
    if n_pred == 0 && n_gold == 0 {
        return (1.0, 1.0, 1.0);
    }
    if n_pred == 0 || n_gold == 0 {
        return (0.0, 0.0, 0.0);
    }
    let p = matched as f64 / n_pred as f64;
    let r = matched as f64 / n_gold as f64;
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

fn report(
    mode: ScoreMode,
    threshold: Option<f64>,
    pred: &BTreeSet<EvalTriple>,
    gold: &BTreeSet<EvalTriple>,
    matches: Vec<Match>,
) -> MatchReport {
    let (precision, recall, f1) = metrics(pred.len(), gold.len(), matches.len());
    let used_pred: BTreeSet<&EvalTriple> = matches.iter().map(|m| &m.pred).collect();
    let used_gold: BTreeSet<&EvalTriple> = matches.iter().map(|m| &m.gold).collect();
    MatchReport {
        use_case: String::new(),
        mode,
        threshold,
        precision,
        recall,
        f1,
        unmatched_pred: pred.iter().filter(|t| !used_pred.contains(t)).cloned().collect(),
        unmatched_gold: gold.iter().filter(|t| !used_gold.contains(t)).cloned().collect(),
        matches,
    }
}

pub fn exact_match_score(pred: &BTreeSet<EvalTriple>, gold: &BTreeSet<EvalTriple>) -> MatchReport {
    let matches = pred
        .intersection(gold)
        .map(|t| Match { pred: t.clone(), gold: t.clone(), score: 1.0 })
        .collect();
    report(ScoreMode::Exact, None, pred, gold, matches)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("embedding failed: {0}")]
    Embedding(#[from] BackendError),
}

/// Matches predicted to gold triples when every position is at least
/// `threshold` similar, maximizing the number of matched pairs.
pub fn fuzzy_match_score(
    pred: &BTreeSet<EvalTriple>,
    gold: &BTreeSet<EvalTriple>,
    embedder: &dyn EmbeddingBackend,
    threshold: f64,
) -> Result<MatchReport, EvalError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EvalError::InvalidThreshold(threshold));
    }
    let texts: Vec<String> = pred
        .iter()
        .chain(gold)
        .flat_map(|t| t.positions())
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let vectors = if texts.is_empty() { Vec::new() } else { embedder.embed(&texts)? };
    let index: HashMap<&str, &[f64]> = texts.iter().map(String::as_str).zip(vectors.iter().map(Vec::as_slice)).collect();
    let similarity = |a: &str, b: &str| -> f64 {
        if a == b {
            1.0
        } else {
            cosine(index[a], index[b]).clamp(-1.0, 1.0)
        }
    };

    let pred: Vec<&EvalTriple> = pred.iter().collect();
    let gold_list: Vec<&EvalTriple> = gold.iter().collect();
    let mut scores: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); pred.len()];
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gold_list.iter().enumerate() {
            let (pp, gp) = (p.positions(), g.positions());
            let sims = [0, 1, 2].map(|k| similarity(pp[k], gp[k]));
            let min = sims.iter().copied().fold(f64::INFINITY, f64::min);
            if sims.iter().all(|s| *s >= threshold) {
                scores[i].insert(j, min);
            }
        }
    }
    let adj: Vec<Vec<usize>> = scores.iter().map(|m| m.keys().copied().collect()).collect();
    let partner = lexicographic_max_matching(&adj, gold_list.len());
    let matches = partner
        .iter()
        .enumerate()
        .filter_map(|(i, j)| {
            j.map(|j| Match { pred: pred[i].clone(), gold: gold_list[j].clone(), score: scores[i][&j] })
        })
        .collect();
    let pred_set: BTreeSet<EvalTriple> = pred.into_iter().cloned().collect();
    Ok(report(ScoreMode::Fuzzy, Some(threshold), &pred_set, gold, matches))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub text: String,
    pub json: serde_json::Value,
}

/// Plain-text table with one row per use case (three decimals) and a JSON
/// array with the full reports.
pub fn render_report(reports: &BTreeMap<String, MatchReport>) -> RenderedReport {
    let mut text = String::from("Use case | Precision | Recall | F1\n");
    for (use_case, r) in reports {
        let _ = writeln!(text, "{use_case} | {:.3} | {:.3} | {:.3}", r.precision, r.recall, r.f1);
    }
    let json = serde_json::Value::Array(
        reports
            .iter()
            .map(|(use_case, r)| {
                serde_json::to_value(r.clone().with_use_case(use_case.clone())).expect("reports serialize")
            })
            .collect(),
    );
    RenderedReport { text, json }
}
