//! Independent reference implementations: exhaustive search and plain
//! graph walks, kept deliberately naive.

use std::collections::{BTreeMap, BTreeSet};

use ontoekg::entailment::TaxonomyEdge;
use ontoekg::Label;

/// Exhaustive search over all one-to-one partial matchings. Returns the
/// maximum cardinality and, among maximum matchings, the lexicographically
/// smallest partner vector where "unmatched" ranks after every partner.
pub fn brute_force_matching(adj: &[Vec<usize>], right: usize) -> (usize, Vec<Option<usize>>) {
    fn rank(p: &[Option<usize>]) -> Vec<usize> {
        p.iter().map(|x| x.unwrap_or(usize::MAX)).collect()
    }
    fn go(
        i: usize,
        adj: &[Vec<usize>],
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        best: &mut (usize, Vec<Option<usize>>),
    ) {
        if i == adj.len() {
            let size = cur.iter().filter(|x| x.is_some()).count();
            if size > best.0 || (size == best.0 && rank(cur) < rank(&best.1)) {
                *best = (size, cur.clone());
            }
            return;
        }
        for &j in &adj[i] {
            if !used[j] {
                used[j] = true;
                cur[i] = Some(j);
                go(i + 1, adj, used, cur, best);
                cur[i] = None;
                used[j] = false;
            }
        }
        go(i + 1, adj, used, cur, best);
    }
    let mut best = (0, vec![None; adj.len()]);
    go(0, adj, &mut vec![false; right], &mut vec![None; adj.len()], &mut best);
    best
}

fn successors(edges: &BTreeSet<TaxonomyEdge>) -> BTreeMap<&Label, Vec<&Label>> {
    let mut out: BTreeMap<&Label, Vec<&Label>> = BTreeMap::new();
    for e in edges {
        out.entry(&e.sub).or_default().push(&e.sup);
    }
    out
}

/// Three-colour depth-first search.
pub fn is_acyclic(edges: &BTreeSet<TaxonomyEdge>) -> bool {
    fn visit<'a>(n: &'a Label, succ: &BTreeMap<&'a Label, Vec<&'a Label>>, colour: &mut BTreeMap<&'a Label, u8>) -> bool {
        match colour.get(n) {
            Some(1) => return false,
            Some(2) => return true,
            _ => {}
        }
        colour.insert(n, 1);
        for m in succ.get(n).into_iter().flatten() {
            if !visit(m, succ, colour) {
                return false;
            }
        }
        colour.insert(n, 2);
        true
    }
    let succ = successors(edges);
    let mut colour = BTreeMap::new();
    succ.keys().all(|n| visit(n, &succ, &mut colour))
}

/// Pairs (a, b) with a path of length at least one from a to b.
pub fn closure(edges: &BTreeSet<TaxonomyEdge>) -> BTreeSet<(Label, Label)> {
    let succ = successors(edges);
    let mut out = BTreeSet::new();
    for start in succ.keys() {
        let mut stack: Vec<&Label> = succ[start].clone();
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                out.insert(((*start).clone(), n.clone()));
                stack.extend(succ.get(n).into_iter().flatten());
            }
        }
    }
    out
}

/// No edge can be removed without losing reachability.
pub fn is_transitively_reduced(edges: &BTreeSet<TaxonomyEdge>) -> bool {
    edges.iter().all(|e| {
        let mut rest = edges.clone();
        rest.remove(e);
        !closure(&rest).contains(&(e.sub.clone(), e.sup.clone()))
    })
}
