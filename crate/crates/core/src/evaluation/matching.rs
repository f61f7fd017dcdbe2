//! Maximum bipartite matching with a deterministic tie-break.

/// Size of a maximum matching in the bipartite graph `adj` (left vertex `i`
/// is adjacent to the right vertices in `adj[i]`), ignoring left vertices
/// before `from_left` and right vertices marked in `blocked`.
fn max_matching_size(adj: &[Vec<usize>], right: usize, from_left: usize, blocked: &[bool]) -> usize {
    fn augment(u: usize, adj: &[Vec<usize>], blocked: &[bool], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if blocked[v] || seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, blocked, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }

    let mut owner = vec![None; right];
    let mut size = 0;
    for u in from_left..adj.len() {
        let mut seen = vec![false; right];
        if augment(u, adj, blocked, &mut seen, &mut owner) {
            size += 1;
        }
    }
    size
}

/// A maximum-cardinality matching. Among all maximum matchings it returns
/// the one whose partner vector (left vertices in order, each mapped to its
/// right partner, unmatched counted as larger than any partner) is
/// lexicographically smallest. `adj[i]` must be sorted ascending.
pub fn lexicographic_max_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    let mut blocked = vec![false; right];
    let mut remaining = max_matching_size(adj, right, 0, &blocked);
    let mut partner = vec![None; adj.len()];
    for i in 0..adj.len() {
        if remaining == 0 {
            break;
        }
        for &j in &adj[i] {
            if blocked[j] {
                continue;
            }
            blocked[j] = true;
            if 1 + max_matching_size(adj, right, i + 1, &blocked) == remaining {
                partner[i] = Some(j);
                remaining -= 1;
                break;
            }
            blocked[j] = false;
        }
    }
    partner
}
