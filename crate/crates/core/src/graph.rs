//! Small directed-graph helpers over dense node indices, shared by the
//! validator and the hierarchy builder.

use std::collections::BTreeSet;

#[derive(Debug, Clone, Default)]
pub struct Digraph {
    succ: Vec<BTreeSet<usize>>,
}

impl Digraph {
    pub fn with_nodes(n: usize) -> Self {
        Digraph { succ: vec![BTreeSet::new(); n] }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].insert(to);
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) {
        self.succ[from].remove(&to);
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[node].iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, out)| out.iter().map(move |&b| (a, b)))
    }

    /// Whether `to` is reachable from `from` by a path of length ≥ 0.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(node) = stack.pop() {
            for next in self.successors(node) {
                if next == to {
                    return true;
                }
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        false
    }

    /// Strongly connected components (iterative Tarjan). Components and their
    /// members are returned in ascending order of smallest member.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut out = Vec::new();

        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            // (node, successors not yet visited)
            let mut work: Vec<(usize, Vec<usize>)> = Vec::new();
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            work.push((root, self.successors(root).collect::<Vec<_>>().into_iter().rev().collect()));

            while let Some((node, pending)) = work.last_mut() {
                let node = *node;
                if let Some(next) = pending.pop() {
                    if index[next] == usize::MAX {
                        index[next] = next_index;
                        low[next] = next_index;
                        next_index += 1;
                        stack.push(next);
                        on_stack[next] = true;
                        work.push((next, self.successors(next).collect::<Vec<_>>().into_iter().rev().collect()));
                    } else if on_stack[next] {
                        low[node] = low[node].min(index[next]);
                    }
                    continue;
                }
                work.pop();
                if let Some((parent, _)) = work.last() {
                    low[*parent] = low[*parent].min(low[node]);
                }
                if low[node] == index[node] {
                    let mut component = Vec::new();
                    loop {
                        let member = stack.pop().expect("tarjan stack underflow");
                        on_stack[member] = false;
                        component.push(member);
                        if member == node {
                            break;
                        }
                    }
                    component.sort_unstable();
                    out.push(component);
                }
            }
        }
        out.sort();
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.edges().all(|(a, b)| a != b) && self.sccs().iter().all(|c| c.len() == 1)
    }

    /// Whether edge `a -> b` is implied by a path of length ≥ 2.
    pub fn is_redundant(&self, a: usize, b: usize) -> bool {
        self.successors(a).filter(|&c| c != b).any(|c| self.reaches(c, b))
    }

    /// Transitive reduction of a DAG: drops every edge implied by a longer
    /// path. Reachability is unchanged.
    pub fn transitive_reduction(&self) -> Digraph {
        let mut out = self.clone();
        for (a, b) in self.edges() {
            if self.is_redundant(a, b) {
                out.remove_edge(a, b);
            }
        }
        out
    }
}
