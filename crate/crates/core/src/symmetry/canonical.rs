use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{edge_count, GraphState};
use crate::symmetry::refine::{equitable, fixes_all, individualize, orbit_mask, Node};

/// Lexicographically least slot word over the pruned search tree of
/// relabelings.
pub fn canonical_form(g: &GraphState) -> GraphState {
    let adj = g.adjacency();
    if g.n() == 1 {
        return g.clone();
    }
    let root = equitable(adj, &vec![0; g.n()]);
    let mut search = CanonSearch { adj, first: None, best: None, gens: Vec::new() };
    let mut prefix = Vec::new();
    search.explore(&root, 0, &mut prefix, &mut Vec::new());
    let (_, order) = search.best.expect("search visits at least one leaf");
    relabeled(adj, &order)
}

pub fn are_isomorphic(g: &GraphState, h: &GraphState) -> Result<bool> {
    if g.n() != h.n() {
        return Err(Error::invalid(format!("isomorphism test across n={} and n={}", g.n(), h.n())));
    }
    if g.n1() != h.n1() {
        return Ok(false);
    }
    Ok(canonical_form(g) == canonical_form(h))
}

/// Canonical representatives of all isomorphism classes on n vertices, by
/// exhaustive labeled enumeration. Refuses n > 7.
pub fn isomorphism_classes(n: usize) -> Result<BTreeSet<GraphState>> {
    if n > 7 {
        return Err(Error::refused(format!("class enumeration needs n <= 7, got {n}")));
    }
    let m = edge_count(n);
    let mut classes = BTreeSet::new();
    let mut g = GraphState::empty(n)?;
    classes.insert(canonical_form(&g));
    for i in 1u64..1 << m {
        g.flip_in_place(i.trailing_zeros() as usize)?;
        classes.insert(canonical_form(&g));
    }
    Ok(classes)
}

/// State whose vertex `t` is `order[t]` of the original.
fn relabeled(adj: &[u64], order: &[usize]) -> GraphState {
    let n = order.len();
    let mut pos = vec![0; n];
    for (t, &v) in order.iter().enumerate() {
        pos[v] = t;
    }
    let mut out = vec![0u64; n];
    for (v, &a) in adj.iter().enumerate() {
        let mut rest = a;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out[pos[v]] |= 1u64 << pos[u];
        }
    }
    GraphState::from_adjacency(&out)
}

struct CanonSearch<'a> {
    adj: &'a [u64],
    /// First leaf: its vertex order and word.
    first: Option<(Vec<u64>, Vec<usize>)>,
    best: Option<(Vec<u64>, Vec<usize>)>,
    gens: Vec<Vec<usize>>,
}

enum Flow {
    Continue,
    /// Unwind to the node at this depth.
    Jump(usize),
}

impl CanonSearch<'_> {
    /// `first_path` holds the vertices chosen along the first path, and
    /// `prefix` the vertices chosen along the current one.
    fn explore(&mut self, node: &Node, depth: usize, prefix: &mut Vec<usize>, first_path: &mut Vec<usize>) -> Flow {
        if node.is_discrete() {
            return self.leaf(node, prefix, first_path);
        }
        let cell = node.target_cell().expect("non-discrete node has a target cell");
        let mut done = 0u64;
        for u in node.members(cell).iter().map(|&u| u as usize) {
            if done >> u & 1 == 1 {
                continue;
            }
            if self.first.is_none() {
                first_path.push(u);
            }
            let child = individualize(self.adj, node, u);
            prefix.push(u);
            let flow = self.explore(&child, depth + 1, prefix, first_path);
            prefix.pop();
            if let Flow::Jump(d) = flow {
                if d < depth {
                    return flow;
                }
            }
            let stabilizer = self.gens.iter().filter(|g| fixes_all(g, prefix));
            done |= orbit_mask(u, stabilizer);
        }
        Flow::Continue
    }

    fn leaf(&mut self, node: &Node, prefix: &[usize], first_path: &[usize]) -> Flow {
        let order = node.leaf_order();
        let word = relabeled(self.adj, &order).words().to_vec();
        let Some((first_word, first_order)) = &self.first else {
            self.first = Some((word.clone(), order.clone()));
            self.best = Some((word, order));
            return Flow::Continue;
        };
        if &word == first_word {
            let mut gamma = vec![0; order.len()];
            for (t, &a) in first_order.iter().enumerate() {
                gamma[a] = order[t];
            }
            self.gens.push(gamma);
            let diverge = prefix.iter().zip(first_path).take_while(|(a, b)| a == b).count();
            return Flow::Jump(diverge);
        }
        let (best_word, best_order) = self.best.as_ref().unwrap();
        if &word == best_word {
            let mut gamma = vec![0; order.len()];
            for (t, &a) in best_order.iter().enumerate() {
                gamma[a] = order[t];
            }
            self.gens.push(gamma);
        } else if &word < best_word {
            self.best = Some((word, order));
        }
        Flow::Continue
    }
}
