use crate::error::{Error, Result};
use crate::graph::{GraphState, MAX_VERTICES};
use crate::symmetry::permutation::{apply_permutation, Permutation};
use crate::symmetry::refine::{
    certificate, equitable, fixes_all, individualize, is_automorphism, orbit_mask, ranks_of, Node,
};

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// |Γ(G)|, the order of the automorphism group of the level-1 graph.
///
/// Twin classes are collapsed first (each class of k interchangeable vertices
/// contributes k!), then the colored quotient goes through
/// individualization-refinement with orbit pruning.
pub fn automorphism_count(g: &GraphState) -> u128 {
    let count = count_adjacency(g.adjacency());
    #[cfg(debug_assertions)]
    if g.n() <= 10 {
        debug_assert_eq!(count, count_adjacency(g.complement().adjacency()));
    }
    count
}

pub(crate) fn count_adjacency(adj: &[u64]) -> u128 {
    if !has_twins(adj) {
        return colored_order(adj, &vec![0; adj.len()]);
    }
    let (quotient, keys, multiplier) = collapse_twins(adj);
    if quotient.len() <= 1 {
        return multiplier;
    }
    multiplier * colored_order(&quotient, &keys)
}

fn has_twins(adj: &[u64]) -> bool {
    let n = adj.len();
    let mut open = [0u64; MAX_VERTICES];
    let mut closed = [0u64; MAX_VERTICES];
    for v in 0..n {
        open[v] = adj[v];
        closed[v] = adj[v] | 1u64 << v;
    }
    open[..n].sort_unstable();
    closed[..n].sort_unstable();
    open[..n].windows(2).any(|w| w[0] == w[1]) || closed[..n].windows(2).any(|w| w[0] == w[1])
}

/// Repeatedly merges classes of same-colored twins.
///
/// Returns the quotient adjacency, a label-invariant color rank for each
/// quotient vertex and the product of the class-size factorials. Each round
/// re-ranks vertices by (previous rank, class kind, class size).
fn collapse_twins(adj: &[u64]) -> (Vec<u64>, Vec<u8>, u128) {
    let mut adj = adj.to_vec();
    let mut rank = vec![0u8; adj.len()];
    let mut multiplier = 1u128;
    loop {
        let n = adj.len();
        if n <= 1 {
            return (adj, rank, multiplier);
        }
        // class id per vertex, kind and size per class
        let mut class = [u8::MAX; MAX_VERTICES];
        let mut kinds: Vec<(u8, u8)> = Vec::new();
        let mut idx = [0u8; MAX_VERTICES];
        for (kind, closed) in [(1u8, false), (2u8, true)] {
            let nb = |v: usize| if closed { adj[v] | 1u64 << v } else { adj[v] };
            let mut len = 0;
            for v in 0..n {
                if class[v] == u8::MAX {
                    idx[len] = v as u8;
                    len += 1;
                }
            }
            let idx = &mut idx[..len];
            idx.sort_unstable_by_key(|&v| (nb(v as usize), rank[v as usize]));
            let mut a = 0;
            while a < len {
                let key = (nb(idx[a] as usize), rank[idx[a] as usize]);
                let mut b = a + 1;
                while b < len && (nb(idx[b] as usize), rank[idx[b] as usize]) == key {
                    b += 1;
                }
                if b - a > 1 {
                    for &v in &idx[a..b] {
                        class[v as usize] = kinds.len() as u8;
                    }
                    kinds.push((kind, (b - a) as u8));
                }
                a = b;
            }
        }
        if kinds.is_empty() {
            return (adj, rank, multiplier);
        }
        let mut seen = vec![false; kinds.len()];
        let mut keep = Vec::new();
        let mut keys = Vec::new();
        for v in 0..n {
            match class[v] {
                u8::MAX => {
                    keep.push(v);
                    keys.push((rank[v], 0u8, 1u8));
                }
                c if !seen[c as usize] => {
                    seen[c as usize] = true;
                    let (kind, size) = kinds[c as usize];
                    multiplier *= factorial(size as usize);
                    keep.push(v);
                    keys.push((rank[v], kind, size));
                }
                _ => {}
            }
        }
        let mut q = vec![0u64; keep.len()];
        for (a, &va) in keep.iter().enumerate() {
            for (b, &vb) in keep.iter().enumerate() {
                if a != b && adj[va] >> vb & 1 == 1 {
                    q[a] |= 1u64 << b;
                }
            }
        }
        adj = q;
        rank = ranks_of(&keys);
    }
}

/// Order of the color-preserving automorphism group.
pub(crate) fn colored_order(adj: &[u64], initial: &[u8]) -> u128 {
    let root = equitable(adj, initial);
    if root.is_discrete() {
        return 1;
    }
    let mut path = Vec::with_capacity(adj.len());
    path.push(root);
    let mut choices = Vec::with_capacity(adj.len());
    while let Some(cell) = path.last().unwrap().target_cell() {
        let node = path.last().unwrap();
        let v = node.members(cell)[0] as usize;
        choices.push((cell, v));
        let child = individualize(adj, node, v);
        path.push(child);
    }
    let certs: Vec<u64> = path.iter().map(|node| certificate(adj, node)).collect();
    let first_leaf = path.last().unwrap().leaf_order();
    let search = Search { adj, initial, certs: &certs, first_leaf: &first_leaf };

    let mut gens: Vec<Vec<usize>> = Vec::new();
    let mut order = 1u128;
    for level in (0..choices.len()).rev() {
        let (cell, v) = choices[level];
        let node = &path[level];
        let prefix: Vec<usize> = choices[..level].iter().map(|&(_, u)| u).collect();
        let mut orbit = orbit_mask(v, gens.iter());
        for w in node.members(cell).iter().map(|&w| w as usize) {
            if orbit >> w & 1 == 1 {
                continue;
            }
            let child = individualize(adj, node, w);
            if certificate(adj, &child) != certs[level + 1] {
                continue;
            }
            let mut child_prefix = prefix.clone();
            child_prefix.push(w);
            if let Some(gamma) = search.find(&child, level + 1, &mut child_prefix, &gens) {
                gens.push(gamma);
                orbit = orbit_mask(v, gens.iter());
            }
        }
        order *= orbit.count_ones() as u128;
    }
    order
}

struct Search<'a> {
    adj: &'a [u64],
    initial: &'a [u8],
    certs: &'a [u64],
    first_leaf: &'a [usize],
}

impl Search<'_> {
    /// Looks below `node` for a leaf equivalent to the first leaf.
    fn find(&self, node: &Node, depth: usize, prefix: &mut Vec<usize>, gens: &[Vec<usize>]) -> Option<Vec<usize>> {
        if node.is_discrete() {
            let leaf = node.leaf_order();
            let mut gamma = vec![0; leaf.len()];
            for (t, &a) in self.first_leaf.iter().enumerate() {
                gamma[a] = leaf[t];
            }
            return is_automorphism(self.adj, self.initial, &gamma).then_some(gamma);
        }
        let cell = node.target_cell()?;
        let stabilizer: Vec<&Vec<usize>> = gens.iter().filter(|g| fixes_all(g, prefix)).collect();
        let mut failed = 0u64;
        for u in node.members(cell).iter().map(|&u| u as usize) {
            if failed >> u & 1 == 1 {
                continue;
            }
            let child = individualize(self.adj, node, u);
            if certificate(self.adj, &child) == self.certs[depth + 1] {
                prefix.push(u);
                let found = self.find(&child, depth + 1, prefix, gens);
                prefix.pop();
                if found.is_some() {
                    return found;
                }
            }
            failed |= orbit_mask(u, stabilizer.iter().copied());
        }
        None
    }
}

/// Literal count of fixing permutations. Refuses n > 8.
pub fn automorphism_count_bruteforce(g: &GraphState) -> Result<u128> {
    if g.n() > 8 {
        return Err(Error::refused(format!("brute-force automorphism count needs n <= 8, got {}", g.n())));
    }
    let mut count = 0u128;
    for pi in Permutation::all(g.n()) {
        if apply_permutation(g, &pi)? == *g {
            count += 1;
        }
    }
    Ok(count)
}

/// n!/|Γ(G)|, the number of distinct labelings of G.
pub fn labelings_count(g: &GraphState) -> u128 {
    factorial(g.n()) / automorphism_count(g)
}
