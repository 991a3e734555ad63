//! Individualization-refinement machinery shared by the automorphism count and
//! the canonical labeling.
//!
//! A partition is an ordered array of vertices cut into cells. A cell is named
//! by its start position, so names never depend on vertex labels. Refinement
//! splits cells by neighbour counts into splitter cells until the partition is
//! equitable.

use crate::graph::MAX_VERTICES;

const CAP: usize = MAX_VERTICES;

#[derive(Clone, Copy)]
pub(crate) struct Node {
    n: u8,
    cells: u8,
    /// Vertices in cell order.
    lab: [u8; CAP],
    /// Start of the cell holding each vertex.
    start_of: [u8; CAP],
    /// One past the end of the cell starting at each position.
    end: [u8; CAP],
}

impl Node {
    /// Partition from dense color ranks, cells ordered by rank.
    pub fn from_colors(color: &[u8]) -> Node {
        let n = color.len();
        let mut node = Node { n: n as u8, cells: 0, lab: [0; CAP], start_of: [0; CAP], end: [0; CAP] };
        let mut order: Vec<u8> = (0..n as u8).collect();
        order.sort_by_key(|&v| color[v as usize]);
        node.lab[..n].copy_from_slice(&order);
        let mut s = 0;
        while s < n {
            let mut e = s + 1;
            while e < n && color[order[e] as usize] == color[order[s] as usize] {
                e += 1;
            }
            for &v in &order[s..e] {
                node.start_of[v as usize] = s as u8;
            }
            node.end[s] = e as u8;
            node.cells += 1;
            s = e;
        }
        node
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn is_discrete(&self) -> bool {
        self.cells == self.n
    }

    /// Start positions of all cells, in order.
    fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        let mut s = 0usize;
        std::iter::from_fn(move || {
            (s < self.n()).then(|| {
                let cur = s;
                s = self.end[cur] as usize;
                cur
            })
        })
    }

    /// First smallest non-singleton cell, by start position.
    pub fn target_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for s in self.starts() {
            let size = self.end[s] as usize - s;
            if size > 1 && best.is_none_or(|(_, b)| size < b) {
                best = Some((s, size));
            }
        }
        best.map(|(s, _)| s)
    }

    pub fn members(&self, cell: usize) -> &[u8] {
        &self.lab[cell..self.end[cell] as usize]
    }

    /// Vertex at each position of a discrete partition.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.lab[..self.n()].iter().map(|&v| v as usize).collect()
    }

    fn mask(&self, cell: usize) -> u64 {
        self.members(cell).iter().fold(0u64, |m, &v| m | 1u64 << v)
    }
}

/// Refines to the coarsest equitable partition below `node`, starting from the
/// splitter cells in `queue`.
fn refine(adj: &[u64], node: &mut Node, queue: &mut Vec<usize>) {
    let n = node.n();
    let mut queued = 0u64;
    for &s in queue.iter() {
        queued |= 1u64 << s;
    }
    let mut head = 0;
    let mut counts = [0u8; CAP];
    while head < queue.len() && !node.is_discrete() {
        let w = queue[head];
        head += 1;
        queued &= !(1u64 << w);
        let wmask = node.mask(w);
        let mut s = 0;
        while s < n {
            let e = node.end[s] as usize;
            if e - s > 1 {
                let mut same = true;
                for p in s..e {
                    let v = node.lab[p] as usize;
                    counts[v] = (adj[v] & wmask).count_ones() as u8;
                    same &= counts[v] == counts[node.lab[s] as usize];
                }
                if !same {
                    node.lab[s..e].sort_unstable_by_key(|&v| counts[v as usize]);
                    let was_queued = queued >> s & 1 == 1;
                    let mut a = s;
                    while a < e {
                        let mut b = a + 1;
                        let key = counts[node.lab[a] as usize];
                        while b < e && counts[node.lab[b] as usize] == key {
                            b += 1;
                        }
                        for p in a..b {
                            node.start_of[node.lab[p] as usize] = a as u8;
                        }
                        node.end[a] = b as u8;
                        if a > s {
                            node.cells += 1;
                        }
                        if (a > s || !was_queued) && queued >> a & 1 == 0 {
                            queued |= 1u64 << a;
                            queue.push(a);
                        }
                        a = b;
                    }
                }
            }
            s = e;
        }
    }
    queue.clear();
}

pub(crate) fn equitable(adj: &[u64], color: &[u8]) -> Node {
    let mut node = Node::from_colors(color);
    let mut queue: Vec<usize> = node.starts().collect();
    refine(adj, &mut node, &mut queue);
    node
}

/// Splits `v` off the front of its cell and refines.
pub(crate) fn individualize(adj: &[u64], node: &Node, v: usize) -> Node {
    let mut child = *node;
    let s = child.start_of[v] as usize;
    let e = child.end[s] as usize;
    let pos = (s..e).find(|&p| child.lab[p] as usize == v).expect("vertex sits in its cell");
    child.lab.swap(s, pos);
    child.end[s] = s as u8 + 1;
    child.end[s + 1] = e as u8;
    for p in s + 1..e {
        child.start_of[child.lab[p] as usize] = s as u8 + 1;
    }
    child.cells += 1;
    let mut queue = vec![s];
    refine(adj, &mut child, &mut queue);
    child
}

/// Label-invariant hash of an equitable partition: cell sizes and the
/// quotient matrix of neighbour counts. Unequal hashes prove the partitions
/// are not related by an automorphism; equal hashes prove nothing.
pub(crate) fn certificate(adj: &[u64], node: &Node) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut mix = |x: u64| {
        h ^= x;
        h = h.wrapping_mul(0x0100_0000_01b3);
    };
    let mut masks = [0u64; CAP];
    let mut starts = [0u8; CAP];
    let mut k = 0;
    for s in node.starts() {
        starts[k] = s as u8;
        masks[k] = node.mask(s);
        mix(node.end[s] as u64 - s as u64);
        k += 1;
    }
    for &s in &starts[..k] {
        let r = node.lab[s as usize] as usize;
        for m in &masks[..k] {
            mix((adj[r] & m).count_ones() as u64);
        }
    }
    h
}

/// Whether `gamma` preserves adjacency and the initial coloring.
pub(crate) fn is_automorphism(adj: &[u64], initial: &[u8], gamma: &[usize]) -> bool {
    for v in 0..adj.len() {
        if initial[v] != initial[gamma[v]] {
            return false;
        }
        let mut image = 0u64;
        let mut rest = adj[v];
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            image |= 1u64 << gamma[u];
        }
        if image != adj[gamma[v]] {
            return false;
        }
    }
    true
}

/// Orbit of `v` under the group generated by `gens`, as a vertex mask.
pub(crate) fn orbit_mask<'a>(v: usize, gens: impl Iterator<Item = &'a Vec<usize>> + Clone) -> u64 {
    let mut orbit = 1u64 << v;
    let mut frontier = vec![v];
    while let Some(x) = frontier.pop() {
        for g in gens.clone() {
            let y = g[x];
            if orbit >> y & 1 == 0 {
                orbit |= 1u64 << y;
                frontier.push(y);
            }
        }
    }
    orbit
}

pub(crate) fn fixes_all(gamma: &[usize], points: &[usize]) -> bool {
    points.iter().all(|&p| gamma[p] == p)
}

/// Dense label-invariant ranks for arbitrary ordered keys.
pub(crate) fn ranks_of<K: Ord>(keys: &[K]) -> Vec<u8> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).unwrap() as u8).collect()
}
