//! Edge-indexed D=2 graph states.
//!
//! A state assigns level 0 or 1 to every slot of K_n. Slots are ranked
//! lexicographically over pairs `i < j` with 0-based vertices, so for n=4 the
//! order is 01, 02, 03, 12, 13, 23.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported vertex count (|Γ| ≤ 34! fits in a u128).
pub const MAX_VERTICES: usize = 34;

pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i == j {
        return Err(Error::invalid(format!("edge endpoints coincide ({i})")));
    }
    if i >= n || j >= n {
        return Err(Error::invalid(format!("vertex out of range for n={n}: {{{i},{j}}}")));
    }
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    Ok(rank(a, b, n))
}

#[inline]
pub(crate) fn rank(i: usize, j: usize, n: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub fn edge_pair(e: usize, n: usize) -> Result<(usize, usize)> {
    if e >= edge_count(n) {
        return Err(Error::invalid(format!("edge slot {e} out of range for n={n}")));
    }
    let mut rest = e;
    for i in 0..n {
        let row = n - i - 1;
        if rest < row {
            return Ok((i, i + 1 + rest));
        }
        rest -= row;
    }
    unreachable!()
}

/// Slot-to-pair lookup, built once per vertex count for hot loops.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pairs: Vec<(u8, u8)>,
}

impl EdgeTable {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(edge_count(n));
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i as u8, j as u8));
            }
        }
        EdgeTable { pairs }
    }

    #[inline]
    pub fn pair(&self, e: usize) -> (usize, usize) {
        let (i, j) = self.pairs[e];
        (i as usize, j as usize)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A basis state |G₀,G₁⟩. Bit value of a slot is its one-particle level.
///
/// `words` stores slot `e` at bit `63 - e % 64` of word `e / 64`, so comparing
/// word vectors compares bit-strings lexicographically. `adj` caches the
/// level-1 neighbourhoods.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GraphState {
    n: usize,
    words: Vec<u64>,
    adj: Vec<u64>,
}

impl GraphState {
    /// All slots at level 0 (the free ground state).
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::invalid(format!("vertex count {n} outside 1..={MAX_VERTICES}")));
        }
        let m = edge_count(n);
        Ok(GraphState { n, words: vec![0; m.div_ceil(64).max(1)], adj: vec![0; n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Ok(Self::empty(n)?.complement())
    }

    /// Builds a state with the listed pairs at level 1.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(i, j) in edges {
            let e = edge_index(i, j, n)?;
            if g.level(e) == 1 {
                return Err(Error::invalid(format!("duplicate edge {{{i},{j}}}")));
            }
            g.toggle(e, i.min(j), i.max(j));
        }
        Ok(g)
    }

    /// Builds a state from per-slot levels.
    pub fn from_levels(n: usize, levels: &[u8]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        if levels.len() != g.edge_count() {
            return Err(Error::invalid(format!(
                "expected {} slot levels, got {}",
                g.edge_count(),
                levels.len()
            )));
        }
        let mut e = 0;
        for i in 0..n {
            for j in i + 1..n {
                match levels[e] {
                    0 => {}
                    1 => g.toggle(e, i, j),
                    x => return Err(Error::invalid(format!("slot {e} has level {x}"))),
                }
                e += 1;
            }
        }
        Ok(g)
    }

    /// Builds a state from level-1 adjacency masks. Masks must be symmetric
    /// with an empty diagonal.
    pub(crate) fn from_adjacency(adj: &[u64]) -> Self {
        let n = adj.len();
        let mut g = Self::empty(n).expect("vertex count checked by caller");
        let mut e = 0;
        for i in 0..n {
            for j in i + 1..n {
                if adj[i] >> j & 1 == 1 {
                    g.words[e / 64] |= 1u64 << (63 - e % 64);
                }
                e += 1;
            }
        }
        g.adj.copy_from_slice(adj);
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.n)
    }

    #[inline]
    pub fn level(&self, e: usize) -> u8 {
        (self.words[e / 64] >> (63 - e % 64) & 1) as u8
    }

    pub fn levels(&self) -> Vec<u8> {
        (0..self.edge_count()).map(|e| self.level(e)).collect()
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    /// Level-1 neighbourhood masks, one per vertex.
    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// n₁, the number of level-1 slots.
    pub fn n1(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn n0(&self) -> usize {
        self.edge_count() - self.n1()
    }

    pub fn count(&self, level: u8) -> usize {
        if level == 0 {
            self.n0()
        } else {
            self.n1()
        }
    }

    #[inline]
    pub fn degree1(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    pub fn degrees(&self, level: u8) -> Result<Vec<usize>> {
        check_level(level)?;
        Ok((0..self.n)
            .map(|i| if level == 1 { self.degree1(i) } else { self.n - 1 - self.degree1(i) })
            .collect())
    }

    /// b^k = Σ_i C(d^k_i, 2), the number of length-2 paths at level k.
    pub fn angle_count(&self, level: u8) -> Result<u64> {
        Ok(self.degrees(level)?.into_iter().map(|d| (d * d.saturating_sub(1) / 2) as u64).sum())
    }

    /// Size of the largest connected component of the level-1 graph.
    pub fn largest_component_size(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        let mut size = vec![1usize; self.n];
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..self.n {
            let mut rest = self.adj[i] & !((2u64 << i) - 1);
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    let (big, small) = if size[a] >= size[b] { (a, b) } else { (b, a) };
                    parent[small] = big;
                    size[big] += size[small];
                }
            }
        }
        (0..self.n).filter(|&i| parent[i] == i).map(|i| size[i]).max().unwrap_or(0)
    }

    /// s₁, the fraction of vertices in the largest level-1 component.
    pub fn largest_component_fraction(&self) -> f64 {
        self.largest_component_size() as f64 / self.n as f64
    }

    #[inline]
    fn toggle(&mut self, e: usize, i: usize, j: usize) {
        self.words[e / 64] ^= 1u64 << (63 - e % 64);
        self.adj[i] ^= 1u64 << j;
        self.adj[j] ^= 1u64 << i;
    }

    /// In-place flip of slot `e` whose endpoints are already known.
    #[inline]
    pub fn flip_pair_in_place(&mut self, e: usize, i: usize, j: usize) {
        debug_assert_eq!(rank(i.min(j), i.max(j), self.n), e);
        self.toggle(e, i, j);
    }

    pub fn flip_in_place(&mut self, e: usize) -> Result<()> {
        let (i, j) = edge_pair(e, self.n)?;
        self.toggle(e, i, j);
        Ok(())
    }

    pub fn flip_edge(&self, e: usize) -> Result<GraphState> {
        let mut g = self.clone();
        g.flip_in_place(e)?;
        Ok(g)
    }

    pub fn complement(&self) -> GraphState {
        let m = self.edge_count();
        let mut g = self.clone();
        for (w, word) in g.words.iter_mut().enumerate() {
            let bits = (m - w * 64).min(64);
            let mask = if bits == 64 { u64::MAX } else { !(u64::MAX >> bits) };
            *word ^= mask;
        }
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        for (i, a) in g.adj.iter_mut().enumerate() {
            *a ^= all & !(1u64 << i);
        }
        g
    }

    /// Text form `n=<int>;` followed by one `0`/`1` per slot.
    pub fn serialize(&self) -> String {
        let mut s = format!("n={};", self.n);
        s.extend((0..self.edge_count()).map(|e| if self.level(e) == 1 { '1' } else { '0' }));
        s
    }

    pub fn parse(text: &str) -> Result<GraphState> {
        let bytes = text.as_bytes();
        let err = |offset: usize, message: &str| Error::Parse { offset, message: message.into() };
        if !text.starts_with("n=") {
            return Err(err(0, "expected header `n=`"));
        }
        let digits_end = bytes[2..].iter().position(|b| !b.is_ascii_digit()).map_or(bytes.len(), |p| p + 2);
        if digits_end == 2 {
            return Err(err(2, "expected vertex count"));
        }
        let n: usize = text[2..digits_end].parse().map_err(|_| err(2, "vertex count does not fit"))?;
        if bytes.get(digits_end) != Some(&b';') {
            return Err(err(digits_end, "expected `;` after vertex count"));
        }
        if n == 0 || n > MAX_VERTICES {
            return Err(err(2, &format!("vertex count {n} outside 1..={MAX_VERTICES}")));
        }
        let body = &bytes[digits_end + 1..];
        let m = edge_count(n);
        if let Some(p) = body.iter().position(|&b| b != b'0' && b != b'1') {
            return Err(err(digits_end + 1 + p, "expected `0` or `1`"));
        }
        if body.len() != m {
            return Err(err(
                digits_end + 1 + body.len().min(m),
                &format!("expected {m} slot characters, found {}", body.len()),
            ));
        }
        let levels: Vec<u8> = body.iter().map(|b| b - b'0').collect();
        GraphState::from_levels(n, &levels)
    }
}

fn check_level(level: u8) -> Result<()> {
    if level > 1 {
        return Err(Error::invalid(format!("level {level} not in {{0,1}}")));
    }
    Ok(())
}

impl PartialOrd for GraphState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by vertex count, then lexicographically by slot bit-string.
impl Ord for GraphState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.words.cmp(&other.words))
    }
}

impl fmt::Debug for GraphState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphState({})", self.serialize())
    }
}

impl fmt::Display for GraphState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_ranks() {
        assert_eq!(edge_index(0, 1, 4).unwrap(), 0);
        assert_eq!(edge_index(0, 2, 4).unwrap(), 1);
        assert_eq!(edge_index(2, 3, 4).unwrap(), 5);
        assert_eq!(edge_pair(3, 4).unwrap(), (1, 2));
        for e in 0..6 {
            let (i, j) = edge_pair(e, 4).unwrap();
            assert_eq!(edge_index(i, j, 4).unwrap(), e);
        }
        assert!(edge_index(2, 2, 4).is_err());
        assert!(edge_index(0, 4, 4).is_err());
        assert!(edge_pair(6, 4).is_err());
    }

    #[test]
    fn ranks_increase_lexicographically() {
        let n = 9;
        let mut last = None;
        for i in 0..n {
            for j in i + 1..n {
                let e = edge_index(i, j, n).unwrap();
                if let Some(prev) = last {
                    assert_eq!(e, prev + 1);
                }
                last = Some(e);
            }
        }
    }

    #[test]
    fn degrees_of_simple_states() {
        let g = GraphState::empty(5).unwrap();
        assert_eq!(g.degrees(0).unwrap(), vec![4; 5]);
        assert_eq!(g.degrees(1).unwrap(), vec![0; 5]);
        let g = GraphState::from_edges(4, &[(0, 1)]).unwrap();
        assert_eq!(g.degrees(1).unwrap(), vec![1, 1, 0, 0]);
        assert!(g.degrees(2).is_err());
    }

    #[test]
    fn angle_counts() {
        let tri = GraphState::complete(3).unwrap();
        assert_eq!(tri.angle_count(1).unwrap(), 3);
        assert_eq!(GraphState::empty(3).unwrap().angle_count(0).unwrap(), 3);
        let star = GraphState::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.angle_count(1).unwrap(), 3);
    }

    #[test]
    fn component_fractions() {
        assert_eq!(GraphState::empty(10).unwrap().largest_component_fraction(), 0.1);
        assert_eq!(GraphState::complete(10).unwrap().largest_component_fraction(), 1.0);
        let g = GraphState::from_edges(5, &[(0, 1)]).unwrap();
        assert_eq!(g.largest_component_fraction(), 0.4);
    }

    #[test]
    fn flips() {
        let g = GraphState::empty(6).unwrap();
        let h = g.flip_edge(7).unwrap();
        assert_eq!(h.n1(), 1);
        assert_eq!(h.n0() + h.n1(), 15);
        assert_eq!(h.flip_edge(7).unwrap(), g);
        assert!(g.flip_edge(15).is_err());
    }

    #[test]
    fn text_format() {
        assert_eq!(GraphState::empty(3).unwrap().serialize(), "n=3;000");
        let g = GraphState::parse("n=3;101").unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && !g.has_edge(0, 2));
        match GraphState::parse("n=3;10") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {other:?}"),
        }
        match GraphState::parse("n=3;1x1") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(GraphState::parse("m=3;000").is_err());
        assert!(GraphState::parse("n=3000").is_err());
        assert!(GraphState::parse("n=3;0000").is_err());
    }

    #[test]
    fn complement_on_wide_states() {
        let g = GraphState::from_edges(20, &[(0, 19), (3, 4)]).unwrap();
        let c = g.complement();
        assert_eq!(c.n1(), 190 - 2);
        assert_eq!(c.complement(), g);
        assert_eq!(c.degrees(0).unwrap(), g.degrees(1).unwrap());
    }
}
