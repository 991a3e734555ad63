use std::fmt;

use crate::error::{Error, Result};
use crate::graph::GraphState;

/// A vertex relabeling, `image[i] = π(i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::invalid(format!("not a permutation: {image:?}")));
            }
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::invalid(format!("transposition ({a} {b}) out of range for n={n}")));
        }
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Ok(Permutation { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::invalid("composing permutations of different sizes"));
        }
        Ok(Permutation { image: other.image.iter().map(|&x| self.image[x]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { image: inv }
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.image[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::new(self.cycles().iter().map(Vec::len).collect())
    }

    /// +1 for even permutations, −1 for odd.
    pub fn sign(&self) -> i32 {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All n! permutations in lexicographic order of images.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations { next: Some((0..n).collect()) }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.image)
    }
}

pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut a = current.clone();
        let len = a.len();
        if len > 1 {
            if let Some(i) = (0..len - 1).rev().find(|&i| a[i] < a[i + 1]) {
                let j = (i + 1..len).rev().find(|&j| a[j] > a[i]).unwrap();
                a.swap(i, j);
                a[i + 1..].reverse();
                self.next = Some(a);
            }
        }
        Some(Permutation { image: current })
    }
}

/// Multiset of cycle lengths, kept sorted in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// A permutation with this cycle type on consecutive vertices.
    pub fn representative(&self) -> Permutation {
        let n = self.total();
        let mut image: Vec<usize> = (0..n).collect();
        let mut start = 0;
        for &len in &self.parts {
            for k in 0..len {
                image[start + k] = start + (k + 1) % len;
            }
            start += len;
        }
        Permutation { image }
    }
}

/// Relabels vertices: slot {π(i),π(j)} of the result carries the level of {i,j}.
pub fn apply_permutation(g: &GraphState, pi: &Permutation) -> Result<GraphState> {
    if pi.len() != g.n() {
        return Err(Error::invalid(format!(
            "permutation of size {} applied to n={} state",
            pi.len(),
            g.n()
        )));
    }
    let mut adj = vec![0u64; g.n()];
    for (i, &a) in g.adjacency().iter().enumerate() {
        let mut rest = a;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            adj[pi.apply(i)] |= 1u64 << pi.apply(j);
        }
    }
    Ok(GraphState::from_adjacency(&adj))
}
