//! Exact operator algebra on the tensor-product edge basis at toy scale.
//!
//! Kets carry one level in `0..d` per edge slot (slot order as in
//! [`crate::graph`]). Amplitudes are exact rationals. Everything here is
//! guarded to small sizes because it serves as a correctness oracle.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{edge_count, edge_index, edge_pair};
use crate::symmetry::{factorial, Permutation};

/// Largest basis the module will enumerate.
pub const MAX_BASIS: u64 = 1 << 24;
/// Largest n for which S_n is summed over.
pub const MAX_PROJECTION_N: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    Symmetric,
    Antisymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKet {
    n: usize,
    d: u8,
    levels: Vec<u8>,
    sector: Sector,
}

impl BasisKet {
    pub fn new(n: usize, d: u8, levels: Vec<u8>, sector: Sector) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("one-particle dimension must be at least 1"));
        }
        if levels.len() != edge_count(n) {
            return Err(Error::invalid(format!("n={n} needs {} slot levels, got {}", edge_count(n), levels.len())));
        }
        if let Some(bad) = levels.iter().find(|&&l| l >= d) {
            return Err(Error::invalid(format!("level {bad} out of range for D={d}")));
        }
        Ok(BasisKet { n, d, levels, sector })
    }

    /// Ket from per-level edge lists, 0-based pairs; unlisted slots sit at level 0.
    pub fn from_level_sets(n: usize, d: u8, sets: &[&[(usize, usize)]], sector: Sector) -> Result<Self> {
        let mut levels = vec![0u8; edge_count(n)];
        for (k, set) in sets.iter().enumerate() {
            for &(i, j) in *set {
                levels[edge_index(i, j, n)?] = k as u8;
            }
        }
        BasisKet::new(n, d, levels, sector)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Level-k degree of vertex i.
    pub fn degree(&self, level: u8, i: usize) -> usize {
        (0..self.n)
            .filter(|&j| j != i)
            .filter(|&j| self.levels[edge_index(i, j, self.n).unwrap()] == level)
            .count()
    }
}

/// Sparse exact superposition of kets sharing (n, d, sector).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector {
    n: usize,
    d: u8,
    sector: Sector,
    amps: BTreeMap<Vec<u8>, BigRational>,
}

impl StateVector {
    pub fn zero(n: usize, d: u8, sector: Sector) -> Self {
        StateVector { n, d, sector, amps: BTreeMap::new() }
    }

    pub fn from_ket(ket: &BasisKet) -> Self {
        let mut v = StateVector::zero(ket.n, ket.d, ket.sector);
        v.amps.insert(ket.levels.clone(), BigRational::one());
        v
    }

    fn like(&self) -> Self {
        StateVector::zero(self.n, self.d, self.sector)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, levels: &[u8]) -> BigRational {
        self.amps.get(levels).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &BigRational)> {
        self.amps.iter().map(|(k, a)| (k.as_slice(), a))
    }

    /// Adds `amp` to the coefficient of `levels`, dropping exact zeros.
    pub fn add_term(&mut self, levels: Vec<u8>, amp: BigRational) {
        if amp.is_zero() {
            return;
        }
        match self.amps.entry(levels) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(amp);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += amp;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        let mut out = self.like();
        for (k, a) in &self.amps {
            out.add_term(k.clone(), a * c);
        }
        out
    }

    pub fn plus(&self, other: &StateVector) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, a) in &other.amps {
            out.add_term(k.clone(), a.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &StateVector) -> Result<Self> {
        self.plus(&other.scaled(&-BigRational::one()))
    }

    fn check_compatible(&self, other: &StateVector) -> Result<()> {
        if (self.n, self.d, self.sector) != (other.n, other.d, other.sector) {
            return Err(Error::invalid("state vectors live in different spaces"));
        }
        Ok(())
    }

    /// Floating-point amplitudes, on explicit request.
    pub fn to_f64(&self) -> Vec<(Vec<u8>, f64)> {
        self.amps.iter().map(|(k, a)| (k.clone(), a.to_f64().unwrap_or(f64::NAN))).collect()
    }

    fn map_kets(&self, mut f: impl FnMut(&[u8]) -> Option<(Vec<u8>, BigRational)>) -> Self {
        let mut out = self.like();
        for (k, a) in &self.amps {
            if let Some((k2, c)) = f(k) {
                out.add_term(k2, a * c);
            }
        }
        out
    }
}

fn check_slot(v: &StateVector, e: usize) -> Result<()> {
    if e >= edge_count(v.n) {
        return Err(Error::invalid(format!("edge slot {e} out of range for n={}", v.n)));
    }
    Ok(())
}

/// L± on slot `e`: shifts the level by one, annihilating at the boundary.
pub fn ladder_apply(dir: Ladder, e: usize, v: &StateVector) -> Result<StateVector> {
    check_slot(v, e)?;
    let top = v.d - 1;
    Ok(v.map_kets(|k| {
        let mut k2 = k.to_vec();
        match dir {
            Ladder::Raise if k[e] < top => k2[e] += 1,
            Ladder::Lower if k[e] > 0 => k2[e] -= 1,
            _ => return None,
        }
        Some((k2, BigRational::one()))
    }))
}

/// Projector I^k_e onto level k at slot e.
pub fn indicator_apply(e: usize, level: u8, v: &StateVector) -> Result<StateVector> {
    check_slot(v, e)?;
    check_level(v, level)?;
    Ok(v.map_kets(|k| (k[e] == level).then(|| (k.to_vec(), BigRational::one()))))
}

/// I^k_e built from the ladder word (L⁺)^k (L⁻)^(D−1) (L⁺)^(D−1−k).
pub fn indicator_via_ladder(e: usize, level: u8, v: &StateVector) -> Result<StateVector> {
    check_level(v, level)?;
    let mut out = v.clone();
    for _ in 0..(v.d - 1 - level) {
        out = ladder_apply(Ladder::Raise, e, &out)?;
    }
    for _ in 0..(v.d - 1) {
        out = ladder_apply(Ladder::Lower, e, &out)?;
    }
    for _ in 0..level {
        out = ladder_apply(Ladder::Raise, e, &out)?;
    }
    Ok(out)
}

fn check_level(v: &StateVector, level: u8) -> Result<()> {
    if level >= v.d {
        return Err(Error::invalid(format!("level {level} out of range for D={}", v.d)));
    }
    Ok(())
}

/// A labeled subgraph pattern together with the level it is tested at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphSpec {
    edges: Vec<(usize, usize)>,
    level: u8,
}

impl SubgraphSpec {
    pub fn new(edges: Vec<(usize, usize)>, level: u8) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(i, j) in &edges {
            if i == j {
                return Err(Error::invalid(format!("self-loop {{{i},{j}}} in subgraph")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::invalid(format!("repeated edge {{{i},{j}}} in subgraph")));
            }
        }
        Ok(SubgraphSpec { edges, level })
    }

    pub fn complete(m: usize, level: u8) -> Self {
        let edges = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        SubgraphSpec { edges, level }
    }

    /// The path 0–1–2.
    pub fn angle(level: u8) -> Self {
        SubgraphSpec { edges: vec![(0, 1), (1, 2)], level }
    }

    fn vertices(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        set.into_iter().collect()
    }
}

/// I^k_g, the product of edge indicators over the pattern's edges.
pub fn subgraph_indicator(g: &SubgraphSpec, v: &StateVector) -> Result<StateVector> {
    let mut out = v.clone();
    for &(i, j) in &g.edges {
        out = indicator_apply(edge_index(i, j, v.n)?, g.level, &out)?;
    }
    Ok(out)
}

/// 𝒩^k eigenvalue: number of slots at level k.
pub fn edge_occupation(ket: &BasisKet, level: u8) -> usize {
    ket.levels.iter().filter(|&&l| l == level).count()
}

/// 𝒩^k_g eigenvalue: number of distinct labeled copies of the pattern lying
/// entirely at the pattern's level.
pub fn subgraph_occupation(ket: &BasisKet, g: &SubgraphSpec) -> Result<usize> {
    let verts = g.vertices();
    if verts.len() > ket.n {
        return Ok(0);
    }
    let mut images: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut assignment = vec![usize::MAX; verts.iter().max().map_or(0, |&m| m + 1)];
    fn place(
        idx: usize,
        verts: &[usize],
        used: u64,
        assignment: &mut [usize],
        ket: &BasisKet,
        g: &SubgraphSpec,
        images: &mut BTreeSet<Vec<usize>>,
    ) {
        if idx == verts.len() {
            let mut slots = Vec::with_capacity(g.edges.len());
            for &(i, j) in &g.edges {
                let e = edge_index(assignment[i], assignment[j], ket.n).unwrap();
                if ket.levels[e] != g.level {
                    return;
                }
                slots.push(e);
            }
            slots.sort_unstable();
            images.insert(slots);
            return;
        }
        for x in 0..ket.n {
            if used >> x & 1 == 0 {
                assignment[verts[idx]] = x;
                place(idx + 1, verts, used | 1 << x, assignment, ket, g, images);
            }
        }
    }
    place(0, &verts, 0, &mut assignment, ket, g, &mut images);
    Ok(images.len())
}

/// Relabels a ket by π. In the antisymmetric sector every pair whose order
/// flips contributes a factor −1.
pub fn permute_ket(pi: &Permutation, ket: &BasisKet) -> Result<(BasisKet, i32)> {
    if pi.len() != ket.n {
        return Err(Error::invalid(format!("permutation of size {} on n={} ket", pi.len(), ket.n)));
    }
    let mut levels = vec![0u8; ket.levels.len()];
    let mut flips = 0usize;
    for (e, &l) in ket.levels.iter().enumerate() {
        let (i, j) = edge_pair(e, ket.n)?;
        let (a, b) = (pi.apply(i), pi.apply(j));
        if a > b {
            flips += 1;
        }
        levels[edge_index(a, b, ket.n)?] = l;
    }
    let phase = match ket.sector {
        Sector::Antisymmetric if flips % 2 == 1 => -1,
        _ => 1,
    };
    Ok((BasisKet { levels, ..ket.clone() }, phase))
}

pub fn permute(pi: &Permutation, v: &StateVector) -> Result<StateVector> {
    let mut out = v.like();
    for (k, a) in &v.amps {
        let ket = BasisKet { n: v.n, d: v.d, levels: k.clone(), sector: v.sector };
        let (k2, phase) = permute_ket(pi, &ket)?;
        out.add_term(k2.levels, a * BigRational::from_integer(phase.into()));
    }
    Ok(out)
}

fn project(v: &StateVector, signed: bool) -> Result<StateVector> {
    if v.n > MAX_PROJECTION_N {
        return Err(Error::refused(format!("projection sums S_n; needs n <= {MAX_PROJECTION_N}, got {}", v.n)));
    }
    let mut out = v.like();
    for pi in Permutation::all(v.n) {
        let sign = if signed { pi.sign() } else { 1 };
        for (k, a) in permute(&pi, v)?.amps {
            out.add_term(k, a * BigRational::from_integer(sign.into()));
        }
    }
    let norm = BigRational::new(BigInt::one(), BigInt::from(factorial(v.n)));
    Ok(out.scaled(&norm))
}

/// S = (1/n!) Σ_π π.
pub fn symmetrize(v: &StateVector) -> Result<StateVector> {
    project(v, false)
}

/// A = (1/n!) Σ_π sgn(π) π.
pub fn antisymmetrize(v: &StateVector) -> Result<StateVector> {
    project(v, true)
}

/// Per-vertex diagonal observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexObservable {
    /// deg^k_i
    Degree(u8),
}

impl VertexObservable {
    pub fn eigenvalue(&self, ket: &BasisKet, vertex: usize) -> BigRational {
        match *self {
            VertexObservable::Degree(k) => BigRational::from_integer(ket.degree(k, vertex).into()),
        }
    }
}

/// P O_i P for a fixed vertex i, with P the sector's projector.
#[derive(Clone, Copy, Debug)]
pub struct ProjectedOperator {
    op: VertexObservable,
    vertex: usize,
}

pub fn project_vertex_operator(op: VertexObservable, vertex: usize) -> ProjectedOperator {
    ProjectedOperator { op, vertex }
}

impl ProjectedOperator {
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.vertex >= v.n {
            return Err(Error::invalid(format!("vertex {} out of range for n={}", self.vertex, v.n)));
        }
        let projector = match v.sector {
            Sector::Symmetric => symmetrize,
            Sector::Antisymmetric => antisymmetrize,
        };
        let inner = projector(v)?;
        let mut diag = inner.like();
        for (k, a) in &inner.amps {
            let ket = BasisKet { n: v.n, d: v.d, levels: k.clone(), sector: v.sector };
            diag.add_term(k.clone(), a * self.op.eigenvalue(&ket, self.vertex));
        }
        projector(&diag)
    }

    /// Vertex average (1/n) Σ_i O_i on a labeled ket.
    pub fn averaged_eigenvalue(&self, ket: &BasisKet) -> BigRational {
        let total: BigRational = (0..ket.n).map(|i| self.op.eigenvalue(ket, i)).sum();
        total / BigRational::from_integer(ket.n.into())
    }
}

/// D^M, refused above [`MAX_BASIS`].
pub fn basis_size(n: usize, d: u8) -> Result<u64> {
    let m = edge_count(n) as u32;
    match (d as u64).checked_pow(m) {
        Some(size) if size <= MAX_BASIS => Ok(size),
        _ => Err(Error::refused(format!("basis D^M = {d}^{m} exceeds {MAX_BASIS}"))),
    }
}

/// Every basis ket of the sector, in lexicographic level order.
pub fn full_basis(n: usize, d: u8, sector: Sector) -> Result<Vec<BasisKet>> {
    let size = basis_size(n, d)?;
    let m = edge_count(n);
    let mut out = Vec::with_capacity(size as usize);
    for mut idx in 0..size {
        let mut levels = vec![0u8; m];
        for slot in (0..m).rev() {
            levels[slot] = (idx % d as u64) as u8;
            idx /= d as u64;
        }
        out.push(BasisKet { n, d, levels, sector });
    }
    Ok(out)
}

/// Number of kets whose occupied levels form exactly k' non-empty blocks,
/// indexed by k'.
pub fn occupation_census(n: usize, d: u8) -> Result<Vec<u64>> {
    let mut census = vec![0u64; d as usize + 1];
    for ket in full_basis(n, d, Sector::Symmetric)? {
        let used: BTreeSet<u8> = ket.levels.iter().copied().collect();
        census[used.len()] += 1;
    }
    Ok(census)
}

/// (D)_{k'} S(M, k') for k' = 0..=D.
pub fn stirling_terms(n: usize, d: u8) -> Vec<u64> {
    let m = edge_count(n);
    let d = d as usize;
    // S(j, k) by the usual recurrence
    let mut s = vec![vec![0u64; d + 1]; m + 1];
    s[0][0] = 1;
    for j in 1..=m {
        for k in 1..=d.min(j) {
            s[j][k] = k as u64 * s[j - 1][k] + s[j - 1][k - 1];
        }
    }
    (0..=d)
        .map(|k| {
            let falling: u64 = (0..k).map(|t| (d - t) as u64).product();
            falling * s[m][k]
        })
        .collect()
}

/// One-slot matrices of L⁺ and L⁻ in the convention (L⁺)_{nm} = 1 iff n = m−1,
/// i.e. row index is the input level.
pub fn one_slot_matrices(d: u8) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let d = d as usize;
    let mut plus = vec![vec![0i64; d]; d];
    let mut minus = vec![vec![0i64; d]; d];
    for n in 0..d {
        for m in 0..d {
            if n + 1 == m {
                plus[n][m] = 1;
            }
            if n == m + 1 {
                minus[n][m] = 1;
            }
        }
    }
    (plus, minus)
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Matrix of a one-slot operator from its ket action, ⟨n|O|m⟩ at [n][m].
pub fn action_matrix(d: u8, op: impl Fn(&StateVector) -> Result<StateVector>) -> Result<Vec<Vec<BigRational>>> {
    let basis = full_basis(2, d, Sector::Symmetric)?;
    let mut out = vec![vec![BigRational::zero(); d as usize]; d as usize];
    for (m, ket) in basis.iter().enumerate() {
        let image = op(&StateVector::from_ket(ket))?;
        for (k, a) in image.terms() {
            out[k[0] as usize][m] = a.clone();
        }
    }
    Ok(out)
}

/// Whether two operators agree on every basis ket of the sector.
pub fn agree_on_basis(
    n: usize,
    d: u8,
    sector: Sector,
    lhs: impl Fn(&StateVector) -> Result<StateVector>,
    rhs: impl Fn(&StateVector) -> Result<StateVector>,
) -> Result<bool> {
    for ket in full_basis(n, d, sector)? {
        let v = StateVector::from_ket(&ket);
        if lhs(&v)? != rhs(&v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact rational helper for tests and callers building amplitudes.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
