//! Free and Ising energies for D=2 graph states.
//!
//! Free: H = J (E0 n₀ + E1 n₁). Ising: H = J (E0 b⁰ + E1 b¹) with
//! b^k = Σ_i C(d^k_i, 2). Energies are evaluated from integer terms so the
//! sampler's cached values never drift.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::graph::{edge_count, EdgeTable, GraphState};
use crate::symmetry::canonical_form;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Free,
    Ising,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Free => "free",
            ModelKind::Ising => "ising",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(ModelKind::Free),
            "ising" => Ok(ModelKind::Ising),
            other => Err(Error::invalid(format!("unknown model `{other}` (expected free or ising)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ensemble {
    Labeled,
    Unlabeled,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Labeled => "labeled",
            Ensemble::Unlabeled => "unlabeled",
        })
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "labeled" => Ok(Ensemble::Labeled),
            "unlabeled" => Ok(Ensemble::Unlabeled),
            other => Err(Error::invalid(format!("unknown ensemble `{other}` (expected labeled or unlabeled)"))),
        }
    }
}

/// J = 2/(n−1) for the free model, 1/C(n−1,2) for Ising.
pub fn default_coupling(kind: ModelKind, n: usize) -> Result<f64> {
    match kind {
        ModelKind::Free if n >= 2 => Ok(2.0 / (n - 1) as f64),
        ModelKind::Ising if n >= 3 => Ok(2.0 / ((n - 1) * (n - 2)) as f64),
        _ => Err(Error::invalid(format!("{kind} model needs more vertices than n={n}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n: usize,
    pub e0: f64,
    pub e1: f64,
    pub j: f64,
}

impl ModelParams {
    /// `j = None` selects the default coupling for the model.
    pub fn new(kind: ModelKind, n: usize, e0: f64, e1: f64, j: Option<f64>) -> Result<Self> {
        let j = match j {
            Some(j) => j,
            None => default_coupling(kind, n)?,
        };
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::invalid(format!("coupling J must be positive and finite, got {j}")));
        }
        if !(e0.is_finite() && e1.is_finite()) {
            return Err(Error::invalid("one-particle energies must be finite"));
        }
        if kind == ModelKind::Ising && n < 3 {
            return Err(Error::invalid(format!("ising model needs n >= 3, got {n}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("model needs n >= 2, got {n}")));
        }
        Ok(ModelParams { kind, n, e0, e1, j })
    }

    pub fn free(n: usize, e0: f64, e1: f64) -> Result<Self> {
        ModelParams::new(ModelKind::Free, n, e0, e1, None)
    }

    pub fn ising(n: usize, e0: f64, e1: f64) -> Result<Self> {
        ModelParams::new(ModelKind::Ising, n, e0, e1, None)
    }

    /// ΔE = E1 − E0.
    pub fn delta_e(&self) -> f64 {
        self.e1 - self.e0
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.n)
    }

    /// Energy of integer terms (n₁ for free, b⁰ and b¹ for Ising).
    #[inline]
    pub fn energy_of(&self, t: EnergyTerms) -> f64 {
        match self.kind {
            ModelKind::Free => {
                let n0 = self.edge_count() as i64 - t.n1;
                self.j * (self.e0 * n0 as f64 + self.e1 * t.n1 as f64)
            }
            ModelKind::Ising => self.j * (self.e0 * t.b0 as f64 + self.e1 * t.b1 as f64),
        }
    }

    /// Energy change for integer term changes.
    #[inline]
    pub fn delta_of(&self, d: EnergyTerms) -> f64 {
        match self.kind {
            ModelKind::Free => self.j * self.delta_e() * d.n1 as f64,
            ModelKind::Ising => self.j * (self.e0 * d.b0 as f64 + self.e1 * d.b1 as f64),
        }
    }

    fn check(&self, g: &GraphState) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::invalid(format!("model built for n={} applied to n={} state", self.n, g.n())));
        }
        Ok(())
    }
}

/// Integer quantities the energies depend on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnergyTerms {
    pub n1: i64,
    pub b0: i64,
    pub b1: i64,
}

impl std::ops::Add for EnergyTerms {
    type Output = EnergyTerms;

    fn add(self, o: EnergyTerms) -> EnergyTerms {
        EnergyTerms { n1: self.n1 + o.n1, b0: self.b0 + o.b0, b1: self.b1 + o.b1 }
    }
}

pub fn energy_terms(g: &GraphState) -> EnergyTerms {
    let n = g.n();
    let mut t = EnergyTerms { n1: g.n1() as i64, ..Default::default() };
    for i in 0..n {
        let d1 = g.degree1(i) as i64;
        let d0 = (n - 1) as i64 - d1;
        t.b0 += d0 * (d0 - 1) / 2;
        t.b1 += d1 * (d1 - 1) / 2;
    }
    t
}

/// Term changes from flipping the slot {i,j}, using degrees before the flip.
#[inline]
pub fn terms_delta(g: &GraphState, i: usize, j: usize) -> EnergyTerms {
    let n1 = g.n() as i64 - 1;
    let (di, dj) = (g.degree1(i) as i64, g.degree1(j) as i64);
    if g.has_edge(i, j) {
        EnergyTerms { n1: -1, b0: (n1 - di) + (n1 - dj), b1: -(di - 1) - (dj - 1) }
    } else {
        EnergyTerms { n1: 1, b0: -(n1 - di - 1) - (n1 - dj - 1), b1: di + dj }
    }
}

pub fn energy(g: &GraphState, p: &ModelParams) -> Result<f64> {
    p.check(g)?;
    Ok(p.energy_of(energy_terms(g)))
}

/// energy(flip_edge(G,e)) − energy(G) in O(1).
pub fn energy_delta(g: &GraphState, e: usize, p: &ModelParams) -> Result<f64> {
    p.check(g)?;
    let (i, j) = crate::graph::edge_pair(e, g.n())?;
    Ok(p.delta_of(terms_delta(g, i, j)))
}

/// Exact energy for rational parameters.
pub fn energy_exact(g: &GraphState, kind: ModelKind, e0: &BigRational, e1: &BigRational, j: &BigRational) -> BigRational {
    let t = energy_terms(g);
    let int = |x: i64| BigRational::from_integer(x.into());
    match kind {
        ModelKind::Free => j * (e0 * int(g.edge_count() as i64 - t.n1) + e1 * int(t.n1)),
        ModelKind::Ising => j * (e0 * int(t.b0) + e1 * int(t.b1)),
    }
}

/// Canonical representatives of every minimal-energy class (n ≤ 7).
pub fn ground_states(p: &ModelParams) -> Result<BTreeSet<GraphState>> {
    let n = p.n;
    if n > 7 {
        return Err(Error::refused(format!("exhaustive ground-state search needs n <= 7, got {n}")));
    }
    let table = EdgeTable::new(n);
    let m = table.len();
    let mut g = GraphState::empty(n)?;
    let mut terms = energy_terms(&g);
    let mut best = p.energy_of(terms);
    let mut minimizers = vec![g.clone()];
    let tol = |e: f64| 1e-9 * e.abs().max(1.0);
    for step in 1u64..1 << m {
        let e = step.trailing_zeros() as usize;
        let (i, j) = table.pair(e);
        terms = terms + terms_delta(&g, i, j);
        g.flip_pair_in_place(e, i, j);
        let energy = p.energy_of(terms);
        if energy < best - tol(best) {
            best = energy;
            minimizers.clear();
            minimizers.push(g.clone());
        } else if (energy - best).abs() <= tol(best) {
            minimizers.push(g.clone());
        }
    }
    Ok(minimizers.iter().map(canonical_form).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_pair;

    /// Line-graph form (J/2) Σ_k E_k Σ_{e~f} I^k_e I^k_f over slots sharing a vertex.
    fn ising_line_graph(g: &GraphState, p: &ModelParams) -> f64 {
        let m = g.edge_count();
        let mut sum = 0.0;
        for e in 0..m {
            for f in 0..m {
                if e == f {
                    continue;
                }
                let (a, b) = edge_pair(e, g.n()).unwrap();
                let (c, d) = edge_pair(f, g.n()).unwrap();
                if a == c || a == d || b == c || b == d {
                    if g.level(e) == g.level(f) {
                        sum += if g.level(e) == 0 { p.e0 } else { p.e1 };
                    }
                }
            }
        }
        p.j * sum / 2.0
    }

    #[test]
    fn couplings() {
        assert_eq!(default_coupling(ModelKind::Free, 5).unwrap(), 0.5);
        assert!((default_coupling(ModelKind::Ising, 5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(default_coupling(ModelKind::Free, 3).unwrap(), 1.0);
        assert!(default_coupling(ModelKind::Ising, 2).is_err());
        assert!(ModelParams::new(ModelKind::Free, 5, 0.0, 1.0, Some(-1.0)).is_err());
    }

    #[test]
    fn simple_energies() {
        let p = ModelParams::free(6, 0.0, 1.0).unwrap();
        assert_eq!(energy(&GraphState::empty(6).unwrap(), &p).unwrap(), 0.0);
        let full = energy(&GraphState::complete(6).unwrap(), &p).unwrap();
        assert!((full - 6.0).abs() < 1e-12);
        let q = ModelParams::new(ModelKind::Ising, 3, -0.5, 1.0, Some(1.0)).unwrap();
        assert_eq!(energy(&GraphState::empty(3).unwrap(), &q).unwrap(), -1.5);
        assert!(energy(&GraphState::empty(4).unwrap(), &q).is_err());
    }

    #[test]
    fn three_ising_forms_agree() {
        for n in 3..=6 {
            let p = ModelParams::ising(n, -0.5, 1.0).unwrap();
            let m = edge_count(n);
            for bits in 0u32..1 << m {
                let levels: Vec<u8> = (0..m).map(|e| (bits >> e & 1) as u8).collect();
                let g = GraphState::from_levels(n, &levels).unwrap();
                let angle = p.j * (p.e0 * g.angle_count(0).unwrap() as f64 + p.e1 * g.angle_count(1).unwrap() as f64);
                let degree = energy(&g, &p).unwrap();
                let line = ising_line_graph(&g, &p);
                assert!((angle - degree).abs() < 1e-12 && (line - degree).abs() < 1e-12, "{g}");
            }
        }
    }

    #[test]
    fn flip_deltas_cancel() {
        let p = ModelParams::ising(7, -0.5, 1.0).unwrap();
        let g = GraphState::from_edges(7, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        for e in 0..21 {
            let d1 = energy_delta(&g, e, &p).unwrap();
            let h = g.flip_edge(e).unwrap();
            let d2 = energy_delta(&h, e, &p).unwrap();
            assert!((d1 + d2).abs() < 1e-12);
            assert!((energy(&h, &p).unwrap() - energy(&g, &p).unwrap() - d1).abs() < 1e-12);
        }
        let f = ModelParams::free(7, 0.0, 1.0).unwrap();
        assert!((energy_delta(&g, 0, &f).unwrap() + f.j).abs() < 1e-15);
        assert!((energy_delta(&g, 1, &f).unwrap() - f.j).abs() < 1e-15);
    }

    #[test]
    fn antiferro_balance_reduces_to_free() {
        let n = 6;
        let ising = ModelParams::new(ModelKind::Ising, n, -1.0, 1.0, Some(1.0)).unwrap();
        let free = ModelParams::new(ModelKind::Free, n, 0.0, 1.0, Some(2.0 * (n - 2) as f64)).unwrap();
        let base = GraphState::empty(n).unwrap();
        let (i0, f0) = (energy(&base, &ising).unwrap(), energy(&base, &free).unwrap());
        for bits in (0u32..1 << 15).step_by(7) {
            let levels: Vec<u8> = (0..15).map(|e| (bits >> e & 1) as u8).collect();
            let g = GraphState::from_levels(n, &levels).unwrap();
            let di = energy(&g, &ising).unwrap() - i0;
            let df = energy(&g, &free).unwrap() - f0;
            assert!((di - df).abs() < 1e-9, "{g}");
        }
    }

    #[test]
    fn exact_energy_matches_float() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let g = GraphState::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let e = energy_exact(&g, ModelKind::Ising, &r(-1, 2), &r(1, 1), &r(1, 6));
        let p = ModelParams::ising(5, -0.5, 1.0).unwrap();
        assert!((num_traits::ToPrimitive::to_f64(&e).unwrap() - energy(&g, &p).unwrap()).abs() < 1e-12);
        assert_eq!("unlabeled".parse::<Ensemble>().unwrap(), Ensemble::Unlabeled);
        assert!("both".parse::<Ensemble>().is_err());
    }

    #[test]
    fn ground_state_classes() {
        let free = ModelParams::free(5, 0.0, 1.0).unwrap();
        let gs = ground_states(&free).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs.iter().next().unwrap().n1(), 0);
        assert_eq!(ground_states(&ModelParams::ising(7, 0.0, 1.0).unwrap()).unwrap().len(), 4);
        assert_eq!(ground_states(&ModelParams::ising(7, -1.0, 1.0).unwrap()).unwrap().len(), 1);
        assert!(ground_states(&ModelParams::free(8, 0.0, 1.0).unwrap()).is_err());
    }
}
