use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::enumeration::polya::big_ln;
use crate::enumeration::thermo::{BoltzmannStats, ExactObservables, WeightedPoint};
use crate::error::{Error, Result};
use crate::graph::{EdgeTable, GraphState};
use crate::hamiltonian::{energy_terms, terms_delta, EnergyTerms, Ensemble, ModelParams};
use crate::symmetry::{automorphism_count, factorial};

/// Largest n enumerated without the long-run opt-in.
pub const DEFAULT_MAX_N: usize = 7;
/// Largest n enumerated at all.
pub const LONG_MAX_N: usize = 10;

/// Everything an energy or observable can depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CensusKey {
    pub terms: EnergyTerms,
    pub largest: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CensusWeight {
    /// Number of labeled states.
    pub labeled: u64,
    /// Σ|Γ| over those states; divided by n! it is the unlabeled weight.
    pub gamma_sum: u128,
}

/// Integer histogram of all 2^{C(n,2)} states, shared by both models and
/// both ensembles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    pub n: usize,
    pub cells: BTreeMap<CensusKey, CensusWeight>,
}

impl Census {
    pub fn labeled_total(&self) -> u64 {
        self.cells.values().map(|w| w.labeled).sum()
    }

    pub fn gamma_total(&self) -> u128 {
        self.cells.values().map(|w| w.gamma_sum).sum()
    }

    pub fn points(&self, p: &ModelParams, ensemble: Ensemble) -> Result<Vec<WeightedPoint>> {
        if p.n != self.n {
            return Err(Error::invalid(format!("census for n={} used with n={} model", self.n, p.n)));
        }
        let slots = (self.n * (self.n - 1) / 2).max(1) as f64;
        let ln_fact = (1..=self.n).map(|k| (k as f64).ln()).sum::<f64>();
        Ok(self
            .cells
            .iter()
            .map(|(key, w)| WeightedPoint {
                energy: p.energy_of(key.terms),
                log_weight: match ensemble {
                    Ensemble::Labeled => (w.labeled as f64).ln(),
                    Ensemble::Unlabeled => big_ln(&w.gamma_sum.into()) - ln_fact,
                },
                m: key.terms.n1 as f64 / slots,
                s1: key.largest as f64 / self.n as f64,
            })
            .collect())
    }
}

fn check_size(n: usize, allow_long: bool) -> Result<()> {
    let cap = if allow_long { LONG_MAX_N } else { DEFAULT_MAX_N };
    if n == 0 || n > cap {
        let hint = if allow_long { "" } else { " (n = 8..10 needs the long-run flag)" };
        return Err(Error::refused(format!("exhaustive sums need 1 <= n <= {cap}, got {n}{hint}")));
    }
    Ok(())
}

/// Census for n, computed once per process.
pub fn census(n: usize, allow_long: bool) -> Result<Arc<Census>> {
    check_size(n, allow_long)?;
    static CACHE: [OnceLock<Arc<Census>>; LONG_MAX_N + 1] = [const { OnceLock::new() }; LONG_MAX_N + 1];
    Ok(CACHE[n].get_or_init(|| Arc::new(build_census(n))).clone())
}

/// Gray-code walk sharded by the top slot bits; shards merge in index order.
fn build_census(n: usize) -> Census {
    let table = EdgeTable::new(n);
    let m = table.len();
    let prefix_bits = m.min(6);
    let low = m - prefix_bits;
    let shards: Vec<BTreeMap<CensusKey, CensusWeight>> = (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut g = GraphState::empty(n).expect("n checked");
            for b in 0..prefix_bits {
                if prefix >> b & 1 == 1 {
                    let e = low + b;
                    let (i, j) = table.pair(e);
                    g.flip_pair_in_place(e, i, j);
                }
            }
            let mut terms = energy_terms(&g);
            let mut cells = BTreeMap::new();
            let mut record = |g: &GraphState, terms: EnergyTerms| {
                let key = CensusKey { terms, largest: g.largest_component_size() as u32 };
                let w: &mut CensusWeight = cells.entry(key).or_default();
                w.labeled += 1;
                w.gamma_sum += automorphism_count(g);
            };
            record(&g, terms);
            for step in 1u64..1 << low {
                let e = step.trailing_zeros() as usize;
                let (i, j) = table.pair(e);
                terms = terms + terms_delta(&g, i, j);
                g.flip_pair_in_place(e, i, j);
                record(&g, terms);
            }
            cells
        })
        .collect();
    let mut cells: BTreeMap<CensusKey, CensusWeight> = BTreeMap::new();
    for shard in shards {
        for (k, w) in shard {
            let slot = cells.entry(k).or_default();
            slot.labeled += w.labeled;
            slot.gamma_sum += w.gamma_sum;
        }
    }
    Census { n, cells }
}

/// Boltzmann moments from the full state sum.
pub fn exhaustive_partition(beta: f64, p: &ModelParams, ensemble: Ensemble, allow_long: bool) -> Result<BoltzmannStats> {
    let c = census(p.n, allow_long)?;
    Ok(BoltzmannStats::from_points(&c.points(p, ensemble)?, beta))
}

pub fn exact_observables(beta: f64, p: &ModelParams, ensemble: Ensemble, allow_long: bool) -> Result<ExactObservables> {
    Ok(exhaustive_partition(beta, p, ensemble, allow_long)?.observables(beta, p.n))
}

/// Exact observables on a β grid.
pub fn exact_curve(betas: &[f64], p: &ModelParams, ensemble: Ensemble, allow_long: bool) -> Result<Vec<ExactObservables>> {
    let pts = census(p.n, allow_long)?.points(p, ensemble)?;
    Ok(betas.iter().map(|&b| BoltzmannStats::from_points(&pts, b).observables(b, p.n)).collect())
}

/// Σ|Γ| must equal n! times the class count.
pub fn unlabeled_class_count(n: usize, allow_long: bool) -> Result<u128> {
    let c = census(n, allow_long)?;
    Ok(c.gamma_total() / factorial(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::polya::{edge_polynomial, polya_log_partition};
    use crate::enumeration::thermo::{er_edge_probability, labeled_free_thermo};
    use crate::hamiltonian::energy;
    use num_traits::ToPrimitive;

    #[test]
    fn census_totals() {
        for n in 1..=6 {
            let c = census(n, false).unwrap();
            assert_eq!(c.labeled_total(), 1u64 << (n * (n - 1) / 2));
            let d: u128 = edge_polynomial(n).unwrap().iter().map(|x| x.to_u128().unwrap()).sum();
            assert_eq!(unlabeled_class_count(n, false).unwrap(), d);
            assert_eq!(c.gamma_total() % factorial(n), 0);
        }
        assert!(census(8, false).is_err());
    }

    #[test]
    fn labeled_free_matches_closed_form() {
        let p = ModelParams::free(6, 0.0, 1.0).unwrap();
        for k in 1..=20 {
            let beta = 0.25 * k as f64;
            let exact = exact_observables(beta, &p, Ensemble::Labeled, false).unwrap();
            let closed = labeled_free_thermo(beta, &p).unwrap();
            assert!(((exact.thermo.f - closed.f) / closed.f).abs() < 1e-10);
            assert!(((exact.thermo.u - closed.u) / closed.u).abs() < 1e-10);
            assert!((exact.thermo.c - closed.c).abs() < 1e-9);
        }
        let q = ModelParams::free(5, 0.0, 1.0).unwrap();
        let s = exhaustive_partition(1.0, &q, Ensemble::Labeled, false).unwrap();
        assert!((1.0 - s.mean_m - er_edge_probability(1.0, &q).unwrap()).abs() < 1e-12);
        let hot = exact_observables(0.0, &q, Ensemble::Unlabeled, false).unwrap();
        assert!((hot.m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unlabeled_free_matches_polya() {
        let p = ModelParams::new(crate::hamiltonian::ModelKind::Free, 6, -0.2, 1.0, None).unwrap();
        for k in 0..20 {
            let beta = 0.3 * k as f64;
            let a = exhaustive_partition(beta, &p, Ensemble::Unlabeled, false).unwrap().log_z;
            let b = polya_log_partition(beta, &p).unwrap();
            assert!((a.exp() / b.exp() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn direct_sum_agrees_at_n4() {
        let p = ModelParams::ising(4, -0.5, 1.0).unwrap();
        let beta = 1.7;
        let (mut zl, mut zu) = (0.0, 0.0);
        for bits in 0u32..64 {
            let levels: Vec<u8> = (0..6).map(|e| (bits >> e & 1) as u8).collect();
            let g = GraphState::from_levels(4, &levels).unwrap();
            let w = (-beta * energy(&g, &p).unwrap()).exp();
            zl += w;
            zu += w * automorphism_count(&g) as f64 / 24.0;
        }
        let sl = exhaustive_partition(beta, &p, Ensemble::Labeled, false).unwrap();
        let su = exhaustive_partition(beta, &p, Ensemble::Unlabeled, false).unwrap();
        assert!((sl.log_z - zl.ln()).abs() < 1e-12);
        assert!((su.log_z - zu.ln()).abs() < 1e-12);
    }
}
