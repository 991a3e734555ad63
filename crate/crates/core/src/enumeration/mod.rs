//! Exact answers: closed forms for the labeled free model, exhaustive state
//! sums for small n, and pair-group counting for the unlabeled free model.

pub mod exhaustive;
pub mod polya;
pub mod thermo;

pub use exhaustive::{census, exact_curve, exact_observables, exhaustive_partition, Census, CensusKey, CensusWeight};
pub use polya::{edge_polynomial, pair_group_cycle_index, polya_curve, polya_log_partition, polya_observables};
pub use thermo::{
    er_edge_probability, labeled_free_observables, labeled_free_thermo, BoltzmannStats, ExactObservables, ThermoPoint,
    WeightedPoint,
};
