//! Permutation action, automorphism counting and canonical labeling.

mod automorphism;
mod canonical;
mod permutation;
mod refine;

pub use automorphism::{automorphism_count, automorphism_count_bruteforce, factorial, labelings_count};
pub use canonical::{are_isomorphic, canonical_form, isomorphism_classes};
pub use permutation::{apply_permutation, AllPermutations, CycleType, Permutation};
