//! Thermodynamics of labeled and unlabeled quantum graphs.
//!
//! A D=2 quantum graph state assigns a one-particle level to every edge slot
//! of the complete graph K_n. The crate provides exact results (closed forms,
//! exhaustive sums, Pólya counting), an automorphism-weighted Metropolis
//! sampler for the unlabeled ensemble, estimators with jackknife errors, and
//! multiple-histogram reweighting. A small exact operator algebra backs the
//! unlabeled construction.

pub mod analysis;
pub mod cli;
pub mod enumeration;
pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod hilbert;
pub mod mc;
pub mod symmetry;

pub use error::{Error, Result};
pub use graph::GraphState;
