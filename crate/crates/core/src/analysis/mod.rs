//! Estimators with jackknife errors and multiple-histogram reweighting.

pub mod estimate;
pub mod reweight;

pub use estimate::{autocorrelation_curve, estimate, estimate_record, jackknife_bin, Observable, ObservableEstimate, Series};
pub use reweight::{energy_quantum, reweight_with_errors, CurvePoint, Reweighter, OVERLAP_THRESHOLD};
