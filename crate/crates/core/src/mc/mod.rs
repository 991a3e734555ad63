//! Single-edge-flip Metropolis sampling for the labeled and unlabeled
//! ensembles, with the equilibrate / measure-τ / measure protocol.

pub mod autocorr;
pub mod balance;
pub mod chain;

pub use balance::{detailed_balance_exact, BalanceReport};
pub use autocorr::{autocorrelation, integrated_autocorrelation, TauEstimate};
pub use chain::{
    acceptance_probability, ensemble_log_weight, knee_beta, run_chain, sweep_parameter_grid, Chain, ChainConfig,
    Measurement, Probability, RunRecord, StartState, DEFAULT_MAX_SWEEPS, DEFAULT_MEASUREMENTS,
};
