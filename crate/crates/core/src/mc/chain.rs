use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeTable, GraphState};
use crate::hamiltonian::{energy_terms, terms_delta, EnergyTerms, Ensemble, ModelParams};
use crate::mc::autocorr::{integrated_autocorrelation, TauEstimate};
use crate::symmetry::{automorphism_count, factorial};

/// Numbers the acceptance rule can be evaluated in.
pub trait Probability: Clone + PartialOrd + One + Mul<Output = Self> + Div<Output = Self> {
    fn from_count(x: u128) -> Self;
}

impl Probability for f64 {
    fn from_count(x: u128) -> Self {
        x as f64
    }
}

impl Probability for BigRational {
    fn from_count(x: u128) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
}

/// min{1, r} with r = e^{−βΔE} (labeled) or (|Γ'|/|Γ|)·e^{−βΔE} (unlabeled).
pub fn acceptance_probability<T: Probability>(boltzmann: T, gamma_old: u128, gamma_new: u128, ensemble: Ensemble) -> T {
    let r = match ensemble {
        Ensemble::Labeled => boltzmann,
        Ensemble::Unlabeled => T::from_count(gamma_new) / T::from_count(gamma_old) * boltzmann,
    };
    if r > T::one() {
        T::one()
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StartState {
    /// Uniformly random slots.
    Hot,
    /// All slots at level 0.
    Cold,
    /// Cold above the estimated knee β, hot below it.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub params: ModelParams,
    pub beta: f64,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub stream: u64,
    /// None selects 200·max(τ_pilot, 1) sweeps.
    pub equilibration_sweeps: Option<u64>,
    pub target_measurements: usize,
    pub max_sweeps: u64,
    pub start: StartState,
}

pub const DEFAULT_MEASUREMENTS: usize = 1000;
pub const DEFAULT_MAX_SWEEPS: u64 = 10_000_000;
const PILOT_SWEEPS: u64 = 500;

impl ChainConfig {
    pub fn new(params: ModelParams, beta: f64, ensemble: Ensemble, seed: u64) -> Self {
        ChainConfig {
            params,
            beta,
            ensemble,
            seed,
            stream: 0,
            equilibration_sweeps: None,
            target_measurements: DEFAULT_MEASUREMENTS,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            start: StartState::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be finite and non-negative, got {}", self.beta)));
        }
        if self.target_measurements < 1 {
            return Err(Error::invalid("target_measurements must be at least 1"));
        }
        if self.params.n > crate::graph::MAX_VERTICES {
            return Err(Error::invalid(format!("n={} exceeds {}", self.params.n, crate::graph::MAX_VERTICES)));
        }
        Ok(())
    }
}

/// β where the cold state stops dominating, from balancing the single-flip
/// excitation against the unlabeled entropy ln(n!)/M per slot. None when the
/// all-zero state is not a local minimum.
pub fn knee_beta(p: &ModelParams) -> Option<f64> {
    let g = GraphState::empty(p.n).ok()?;
    let eps = p.delta_of(terms_delta(&g, 0, 1));
    if eps <= 0.0 {
        return None;
    }
    let m = p.edge_count() as f64;
    let ln_fact = (1..=p.n).map(|k| (k as f64).ln()).sum::<f64>();
    let x = (ln_fact / m).exp() - 1.0;
    Some((-x.ln() / eps).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub sweep: u64,
    pub energy: f64,
    pub n1: u64,
    pub s1: f64,
    /// |Γ| of the measured state, unlabeled runs only.
    pub gamma: Option<u128>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config: ChainConfig,
    pub rows: Vec<Measurement>,
    /// Energy autocorrelation time in sweeps, from the run after equilibration.
    pub tau: f64,
    pub tau_pilot: f64,
    pub spacing: u64,
    pub equilibration_sweeps: u64,
    pub total_sweeps: u64,
    pub acceptance_rate: f64,
    pub converged: bool,
}

/// One Metropolis chain owning its state and random stream.
pub struct Chain {
    params: ModelParams,
    beta: f64,
    ensemble: Ensemble,
    table: EdgeTable,
    state: GraphState,
    terms: EnergyTerms,
    gamma: u128,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl Chain {
    pub fn new(params: ModelParams, beta: f64, ensemble: Ensemble, seed: u64, stream: u64, start: GraphState) -> Result<Chain> {
        if start.n() != params.n {
            return Err(Error::invalid(format!("start state has n={}, model n={}", start.n(), params.n)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let gamma = match ensemble {
            Ensemble::Labeled => 1,
            Ensemble::Unlabeled => automorphism_count(&start),
        };
        Ok(Chain {
            table: EdgeTable::new(params.n),
            terms: energy_terms(&start),
            state: start,
            gamma,
            params,
            beta,
            ensemble,
            rng,
            proposed: 0,
            accepted: 0,
        })
    }

    /// Chain whose start state is drawn from its own stream when hot.
    pub fn from_config(cfg: &ChainConfig) -> Result<Chain> {
        cfg.validate()?;
        let mut chain = Chain::new(cfg.params, cfg.beta, cfg.ensemble, cfg.seed, cfg.stream, GraphState::empty(cfg.params.n)?)?;
        let hot = match cfg.start {
            StartState::Hot => true,
            StartState::Cold => false,
            StartState::Auto => knee_beta(&cfg.params).is_none_or(|knee| cfg.beta < knee),
        };
        if hot {
            let m = chain.table.len();
            let levels: Vec<u8> = (0..m).map(|_| chain.rng.random_range(0..2u8)).collect();
            let g = GraphState::from_levels(cfg.params.n, &levels)?;
            chain.reset_state(g);
        }
        Ok(chain)
    }

    fn reset_state(&mut self, g: GraphState) {
        self.terms = energy_terms(&g);
        self.gamma = match self.ensemble {
            Ensemble::Labeled => 1,
            Ensemble::Unlabeled => automorphism_count(&g),
        };
        self.state = g;
    }

    pub fn state(&self) -> &GraphState {
        &self.state
    }

    pub fn energy(&self) -> f64 {
        self.params.energy_of(self.terms)
    }

    pub fn terms(&self) -> EnergyTerms {
        self.terms
    }

    pub fn gamma(&self) -> u128 {
        self.gamma
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Proposes a uniformly random slot flip and applies the acceptance rule.
    pub fn metropolis_step(&mut self) -> bool {
        let e = self.rng.random_range(0..self.table.len());
        let (i, j) = self.table.pair(e);
        let dt = terms_delta(&self.state, i, j);
        let boltzmann = (-self.beta * self.params.delta_of(dt)).exp();
        self.proposed += 1;
        let accepted = match self.ensemble {
            Ensemble::Labeled => {
                let a = acceptance_probability(boltzmann, 1, 1, Ensemble::Labeled);
                let ok = a >= 1.0 || self.rng.random::<f64>() < a;
                if ok {
                    self.state.flip_pair_in_place(e, i, j);
                }
                ok
            }
            Ensemble::Unlabeled => {
                self.state.flip_pair_in_place(e, i, j);
                let gamma_new = automorphism_count(&self.state);
                let a = acceptance_probability(boltzmann, self.gamma, gamma_new, Ensemble::Unlabeled);
                let ok = a >= 1.0 || self.rng.random::<f64>() < a;
                if ok {
                    self.gamma = gamma_new;
                } else {
                    self.state.flip_pair_in_place(e, i, j);
                }
                ok
            }
        };
        if accepted {
            self.terms = self.terms + dt;
            self.accepted += 1;
        }
        #[cfg(debug_assertions)]
        if self.proposed.is_multiple_of(1 << 12) {
            debug_assert_eq!(self.terms, energy_terms(&self.state));
            if self.ensemble == Ensemble::Unlabeled {
                debug_assert_eq!(self.gamma, automorphism_count(&self.state));
            }
        }
        accepted
    }

    /// C(n,2) steps.
    pub fn sweep(&mut self) {
        for _ in 0..self.table.len() {
            self.metropolis_step();
        }
    }

    pub fn measure(&self, sweep: u64) -> Measurement {
        Measurement {
            sweep,
            energy: self.energy(),
            n1: self.terms.n1 as u64,
            s1: self.state.largest_component_fraction(),
            gamma: (self.ensemble == Ensemble::Unlabeled).then_some(self.gamma),
        }
    }
}

/// Runs the full protocol: pilot, equilibration, τ run, then measurements
/// spaced ceil(τ) sweeps apart.
pub fn run_chain(cfg: &ChainConfig) -> Result<RunRecord> {
    let mut chain = Chain::from_config(cfg)?;
    let mut sweeps = 0u64;
    let budget = cfg.max_sweeps;
    let mut converged = true;

    let energy_series = |chain: &mut Chain, len: u64, sweeps: &mut u64| -> Vec<f64> {
        (0..len)
            .map(|_| {
                chain.sweep();
                *sweeps += 1;
                chain.energy()
            })
            .collect()
    };

    let pilot_len = PILOT_SWEEPS.min(budget);
    let pilot = integrated_autocorrelation(&energy_series(&mut chain, pilot_len, &mut sweeps));
    let equilibration = cfg.equilibration_sweeps.unwrap_or_else(|| (200.0 * pilot.tau.max(1.0)).ceil() as u64);
    let equilibration = equilibration.min(budget.saturating_sub(sweeps));
    for _ in 0..equilibration {
        chain.sweep();
    }
    sweeps += equilibration;

    let tau_len = (100.0 * pilot.tau).ceil().max(1000.0) as u64;
    let tau_len = tau_len.min(budget.saturating_sub(sweeps));
    let TauEstimate { tau, converged: window_ok, .. } = if tau_len >= 2 {
        integrated_autocorrelation(&energy_series(&mut chain, tau_len, &mut sweeps))
    } else {
        TauEstimate { tau: pilot.tau, window: 0, converged: false }
    };
    converged &= window_ok && pilot_len == PILOT_SWEEPS;

    let spacing = tau.ceil().max(1.0) as u64;
    let mut rows = Vec::with_capacity(cfg.target_measurements);
    while rows.len() < cfg.target_measurements {
        if sweeps + spacing > budget {
            converged = false;
            break;
        }
        for _ in 0..spacing {
            chain.sweep();
        }
        sweeps += spacing;
        rows.push(chain.measure(sweeps));
    }
    Ok(RunRecord {
        config: cfg.clone(),
        rows,
        tau,
        tau_pilot: pilot.tau,
        spacing,
        equilibration_sweeps: equilibration,
        total_sweeps: sweeps,
        acceptance_rate: chain.acceptance_rate(),
        converged,
    })
}

/// Independent chains for each grid point; stream = grid index.
pub fn sweep_parameter_grid(grid: &[(ModelParams, f64)], template: &ChainConfig) -> Result<Vec<RunRecord>> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::invalid("parameter grid is empty"));
    }
    grid.par_iter()
        .enumerate()
        .map(|(idx, &(params, beta))| {
            let cfg = ChainConfig { params, beta, stream: idx as u64, ..template.clone() };
            run_chain(&cfg).map_err(|e| e.context(format!("grid point {idx} (n={}, beta={beta})", params.n)))
        })
        .collect()
}

/// Weight of a state in the chosen ensemble: e^{−βE}, times |Γ|/n! when unlabeled.
pub fn ensemble_log_weight(g: &GraphState, p: &ModelParams, beta: f64, ensemble: Ensemble) -> f64 {
    let e = p.energy_of(energy_terms(g));
    match ensemble {
        Ensemble::Labeled => -beta * e,
        Ensemble::Unlabeled => -beta * e + (automorphism_count(g) as f64).ln() - (factorial(g.n()) as f64).ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ModelKind;

    #[test]
    fn spec_acceptance_examples() {
        let a: f64 = acceptance_probability(1.0, 24, 4, Ensemble::Unlabeled);
        assert!((a - 1.0 / 6.0).abs() < 1e-15);
        let b: f64 = acceptance_probability(1.0, 4, 24, Ensemble::Unlabeled);
        assert_eq!(b, 1.0);
        let c: f64 = acceptance_probability(1.0, 7, 3, Ensemble::Labeled);
        assert_eq!(c, 1.0);
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(acceptance_probability(r(1, 1), 24, 4, Ensemble::Unlabeled), r(1, 6));
    }

    #[test]
    fn same_seed_same_record() {
        let p = ModelParams::ising(6, -0.5, 1.0).unwrap();
        let mut cfg = ChainConfig::new(p, 1.0, Ensemble::Unlabeled, 42);
        cfg.target_measurements = 50;
        let a = run_chain(&cfg).unwrap();
        let b = run_chain(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 50);
        assert!(a.converged);
        assert!(a.rows.windows(2).all(|w| w[1].sweep - w[0].sweep >= a.tau.ceil() as u64));
        cfg.stream = 1;
        assert_ne!(run_chain(&cfg).unwrap().rows, a.rows);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = ModelParams::free(5, 0.0, 1.0).unwrap();
        let mut cfg = ChainConfig::new(p, 1.0, Ensemble::Labeled, 1);
        cfg.max_sweeps = 1500;
        let rec = run_chain(&cfg).unwrap();
        assert!(!rec.converged);
        assert!(rec.rows.len() < 1000);
        assert!(rec.total_sweeps <= 1500);
    }

    #[test]
    fn knee_estimates() {
        let free = ModelParams::free(10, 0.0, 1.0).unwrap();
        let k = knee_beta(&free).unwrap();
        assert!(k > 1.0 && k < 10.0, "{k}");
        assert!(knee_beta(&ModelParams::ising(10, 0.5, 1.0).unwrap()).is_none());
        let bad = ModelParams::new(ModelKind::Free, 4, 0.0, 1.0, None).unwrap();
        let mut cfg = ChainConfig::new(bad, -1.0, Ensemble::Labeled, 0);
        assert!(run_chain(&cfg).is_err());
        cfg.beta = 1.0;
        cfg.target_measurements = 0;
        assert!(run_chain(&cfg).is_err());
    }

    #[test]
    fn cached_values_track_state() {
        let p = ModelParams::ising(8, -0.5, 1.0).unwrap();
        let mut chain = Chain::new(p, 0.7, Ensemble::Unlabeled, 3, 0, GraphState::empty(8).unwrap()).unwrap();
        for _ in 0..200 {
            chain.sweep();
            assert_eq!(chain.terms(), energy_terms(chain.state()));
            assert_eq!(chain.gamma(), automorphism_count(chain.state()));
        }
    }
}
