use std::collections::{BTreeMap, BTreeSet};

use qgraph::analysis::{estimate, Observable, Series};
use qgraph::enumeration::{er_edge_probability, exhaustive_partition};
use qgraph::hamiltonian::{energy, Ensemble, ModelParams};
use qgraph::mc::{run_chain, sweep_parameter_grid, Chain, ChainConfig, StartState};
use qgraph::symmetry::{automorphism_count, canonical_form, factorial, isomorphism_classes};

fn u_estimate(cfg: &ChainConfig) -> (f64, f64) {
    let est = estimate(&Series::from(&run_chain(cfg).unwrap())).unwrap();
    let u = est.iter().find(|e| e.observable == Observable::U).unwrap();
    (u.value, u.std_error)
}

#[test]
fn grid_streams_are_distinct() {
    let p = ModelParams::free(12, 0.0, 1.0).unwrap();
    let mut starts = BTreeSet::new();
    for stream in 0..10_000u64 {
        let mut cfg = ChainConfig::new(p, 1.0, Ensemble::Labeled, 42);
        cfg.stream = stream;
        cfg.start = StartState::Hot;
        starts.insert(Chain::from_config(&cfg).unwrap().state().clone());
    }
    assert_eq!(starts.len(), 10_000);
}

#[test]
fn hot_and_cold_starts_agree() {
    let cases = [
        (ModelParams::free(8, 0.0, 1.0).unwrap(), 1.0),
        (ModelParams::free(8, 0.0, 1.0).unwrap(), 5.0),
        (ModelParams::ising(8, -0.5, 1.0).unwrap(), 4.0),
    ];
    for (k, (p, beta)) in cases.into_iter().enumerate() {
        let mut hot = ChainConfig::new(p, beta, Ensemble::Unlabeled, 3);
        hot.start = StartState::Hot;
        hot.stream = 2 * k as u64;
        let mut cold = hot.clone();
        cold.start = StartState::Cold;
        cold.stream += 1;
        let ((a, sa), (b, sb)) = (u_estimate(&hot), u_estimate(&cold));
        let sigma = (sa * sa + sb * sb).sqrt();
        assert!((a - b).abs() <= 3.0 * sigma, "{} beta={beta}: hot {a} +- {sa}, cold {b} +- {sb}", p.kind);
    }
}

#[test]
fn unlabeled_chain_samples_class_weights() {
    let (n, beta) = (5, 1.0);
    let p = ModelParams::free(n, 0.0, 1.0).unwrap();
    let mut chain = Chain::new(p, beta, Ensemble::Unlabeled, 9, 0, qgraph::GraphState::empty(n).unwrap()).unwrap();
    for _ in 0..2000 {
        chain.sweep();
    }
    let sweeps = 1_000_000;
    let mut visits: BTreeMap<qgraph::GraphState, u64> = BTreeMap::new();
    for _ in 0..sweeps {
        chain.sweep();
        *visits.entry(canonical_form(chain.state())).or_default() += 1;
    }
    let log_z = exhaustive_partition(beta, &p, Ensemble::Unlabeled, false).unwrap().log_z;
    let classes = isomorphism_classes(n).unwrap();
    let mut tv = 0.0;
    for g in &classes {
        let exact = (-beta * energy(g, &p).unwrap() - log_z).exp();
        let seen = visits.get(&canonical_form(g)).copied().unwrap_or(0) as f64 / sweeps as f64;
        tv += (exact - seen).abs() / 2.0;
    }
    assert!(tv <= 0.01, "total variation {tv}");
    assert!(classes.iter().all(|g| factorial(n) % automorphism_count(g) == 0));
}

#[test]
fn labeled_free_density_follows_the_edge_probability() {
    let p = ModelParams::free(10, 0.0, 1.0).unwrap();
    let grid: Vec<_> = (0..=10).map(|k| (p, 0.5 * k as f64)).collect();
    let template = ChainConfig::new(p, 0.0, Ensemble::Labeled, 77);
    for record in sweep_parameter_grid(&grid, &template).unwrap() {
        let beta = record.config.beta;
        assert!((0.0..=1.0).contains(&record.acceptance_rate));
        assert!(record.rows.windows(2).all(|w| (w[1].sweep - w[0].sweep) as f64 >= record.tau));
        assert!(record.tau < 2.0, "labeled tau {} at beta={beta}", record.tau);
        let est = estimate(&Series::from(&record)).unwrap();
        let m = est.iter().find(|e| e.observable == Observable::M).unwrap();
        let density = er_edge_probability(beta, &p).unwrap();
        assert!(((1.0 - m.value) - density).abs() <= 3.0 * m.std_error, "beta={beta}: {} vs {density}", 1.0 - m.value);
        for e in &est {
            if matches!(e.observable, Observable::C | Observable::ChiM | Observable::ChiS1) {
                assert!(e.value >= 0.0);
            }
        }
    }
}

#[test]
fn unlabeled_free_slows_near_the_knee() {
    for n in [10, 12] {
        let p = ModelParams::free(n, 0.0, 1.0).unwrap();
        let knee = qgraph::mc::knee_beta(&p).unwrap();
        let tau = |beta: f64| run_chain(&ChainConfig::new(p, beta, Ensemble::Unlabeled, 5)).unwrap().tau;
        let (hot, at_knee) = (tau(0.0), tau((knee * 4.0).round() / 4.0));
        assert!(at_knee > 2.0 * hot, "n={n}: tau {at_knee} near the knee vs {hot} at beta=0");
    }
}
