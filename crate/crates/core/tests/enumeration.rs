use rayon::prelude::*;

use qgraph::enumeration::{
    census, edge_polynomial, exact_curve, exact_observables, labeled_free_observables, polya_curve, polya_log_partition,
};
use qgraph::graph::edge_count;
use qgraph::hamiltonian::{Ensemble, ModelParams};

fn betas() -> Vec<f64> {
    (0..20).map(|k| 0.25 + 0.5 * k as f64).collect()
}

#[test]
fn polya_coefficients_are_complement_symmetric_up_to_40() {
    let bad: Vec<usize> = (1..=40usize)
        .into_par_iter()
        .filter(|&n| {
            let d = edge_polynomial(n).unwrap();
            d.len() != edge_count(n) + 1 || d.iter().zip(d.iter().rev()).any(|(a, b)| a != b)
        })
        .collect();
    assert!(bad.is_empty(), "asymmetric D for n in {bad:?}");
}

#[test]
fn polya_partition_matches_census_at_seven() {
    let p = ModelParams::free(7, 0.0, 1.0).unwrap();
    for beta in betas() {
        let census_z = exact_observables(beta, &p, Ensemble::Unlabeled, false).unwrap();
        let polya = polya_curve(&[beta], &p).unwrap()[0];
        let log_z = polya_log_partition(beta, &p).unwrap();
        assert!((polya.thermo.u - census_z.thermo.u).abs() < 1e-10, "beta={beta}");
        assert!(log_z.is_finite());
    }
}

#[test]
fn specific_heat_is_non_negative() {
    for n in 3..=7 {
        for p in [ModelParams::free(n, 0.0, 1.0).unwrap(), ModelParams::ising(n, -0.5, 1.0).unwrap(), ModelParams::ising(n, 0.5, 1.0).unwrap()] {
            for ens in [Ensemble::Labeled, Ensemble::Unlabeled] {
                for o in exact_curve(&betas(), &p, ens, false).unwrap() {
                    assert!(o.thermo.c >= 0.0 && o.chi_m >= 0.0 && o.chi_s1 >= 0.0, "n={n} {ens} {o:?}");
                }
            }
        }
    }
}

#[test]
fn infinite_temperature_density_is_one_half() {
    for n in 3..=7 {
        let p = ModelParams::free(n, 0.0, 1.0).unwrap();
        assert!((exact_observables(0.0, &p, Ensemble::Labeled, false).unwrap().m - 0.5).abs() < 1e-12);
    }
}

#[test]
fn fluctuation_and_derivative_specific_heat_agree() {
    let p = ModelParams::free(6, 0.0, 1.0).unwrap();
    for beta in betas() {
        let sum = exact_observables(beta, &p, Ensemble::Labeled, false).unwrap();
        let closed = labeled_free_observables(beta, &p).unwrap();
        assert!((sum.thermo.c - closed.thermo.c).abs() <= 1e-9, "beta={beta}");
    }
}

#[test]
fn census_accumulation_is_reproducible() {
    let p = ModelParams::ising(6, -0.5, 1.0).unwrap();
    let a = exact_curve(&betas(), &p, Ensemble::Unlabeled, false).unwrap();
    let b = exact_curve(&betas(), &p, Ensemble::Unlabeled, false).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.thermo.f.to_bits(), y.thermo.f.to_bits());
        assert_eq!(x.thermo.c.to_bits(), y.thermo.c.to_bits());
        assert_eq!(x.s1.to_bits(), y.s1.to_bits());
    }
    assert_eq!(census(6, false).unwrap().labeled_total(), 1 << 15);
    assert!(census(8, false).is_err());
}
