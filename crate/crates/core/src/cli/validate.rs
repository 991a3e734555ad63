//! Built-in oracle checks run by `qgraph validate`.

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::analysis::{energy_quantum, estimate, Observable, Series};
use crate::cli::commands::{exact_rows, grid};
use crate::cli::config::ExperimentConfig;
use crate::enumeration::{self, exhaustive, polya};
use crate::error::{Error, Result};
use crate::hamiltonian::{Ensemble, ModelParams};
use crate::hilbert::ratio;
use crate::mc::{balance::detailed_balance_exact, run_chain};
use crate::symmetry::isomorphism_classes;

/// Monte Carlo estimates must sit within this many standard errors.
pub const SIGMA_TOLERANCE: f64 = 4.0;
const COMPARED: [Observable; 4] = [Observable::U, Observable::C, Observable::M, Observable::S1];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn abs(name: &str, detail: String, value: f64, reference: f64, tolerance: f64) -> Check {
        let pass = (value - reference).abs() <= tolerance;
        Check { name: name.into(), detail, value, reference, tolerance, pass }
    }

    fn rel(name: &str, detail: String, value: f64, reference: f64, tolerance: f64) -> Check {
        let pass = (value - reference).abs() <= tolerance * reference.abs().max(f64::MIN_POSITIVE);
        Check { name: name.into(), detail, value, reference, tolerance, pass }
    }
}

fn class_table(n: usize) -> Result<Vec<BigUint>> {
    let mut counts = vec![BigUint::from(0u8); crate::graph::edge_count(n) + 1];
    for g in isomorphism_classes(n)? {
        counts[g.n1()] += 1u8;
    }
    Ok(counts)
}

fn counting_checks(out: &mut Vec<Check>) -> Result<()> {
    for n in 1..=6 {
        let d = polya::edge_polynomial(n)?;
        let brute = class_table(n)?;
        let mismatches = d.iter().zip(&brute).filter(|(a, b)| a != b).count() + d.len().abs_diff(brute.len());
        out.push(Check::abs("polya_vs_classes", format!("n={n}"), mismatches as f64, 0.0, 0.0));
    }
    let p = ModelParams::free(6, 0.0, 1.0)?;
    for beta in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let a = polya::polya_log_partition(beta, &p)?;
        let b = exhaustive::exhaustive_partition(beta, &p, Ensemble::Unlabeled, false)?.log_z;
        out.push(Check::rel("polya_vs_census", format!("n=6 beta={beta}"), a, b, 1e-10));
        let closed = enumeration::labeled_free_thermo(beta, &p)?.u;
        let census = exhaustive::exact_observables(beta, &p, Ensemble::Labeled, false)?.thermo.u;
        out.push(Check::abs("closed_form_vs_census", format!("n=6 beta={beta} u"), census, closed, 1e-10));
    }
    Ok(())
}

fn balance_checks(out: &mut Vec<Check>) -> Result<()> {
    let models = [ModelParams::free(4, 0.0, 1.0)?, ModelParams::ising(4, -0.5, 1.0)?];
    for p in models {
        let quantum = BigRational::from_float(energy_quantum(&p)).ok_or_else(|| Error::invalid("quantum"))?;
        for ens in [Ensemble::Labeled, Ensemble::Unlabeled] {
            for t in [ratio(1, 2), ratio(2, 7)] {
                let r = detailed_balance_exact(&p, ens, &quantum, &t)?;
                out.push(Check::abs(
                    "detailed_balance",
                    format!("n=4 {} {ens} t={t} transitions={}", p.kind, r.transitions),
                    r.violations as f64,
                    0.0,
                    0.0,
                ));
            }
        }
    }
    Ok(())
}

fn sampling_checks(cfg: &ExperimentConfig, long: bool, out: &mut Vec<Check>) -> Result<()> {
    let points = grid(cfg)?;
    let mut references = Vec::new();
    for &n in &cfg.n {
        for &ens in &cfg.ensembles {
            references.extend(exact_rows(cfg, n, ens, long)?);
        }
    }
    let runs: Vec<_> = points.par_iter().map(run_chain).collect::<Result<_>>()?;
    for ((c, run), exact) in points.iter().zip(&runs).zip(&references) {
        let est = estimate(&Series::from(run))?;
        for obs in COMPARED {
            let reference = match obs {
                Observable::U => exact.thermo.u,
                Observable::C => exact.thermo.c,
                Observable::M => exact.m,
                _ => exact.s1,
            };
            if !reference.is_finite() {
                continue;
            }
            let e = est.iter().find(|e| e.observable == obs).expect("all observables are estimated");
            let tol = SIGMA_TOLERANCE * e.std_error.max(1e-12);
            out.push(Check::abs(
                "mc_vs_exact",
                format!("{} n={} {} beta={} {obs}", c.params.kind, c.params.n, c.ensemble, c.beta),
                e.value,
                reference,
                tol,
            ));
        }
    }
    Ok(())
}

pub fn run_suite(cfg: &ExperimentConfig, long: bool) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    counting_checks(&mut out)?;
    balance_checks(&mut out)?;
    sampling_checks(cfg, long, &mut out)?;
    Ok(out)
}
