use std::collections::BTreeMap;

use crate::analysis::estimate::{jackknife_spread, Series};
use crate::error::{Error, Result};
use crate::hamiltonian::{ModelKind, ModelParams};

/// Minimum Σ_E min(p_r(E), p_{r+1}(E)) between neighbouring runs.
pub const OVERLAP_THRESHOLD: f64 = 0.01;
const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

/// Spacing of the energy lattice: J·|ΔE| (free) or J·min nonzero |E_k| (Ising).
pub fn energy_quantum(p: &ModelParams) -> f64 {
    let q = match p.kind {
        ModelKind::Free => p.delta_e().abs(),
        ModelKind::Ising => [p.e0.abs(), p.e1.abs()].into_iter().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min),
    };
    if q.is_finite() && q > 0.0 {
        p.j * q
    } else {
        1.0
    }
}

/// Reweighted observables at one β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub beta: f64,
    pub u: f64,
    pub c: f64,
    pub m: f64,
    pub chi_m: f64,
    pub s1: f64,
    pub chi_s1: f64,
}

impl CurvePoint {
    pub const NAMES: [&'static str; 6] = ["u", "c", "m", "chi_m", "s1", "chi_s1"];

    pub fn values(&self) -> [f64; 6] {
        [self.u, self.c, self.m, self.chi_m, self.s1, self.chi_s1]
    }
}

#[derive(Clone, Debug)]
struct Bin {
    energy: f64,
    /// Samples per run.
    counts: Vec<f64>,
    m: f64,
    m2: f64,
    s1: f64,
    s1_2: f64,
}

/// Energy bins on the model's lattice, or on distinct values when the
/// samples do not sit on it.
fn bin_keys(series: &[&Series], quantum: f64) -> (f64, Vec<Vec<i64>>, f64) {
    let emin = series.iter().flat_map(|s| s.energy.iter().copied()).fold(f64::INFINITY, f64::min);
    let on_lattice = series
        .iter()
        .flat_map(|s| s.energy.iter())
        .all(|&e| (((e - emin) / quantum) - ((e - emin) / quantum).round()).abs() < 1e-6);
    let q = if on_lattice { quantum } else { quantum * 1e-9 };
    let keys = series.iter().map(|s| s.energy.iter().map(|&e| ((e - emin) / q).round() as i64).collect()).collect();
    (emin, keys, q)
}

/// Self-consistent multiple-histogram solution over a set of runs.
#[derive(Clone, Debug)]
pub struct Reweighter {
    n: usize,
    betas: Vec<f64>,
    samples: Vec<f64>,
    bins: Vec<Bin>,
    /// ln Z_r with ln Z of the lowest β run fixed to 0.
    log_z: Vec<f64>,
    iterations: usize,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

impl Reweighter {
    /// Runs must share n and model; they are sorted by β here.
    pub fn new(runs: &[Series], p: &ModelParams) -> Result<Reweighter> {
        if runs.is_empty() {
            return Err(Error::invalid("reweighting needs at least one run"));
        }
        let mut order: Vec<&Series> = runs.iter().collect();
        order.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        for s in &order {
            if s.n != p.n {
                return Err(Error::invalid(format!("run at beta={} has n={}, expected {}", s.beta, s.n, p.n)));
            }
            if s.is_empty() {
                return Err(Error::invalid(format!("run at beta={} has no samples", s.beta)));
            }
        }
        if order.windows(2).any(|w| w[0].beta == w[1].beta) {
            return Err(Error::invalid("two runs share the same beta"));
        }
        let (emin, keys, q) = bin_keys(&order, energy_quantum(p));
        let r = order.len();
        let mut map: BTreeMap<i64, Bin> = BTreeMap::new();
        for (run, s) in order.iter().enumerate() {
            let m = s.m();
            for (k, &key) in keys[run].iter().enumerate() {
                let bin = map.entry(key).or_insert_with(|| Bin {
                    energy: emin + key as f64 * q,
                    counts: vec![0.0; r],
                    m: 0.0,
                    m2: 0.0,
                    s1: 0.0,
                    s1_2: 0.0,
                });
                bin.counts[run] += 1.0;
                bin.m += m[k];
                bin.m2 += m[k] * m[k];
                bin.s1 += s.s1[k];
                bin.s1_2 += s.s1[k] * s.s1[k];
            }
        }
        let mut bins: Vec<Bin> = map.into_values().collect();
        for b in &mut bins {
            let total: f64 = b.counts.iter().sum();
            b.m /= total;
            b.m2 /= total;
            b.s1 /= total;
            b.s1_2 /= total;
        }
        let samples: Vec<f64> = order.iter().map(|s| s.len() as f64).collect();
        let betas: Vec<f64> = order.iter().map(|s| s.beta).collect();
        for w in 0..r.saturating_sub(1) {
            let overlap: f64 = bins
                .iter()
                .map(|b| (b.counts[w] / samples[w]).min(b.counts[w + 1] / samples[w + 1]))
                .sum();
            if overlap < OVERLAP_THRESHOLD {
                return Err(Error::NoOverlap { lo: betas[w], hi: betas[w + 1], overlap });
            }
        }
        let mut rw = Reweighter { n: p.n, betas, samples, bins, log_z: vec![0.0; r], iterations: 0 };
        rw.solve()?;
        Ok(rw)
    }

    fn log_dos(&self, log_z: &[f64]) -> Vec<f64> {
        self.bins
            .iter()
            .map(|b| {
                let hits: f64 = b.counts.iter().sum();
                let den = log_sum_exp(
                    (0..self.betas.len()).map(|r| self.samples[r].ln() - self.betas[r] * b.energy - log_z[r]),
                );
                hits.ln() - den
            })
            .collect()
    }

    fn log_z_at(&self, log_dos: &[f64], beta: f64) -> f64 {
        log_sum_exp(self.bins.iter().zip(log_dos).map(|(b, g)| g - beta * b.energy))
    }

    fn solve(&mut self) -> Result<()> {
        let r = self.betas.len();
        for it in 1..=MAX_ITERATIONS {
            let g = self.log_dos(&self.log_z);
            let mut next: Vec<f64> = (0..r).map(|k| self.log_z_at(&g, self.betas[k])).collect();
            let gauge = next[0];
            for z in &mut next {
                *z -= gauge;
            }
            let shift = next.iter().zip(&self.log_z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            self.log_z = next;
            if shift < TOLERANCE {
                self.iterations = it;
                return Ok(());
            }
        }
        Err(Error::refused("multiple-histogram iteration did not converge"))
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn beta_range(&self) -> (f64, f64) {
        (self.betas[0], *self.betas.last().unwrap())
    }

    /// Observables at β inside the simulated range.
    pub fn at(&self, beta: f64) -> Result<CurvePoint> {
        let (lo, hi) = self.beta_range();
        if !(beta >= lo - 1e-12 && beta <= hi + 1e-12) {
            return Err(Error::refused(format!("beta={beta} lies outside the simulated range [{lo}, {hi}]")));
        }
        let g = self.log_dos(&self.log_z);
        let expo: Vec<f64> = self.bins.iter().zip(&g).map(|(b, gi)| gi - beta * b.energy).collect();
        let top = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = expo.iter().map(|x| (x - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let avg = |f: &dyn Fn(&Bin) -> f64| self.bins.iter().zip(&w).map(|(b, wi)| wi * f(b)).sum::<f64>() / total;
        let e = avg(&|b| b.energy);
        let var_e = avg(&|b| (b.energy - e).powi(2));
        let m = avg(&|b| b.m);
        let s1 = avg(&|b| b.s1);
        let nf = self.n as f64;
        let slots = (self.n * (self.n - 1) / 2) as f64;
        Ok(CurvePoint {
            beta,
            u: e / nf,
            c: beta * beta * var_e / nf,
            m,
            chi_m: beta * slots * (avg(&|b| b.m2) - m * m).max(0.0),
            s1,
            chi_s1: beta * nf * (avg(&|b| b.s1_2) - s1 * s1).max(0.0),
        })
    }

    pub fn curve(&self, betas: &[f64]) -> Result<Vec<CurvePoint>> {
        betas.iter().map(|&b| self.at(b)).collect()
    }
}

/// Reweighted curve with jackknife errors: each of `blocks` passes drops the
/// same fraction of every run and re-solves.
pub fn reweight_with_errors(
    runs: &[Series],
    p: &ModelParams,
    betas: &[f64],
    blocks: usize,
) -> Result<Vec<(CurvePoint, [f64; 6])>> {
    let full = Reweighter::new(runs, p)?.curve(betas)?;
    let blocks = blocks.max(2);
    let mut leave: Vec<Vec<CurvePoint>> = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let cut: Vec<Series> = runs
            .iter()
            .map(|s| {
                let len = s.len();
                let (a, b) = (k * len / blocks, (k + 1) * len / blocks);
                let keep = |v: &Vec<f64>| v[..a].iter().chain(&v[b..]).copied().collect::<Vec<f64>>();
                Series {
                    n: s.n,
                    beta: s.beta,
                    energy: keep(&s.energy),
                    n1: s.n1[..a].iter().chain(&s.n1[b..]).copied().collect(),
                    s1: keep(&s.s1),
                }
            })
            .collect();
        leave.push(Reweighter::new(&cut, p)?.curve(betas)?);
    }
    Ok(full
        .into_iter()
        .enumerate()
        .map(|(i, point)| {
            let mut err = [0.0; 6];
            for (j, e) in err.iter_mut().enumerate() {
                let xs: Vec<f64> = leave.iter().map(|c| c[i].values()[j]).collect();
                *e = jackknife_spread(&xs);
            }
            (point, err)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::estimate::{estimate, Observable};
    use crate::enumeration::labeled_free_thermo;
    use crate::hamiltonian::Ensemble;
    use crate::mc::{run_chain, ChainConfig};

    fn run(p: ModelParams, beta: f64, ensemble: Ensemble, seed: u64, count: usize) -> Series {
        let mut cfg = ChainConfig::new(p, beta, ensemble, seed);
        cfg.target_measurements = count;
        Series::from(&run_chain(&cfg).unwrap())
    }

    #[test]
    fn identity_reweighting() {
        let p = ModelParams::ising(6, -0.5, 1.0).unwrap();
        let s = run(p, 1.3, Ensemble::Unlabeled, 4, 400);
        let rw = Reweighter::new(std::slice::from_ref(&s), &p).unwrap();
        let pt = rw.at(1.3).unwrap();
        let direct = estimate(&s).unwrap();
        for (name, v) in CurvePoint::NAMES.iter().zip(pt.values()) {
            let d = direct.iter().find(|e| e.observable == name.parse::<Observable>().unwrap()).unwrap();
            assert!((d.value - v).abs() <= 1e-12 * d.value.abs().max(1.0), "{name}: {} vs {v}", d.value);
        }
        assert!(rw.at(1.4).is_err());
    }

    #[test]
    fn two_runs_track_the_closed_form() {
        let p = ModelParams::free(6, 0.0, 1.0).unwrap();
        let runs = vec![run(p, 1.0, Ensemble::Labeled, 1, 4000), run(p, 2.0, Ensemble::Labeled, 2, 4000)];
        let betas: Vec<f64> = (1..=10).map(|k| 1.0 + k as f64 / 11.0).collect();
        let curve = reweight_with_errors(&runs, &p, &betas, 20).unwrap();
        for (pt, err) in curve {
            let exact = labeled_free_thermo(pt.beta, &p).unwrap();
            assert!((pt.u - exact.u).abs() <= 3.0 * err[0], "beta {}: {} vs {} ± {}", pt.beta, pt.u, exact.u, err[0]);
        }
    }

    #[test]
    fn disjoint_histograms_name_the_pair() {
        let p = ModelParams::free(8, 0.0, 1.0).unwrap();
        let runs = vec![run(p, 0.0, Ensemble::Labeled, 1, 200), run(p, 20.0, Ensemble::Labeled, 2, 200)];
        match Reweighter::new(&runs, &p) {
            Err(Error::NoOverlap { lo, hi, .. }) => assert_eq!((lo, hi), (0.0, 20.0)),
            other => panic!("expected overlap failure, got {other:?}"),
        }
    }
}
