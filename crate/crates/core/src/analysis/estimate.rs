use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mc::{integrated_autocorrelation, RunRecord};

/// Measurement series of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub n: usize,
    pub beta: f64,
    pub energy: Vec<f64>,
    pub n1: Vec<u64>,
    pub s1: Vec<f64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    pub fn slots(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn m(&self) -> Vec<f64> {
        let slots = self.slots().max(1) as f64;
        self.n1.iter().map(|&k| k as f64 / slots).collect()
    }
}

impl From<&RunRecord> for Series {
    fn from(r: &RunRecord) -> Series {
        Series {
            n: r.config.params.n,
            beta: r.config.beta,
            energy: r.rows.iter().map(|m| m.energy).collect(),
            n1: r.rows.iter().map(|m| m.n1).collect(),
            s1: r.rows.iter().map(|m| m.s1).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    U,
    C,
    M,
    S1,
    ChiM,
    ChiS1,
}

impl Observable {
    pub const ALL: [Observable; 6] =
        [Observable::U, Observable::C, Observable::M, Observable::S1, Observable::ChiM, Observable::ChiS1];

    pub fn name(self) -> &'static str {
        match self {
            Observable::U => "u",
            Observable::C => "c",
            Observable::M => "m",
            Observable::S1 => "s1",
            Observable::ChiM => "chi_m",
            Observable::ChiS1 => "chi_s1",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown observable `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableEstimate {
    pub observable: Observable,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub beta: f64,
    pub n: usize,
}

/// Running sums of a series centered on its full-sample mean.
#[derive(Clone, Copy, Default)]
struct Sums {
    s1: f64,
    s2: f64,
}

impl Sums {
    fn sub(self, o: Sums) -> Sums {
        Sums { s1: self.s1 - o.s1, s2: self.s2 - o.s2 }
    }

    /// (mean offset, variance) for k samples.
    fn moments(self, k: f64) -> (f64, f64) {
        let mean = self.s1 / k;
        (mean, (self.s2 / k - mean * mean).max(0.0))
    }
}

struct Blocked {
    center: f64,
    total: Sums,
    blocks: Vec<Sums>,
}

impl Blocked {
    fn new(xs: &[f64], bin: usize) -> Blocked {
        let center = xs.iter().sum::<f64>() / xs.len() as f64;
        let nblocks = xs.len() / bin;
        let mut blocks = vec![Sums::default(); nblocks];
        let mut total = Sums::default();
        for (k, &x) in xs.iter().enumerate() {
            let d = x - center;
            total.s1 += d;
            total.s2 += d * d;
            if k / bin < nblocks {
                blocks[k / bin].s1 += d;
                blocks[k / bin].s2 += d * d;
            }
        }
        Blocked { center, total, blocks }
    }
}

/// Block size for the jackknife: clamp(ceil(20·τ), 1, N/20), with τ the
/// largest autocorrelation time among the measured series.
pub fn jackknife_bin(series: &[&[f64]]) -> usize {
    let n = series.first().map_or(0, |s| s.len());
    let tau = series.iter().map(|s| integrated_autocorrelation(s).tau).fold(0.5, f64::max);
    let cap = (n / 20).max(1);
    ((20.0 * tau).ceil() as usize).clamp(1, cap)
}

/// Value and jackknife error of a statistic of per-series (mean, variance).
/// Samples past the last whole block count toward the value only.
fn jackknife(data: &[Blocked], n: usize, bin: usize, stat: impl Fn(&[(f64, f64)]) -> f64) -> (f64, f64) {
    let at = |sums: &dyn Fn(&Blocked) -> Sums, count: usize| -> f64 {
        let args: Vec<(f64, f64)> = data
            .iter()
            .map(|b| {
                let (m, v) = sums(b).moments(count as f64);
                (b.center + m, v)
            })
            .collect();
        stat(&args)
    };
    let value = at(&|b| b.total, n);
    let nblocks = data[0].blocks.len();
    if nblocks < 2 {
        return (value, f64::NAN);
    }
    let whole = |b: &Blocked| b.blocks.iter().fold(Sums::default(), |a, s| Sums { s1: a.s1 + s.s1, s2: a.s2 + s.s2 });
    let leave: Vec<f64> = (0..nblocks).map(|k| at(&|b| whole(b).sub(b.blocks[k]), (nblocks - 1) * bin)).collect();
    (value, jackknife_spread(&leave))
}

/// sqrt((B−1)/B · Σ(θ_k − θ̄)²) over leave-one-out values θ_k.
pub fn jackknife_spread(leave: &[f64]) -> f64 {
    let b = leave.len() as f64;
    let d: Vec<f64> = leave.iter().map(|x| x - leave[0]).collect();
    let mean = d.iter().sum::<f64>() / b;
    (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (b - 1.0) / b).sqrt()
}

/// u, c, m, s₁, χ_m, χ_{s₁} with jackknife errors.
pub fn estimate(series: &Series) -> Result<Vec<ObservableEstimate>> {
    let n_samples = series.len();
    if n_samples < 2 {
        return Err(Error::refused(format!("need at least 2 measurements, got {n_samples}")));
    }
    let m = series.m();
    let bin = jackknife_bin(&[&series.energy, &m, &series.s1]);
    let data = [Blocked::new(&series.energy, bin), Blocked::new(&m, bin), Blocked::new(&series.s1, bin)];
    let (nf, beta, slots) = (series.n as f64, series.beta, series.slots() as f64);
    Ok(Observable::ALL
        .into_iter()
        .map(|obs| {
            let (value, std_error) = jackknife(&data, n_samples, bin, |a: &[(f64, f64)]| match obs {
                Observable::U => a[0].0 / nf,
                Observable::C => beta * beta * a[0].1 / nf,
                Observable::M => a[1].0,
                Observable::ChiM => beta * slots * a[1].1,
                Observable::S1 => a[2].0,
                Observable::ChiS1 => beta * nf * a[2].1,
            });
            ObservableEstimate { observable: obs, value, std_error, n_samples, beta, n: series.n }
        })
        .collect())
}

pub fn estimate_record(record: &RunRecord) -> Result<Vec<ObservableEstimate>> {
    estimate(&Series::from(record))
}

/// (n, β, τ) for each record, in input order.
pub fn autocorrelation_curve(records: &[RunRecord]) -> Vec<(usize, f64, f64)> {
    records.iter().map(|r| (r.config.params.n, r.config.beta, r.tau)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(energy: Vec<f64>) -> Series {
        let k = energy.len();
        Series { n: 5, beta: 1.0, energy, n1: vec![3; k], s1: vec![0.4; k] }
    }

    #[test]
    fn constant_series() {
        let est = estimate(&series(vec![2.0; 100])).unwrap();
        let c = est.iter().find(|e| e.observable == Observable::C).unwrap();
        assert_eq!((c.value, c.std_error), (0.0, 0.0));
        let u = est.iter().find(|e| e.observable == Observable::U).unwrap();
        assert_eq!((u.value, u.std_error), (0.4, 0.0));
        assert!(estimate(&series(vec![1.0])).is_err());
    }

    #[test]
    fn jackknife_matches_naive_error_on_iid_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut ratios = Vec::new();
        for _ in 0..20 {
            let xs: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            let naive = (var / xs.len() as f64).sqrt();
            let est = estimate(&series(xs)).unwrap();
            let u = est.iter().find(|e| e.observable == Observable::U).unwrap();
            ratios.push(u.std_error * 5.0 / naive);
        }
        let avg = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((avg - 1.0).abs() < 0.05, "{avg}");
    }

    #[test]
    fn names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
    }
}
