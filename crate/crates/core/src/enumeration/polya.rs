use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::enumeration::thermo::{BoltzmannStats, ExactObservables, WeightedPoint};
use crate::error::{Error, Result};
use crate::hamiltonian::{ModelKind, ModelParams};

pub const MAX_POLYA_N: usize = 40;

/// Integer partitions of n, parts non-increasing, in reverse lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=cap.min(rest)).rev() {
            cur.push(k);
            go(rest - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Cycles induced on unordered pairs by a permutation with the given cycle
/// lengths, as (length, count).
pub fn pair_cycle_type(parts: &[usize]) -> Vec<(usize, usize)> {
    let mut cycles = BTreeMap::new();
    for (idx, &k) in parts.iter().enumerate() {
        for (len, count) in within_cycle(k) {
            *cycles.entry(len).or_insert(0) += count;
        }
        for &a in &parts[..idx] {
            *cycles.entry(a.lcm(&k)).or_insert(0) += a.gcd(&k);
        }
    }
    cycles.into_iter().filter(|&(_, c)| c > 0).collect()
}

fn within_cycle(k: usize) -> Vec<(usize, usize)> {
    if k % 2 == 1 {
        vec![(k, (k - 1) / 2)]
    } else {
        vec![(k, k / 2 - 1), (k / 2, 1)]
    }
}

fn factorial_big(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Size of the conjugacy class, n!/∏ k^{m_k} m_k!.
pub fn class_size(parts: &[usize]) -> BigUint {
    let n: usize = parts.iter().sum();
    let mut mult = BTreeMap::new();
    for &k in parts {
        *mult.entry(k).or_insert(0usize) += 1;
    }
    let mut den = BigUint::one();
    for (k, m) in mult {
        den *= BigUint::from(k).pow(m as u32) * factorial_big(m);
    }
    factorial_big(n) / den
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleIndexTerm {
    pub partition: Vec<usize>,
    pub class_size: BigUint,
    /// (cycle length, count) on unordered pairs.
    pub pair_cycles: Vec<(usize, usize)>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_POLYA_N {
        return Err(Error::refused(format!("pair-group enumeration needs 1 <= n <= {MAX_POLYA_N}, got {n}")));
    }
    Ok(())
}

/// Cycle index of the pair group, one term per conjugacy class of S_n.
pub fn pair_group_cycle_index(n: usize) -> Result<Vec<CycleIndexTerm>> {
    check_n(n)?;
    Ok(partitions(n)
        .into_iter()
        .map(|partition| CycleIndexTerm {
            class_size: class_size(&partition),
            pair_cycles: pair_cycle_type(&partition),
            partition,
        })
        .collect())
}

/// Multiplies the polynomial in place by (1 + x^len), tracking its degree.
fn times_binomial(poly: &mut [BigUint], deg: &mut usize, len: usize) {
    for d in (len..=*deg + len).rev() {
        let (lo, hi) = poly.split_at_mut(d);
        hi[0] += &lo[d - len];
    }
    *deg += len;
}

/// D(n,m) for m = 0..C(n,2): unlabeled graphs with m edges.
///
/// Partitions are walked depth first so every prefix shares the pair-cycle
/// factors already multiplied in.
pub fn edge_polynomial(n: usize) -> Result<Vec<BigUint>> {
    check_n(n)?;
    let m = n * (n - 1) / 2;
    struct Walk {
        n: usize,
        total: Vec<BigUint>,
        fact: BigUint,
    }
    impl Walk {
        fn go(&mut self, rest: usize, cap: usize, parts: &mut Vec<usize>, poly: &[BigUint], deg: usize) {
            if rest == 0 {
                let size = class_size(parts);
                for (t, c) in self.total.iter_mut().zip(&poly[..=deg]) {
                    *t += &size * c;
                }
                return;
            }
            for k in (1..=cap.min(rest)).rev() {
                let mut next = poly.to_vec();
                let mut d = deg;
                for (len, count) in within_cycle(k) {
                    for _ in 0..count {
                        times_binomial(&mut next, &mut d, len);
                    }
                }
                for &a in parts.iter() {
                    let len = a.lcm(&k);
                    for _ in 0..a.gcd(&k) {
                        times_binomial(&mut next, &mut d, len);
                    }
                }
                parts.push(k);
                self.go(rest - k, k, parts, &next, d);
                parts.pop();
            }
        }
    }
    let mut poly = vec![BigUint::zero(); m + 1];
    poly[0] = BigUint::one();
    let mut walk = Walk { n, total: vec![BigUint::zero(); m + 1], fact: factorial_big(n) };
    walk.go(walk.n, walk.n, &mut Vec::new(), &poly, 0);
    let fact = walk.fact;
    Ok(walk.total.into_iter().map(|t| t / &fact).collect())
}

/// ln of a positive big integer, accurate far beyond f64 range.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
}

fn polya_points(p: &ModelParams) -> Result<Vec<WeightedPoint>> {
    if p.kind != ModelKind::Free {
        return Err(Error::invalid("pair-group enumeration applies to the free model only"));
    }
    let d = edge_polynomial(p.n)?;
    let slots = d.len() - 1;
    Ok(d.iter()
        .enumerate()
        .map(|(n1, count)| WeightedPoint {
            energy: p.j * (p.e0 * (slots - n1) as f64 + p.e1 * n1 as f64),
            log_weight: big_ln(count),
            m: if slots == 0 { 0.0 } else { n1 as f64 / slots as f64 },
            s1: f64::NAN,
        })
        .collect())
}

/// ln Z of the unlabeled free model from the pair-group cycle index.
pub fn polya_log_partition(beta: f64, p: &ModelParams) -> Result<f64> {
    Ok(BoltzmannStats::from_points(&polya_points(p)?, beta).log_z)
}

/// Unlabeled free observables from D(n,m); s₁ is NaN.
pub fn polya_observables(beta: f64, p: &ModelParams) -> Result<ExactObservables> {
    Ok(BoltzmannStats::from_points(&polya_points(p)?, beta).observables(beta, p.n))
}

/// Unlabeled free observables on a β grid, computing D(n,m) once.
pub fn polya_curve(betas: &[f64], p: &ModelParams) -> Result<Vec<ExactObservables>> {
    let pts = polya_points(p)?;
    Ok(betas.iter().map(|&b| BoltzmannStats::from_points(&pts, b).observables(b, p.n)).collect())
}
