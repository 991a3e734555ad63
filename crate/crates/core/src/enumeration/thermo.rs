use crate::error::{Error, Result};
use crate::hamiltonian::{ModelKind, ModelParams};

/// Per-vertex thermodynamics at one inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoPoint {
    pub beta: f64,
    pub f: f64,
    pub u: f64,
    pub c: f64,
}

/// Thermodynamics plus the structural observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactObservables {
    pub thermo: ThermoPoint,
    pub s1: f64,
    pub chi_s1: f64,
    pub m: f64,
    pub chi_m: f64,
}

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn require_free(p: &ModelParams) -> Result<()> {
    if p.kind != ModelKind::Free {
        return Err(Error::invalid("closed forms exist only for the free model"));
    }
    Ok(())
}

/// Probability that a slot sits at level 0: 1/(1+e^{−βJΔE}).
pub fn er_edge_probability(beta: f64, p: &ModelParams) -> Result<f64> {
    require_free(p)?;
    let x = beta * p.j * p.delta_e();
    Ok(1.0 / (1.0 + (-x).exp()))
}

/// Closed-form f, u, c of the labeled free model.
pub fn labeled_free_thermo(beta: f64, p: &ModelParams) -> Result<ThermoPoint> {
    require_free(p)?;
    let half = (p.n - 1) as f64 / 2.0;
    let x = beta * p.j * p.delta_e();
    let q = er_edge_probability(beta, p)?;
    let f = p.j * p.e1 * half - half * softplus(x) / beta;
    let u = p.j * half * (p.e1 - p.delta_e() * q);
    let sech = 1.0 / (x / 2.0).cosh();
    let c = half * (x / 2.0).powi(2) * sech * sech;
    Ok(ThermoPoint { beta, f, u, c })
}

/// Closed-form observables of the labeled free model. s₁ has no closed form
/// and is reported as NaN.
pub fn labeled_free_observables(beta: f64, p: &ModelParams) -> Result<ExactObservables> {
    let thermo = labeled_free_thermo(beta, p)?;
    let q = er_edge_probability(beta, p)?;
    Ok(ExactObservables { thermo, s1: f64::NAN, chi_s1: f64::NAN, m: 1.0 - q, chi_m: beta * q * (1.0 - q) })
}

/// One energy level of a weighted state sum.
#[derive(Clone, Copy, Debug)]
pub struct WeightedPoint {
    pub energy: f64,
    pub log_weight: f64,
    pub m: f64,
    pub s1: f64,
}

/// Boltzmann moments of a weighted state sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoltzmannStats {
    pub log_z: f64,
    pub mean_e: f64,
    pub var_e: f64,
    pub mean_m: f64,
    pub var_m: f64,
    pub mean_s1: f64,
    pub var_s1: f64,
}

impl BoltzmannStats {
    /// Accumulates with a max shift in the exponent; variances are centered.
    pub fn from_points(points: &[WeightedPoint], beta: f64) -> BoltzmannStats {
        let exps: Vec<f64> = points.iter().map(|pt| pt.log_weight - beta * pt.energy).collect();
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = exps.iter().map(|a| (a - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mean = |x: &dyn Fn(&WeightedPoint) -> f64| -> f64 {
            points.iter().zip(&w).map(|(pt, wi)| wi * x(pt)).sum::<f64>() / total
        };
        let mean_e = mean(&|pt| pt.energy);
        let mean_m = mean(&|pt| pt.m);
        let mean_s1 = mean(&|pt| pt.s1);
        BoltzmannStats {
            log_z: top + total.ln(),
            mean_e,
            var_e: mean(&|pt| (pt.energy - mean_e).powi(2)),
            mean_m,
            var_m: mean(&|pt| (pt.m - mean_m).powi(2)),
            mean_s1,
            var_s1: mean(&|pt| (pt.s1 - mean_s1).powi(2)),
        }
    }

    pub fn observables(&self, beta: f64, n: usize) -> ExactObservables {
        let nf = n as f64;
        let slots = (n * (n - 1) / 2) as f64;
        ExactObservables {
            thermo: ThermoPoint {
                beta,
                f: -self.log_z / (beta * nf),
                u: self.mean_e / nf,
                c: beta * beta * self.var_e / nf,
            },
            s1: self.mean_s1,
            chi_s1: beta * nf * self.var_s1,
            m: self.mean_m,
            chi_m: beta * slots * self.var_m,
        }
    }
}
