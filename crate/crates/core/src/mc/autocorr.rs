/// Integrated autocorrelation time of a series, in units of its spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauEstimate {
    /// τ = ½ + Σ_{t=1}^{W} ρ(t).
    pub tau: f64,
    pub window: usize,
    /// False when no window up to half the series satisfied W ≥ 5τ(W).
    pub converged: bool,
}

/// Normalized autocorrelation at lags 0..=max_lag.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 <= 0.0 || !c0.is_finite() {
        return (0..=max_lag.min(n.saturating_sub(1))).map(|t| if t == 0 { 1.0 } else { 0.0 }).collect();
    }
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|t| dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / ((n - t) as f64 * c0))
        .collect()
}

/// Windowed estimator: the smallest W with W ≥ 5·τ(W). Lags are computed
/// only up to the chosen window.
pub fn integrated_autocorrelation(series: &[f64]) -> TauEstimate {
    let n = series.len();
    if n < 2 {
        return TauEstimate { tau: 0.5, window: 0, converged: false };
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    let max_lag = n / 2;
    let mut tau = 0.5;
    for w in 1..=max_lag {
        if c0 > 0.0 && c0.is_finite() {
            tau += dev[..n - w].iter().zip(&dev[w..]).map(|(a, b)| a * b).sum::<f64>() / ((n - w) as f64 * c0);
        }
        if w as f64 >= 5.0 * tau {
            return TauEstimate { tau: tau.max(0.5), window: w, converged: true };
        }
    }
    TauEstimate { tau: tau.max(0.5), window: max_lag, converged: false }
}
