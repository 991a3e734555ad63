//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! model = ising
//! E0 = -0.5
//! n = 10, 12, 15
//! beta = 0:10:0.25, 12
//! ensemble = both
//! ```
//!
//! Lists are comma separated; an item `a:b:step` expands to a, a+step, ... up
//! to and including b.

use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonian::{Ensemble, ModelKind, ModelParams};
use crate::mc::{StartState, DEFAULT_MAX_SWEEPS, DEFAULT_MEASUREMENTS};

const KEYS: [&str; 14] = [
    "model",
    "E0",
    "E1",
    "J",
    "n",
    "beta",
    "ensemble",
    "seed",
    "measurements",
    "out",
    "equilibration",
    "max_sweeps",
    "start",
    "reweight_step",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub e0: f64,
    pub e1: f64,
    pub j: Option<f64>,
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    pub ensembles: Vec<Ensemble>,
    pub seed: u64,
    pub measurements: usize,
    pub out: PathBuf,
    pub equilibration: Option<u64>,
    pub max_sweeps: u64,
    pub start: StartState,
    pub reweight_step: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Free,
            e0: 0.0,
            e1: 1.0,
            j: None,
            n: Vec::new(),
            beta: Vec::new(),
            ensembles: vec![Ensemble::Labeled, Ensemble::Unlabeled],
            seed: 0,
            measurements: DEFAULT_MEASUREMENTS,
            out: PathBuf::from("out"),
            equilibration: None,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            start: StartState::Auto,
            reweight_step: 0.05,
        }
    }
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::config(field, format!("`{}` is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::config(field, "value must be finite"));
    }
    Ok(v)
}

fn parse_u64(field: &str, s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| Error::config(field, format!("`{}` is not a non-negative integer", s.trim())))
}

/// Expands a comma list whose items are numbers or inclusive `a:b:step` ranges.
pub fn parse_real_list(field: &str, s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::config(field, "empty list item"));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_f64(field, v)?),
            [a, b, step] => {
                let (a, b, step) = (parse_f64(field, a)?, parse_f64(field, b)?, parse_f64(field, step)?);
                if step <= 0.0 || b < a {
                    return Err(Error::config(field, format!("range `{item}` needs a <= b and step > 0")));
                }
                let count = ((b - a) / step + 1e-9).floor() as u64;
                if count > 1_000_000 {
                    return Err(Error::config(field, format!("range `{item}` is too long")));
                }
                out.extend((0..=count).map(|k| round12(a + k as f64 * step)));
            }
            _ => return Err(Error::config(field, format!("`{item}` is neither a number nor a:b:step"))),
        }
    }
    Ok(out)
}

pub fn parse_int_list(field: &str, s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_u64(field, v)? as usize),
            [a, b, step] => {
                let (a, b, step) = (parse_u64(field, a)?, parse_u64(field, b)?, parse_u64(field, step)?);
                if step == 0 || b < a {
                    return Err(Error::config(field, format!("range `{item}` needs a <= b and step > 0")));
                }
                out.extend((a..=b).step_by(step as usize).map(|v| v as usize));
            }
            _ => return Err(Error::config(field, format!("`{item}` is neither an integer nor a:b:step"))),
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!("line {}", lineno + 1), "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::config(key, "unknown key"));
            };
            if seen.contains(&known) {
                return Err(Error::config(key, "given twice"));
            }
            seen.push(known);
            match known {
                "model" => cfg.model = value.parse().map_err(|e: Error| Error::config(key, e.to_string()))?,
                "E0" => cfg.e0 = parse_f64(key, value)?,
                "E1" => cfg.e1 = parse_f64(key, value)?,
                "J" => cfg.j = Some(parse_f64(key, value)?),
                "n" => cfg.n = parse_int_list(key, value)?,
                "beta" => cfg.beta = parse_real_list(key, value)?,
                "ensemble" => {
                    cfg.ensembles = match value {
                        "both" => vec![Ensemble::Labeled, Ensemble::Unlabeled],
                        other => vec![other.parse().map_err(|e: Error| Error::config(key, e.to_string()))?],
                    }
                }
                "seed" => cfg.seed = parse_u64(key, value)?,
                "measurements" => cfg.measurements = parse_u64(key, value)? as usize,
                "out" => cfg.out = PathBuf::from(value),
                "equilibration" => cfg.equilibration = Some(parse_u64(key, value)?),
                "max_sweeps" => cfg.max_sweeps = parse_u64(key, value)?,
                "start" => {
                    cfg.start = match value {
                        "auto" => StartState::Auto,
                        "hot" => StartState::Hot,
                        "cold" => StartState::Cold,
                        other => return Err(Error::config(key, format!("unknown start `{other}` (auto, hot or cold)"))),
                    }
                }
                "reweight_step" => cfg.reweight_step = parse_f64(key, value)?,
                _ => unreachable!("key list and match agree"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::config("n", "at least one vertex count is required"));
        }
        if self.beta.is_empty() {
            return Err(Error::config("beta", "at least one beta is required"));
        }
        if let Some(b) = self.beta.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::config("beta", format!("beta must be non-negative, got {b}")));
        }
        for &n in &self.n {
            let min = if self.model == ModelKind::Ising { 3 } else { 2 };
            if n < min || n > crate::graph::MAX_VERTICES {
                return Err(Error::config("n", format!("{} model needs {min} <= n <= {}, got {n}", self.model, crate::graph::MAX_VERTICES)));
            }
        }
        if let Some(j) = self.j {
            if j <= 0.0 {
                return Err(Error::config("J", "coupling must be positive"));
            }
        }
        if self.measurements < 2 {
            return Err(Error::config("measurements", "need at least 2"));
        }
        if self.reweight_step <= 0.0 {
            return Err(Error::config("reweight_step", "must be positive"));
        }
        Ok(())
    }

    pub fn params(&self, n: usize) -> Result<ModelParams> {
        ModelParams::new(self.model, n, self.e0, self.e1, self.j).map_err(|e| Error::config("n", e.to_string()))
    }

    /// Canonical `key = value` lines; every field, fixed order.
    pub fn echo(&self) -> Vec<String> {
        let join = |v: Vec<String>| v.join(", ");
        let start = match self.start {
            StartState::Auto => "auto",
            StartState::Hot => "hot",
            StartState::Cold => "cold",
        };
        let ensemble = if self.ensembles.len() == 2 { "both".to_string() } else { self.ensembles[0].to_string() };
        vec![
            format!("model = {}", self.model),
            format!("E0 = {}", self.e0),
            format!("E1 = {}", self.e1),
            format!("J = {}", self.j.map_or("default".to_string(), |j| j.to_string())),
            format!("n = {}", join(self.n.iter().map(|x| x.to_string()).collect())),
            format!("beta = {}", join(self.beta.iter().map(|x| x.to_string()).collect())),
            format!("ensemble = {ensemble}"),
            format!("seed = {}", self.seed),
            format!("measurements = {}", self.measurements),
            format!("out = {}", self.out.display()),
            format!("equilibration = {}", self.equilibration.map_or("auto".to_string(), |e| e.to_string())),
            format!("max_sweeps = {}", self.max_sweeps),
            format!("start = {start}"),
            format!("reweight_step = {}", self.reweight_step),
        ]
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for line in self.echo() {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
