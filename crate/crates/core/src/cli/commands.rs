use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{estimate, reweight::Reweighter, Series};
use crate::cli::config::ExperimentConfig;
use crate::cli::csvio::{write_table, Meta, Table};
use crate::cli::plot;
use crate::enumeration::{self, exhaustive, polya, ExactObservables};
use crate::error::{Error, Result};
use crate::hamiltonian::{Ensemble, ModelKind};
use crate::mc::{run_chain, ChainConfig, RunRecord};

#[derive(Parser, Debug)]
#[command(name = "qgraph", version, about = "Thermodynamics of labeled and unlabeled quantum graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Allow exhaustive sums for n = 8..10.
    #[arg(long, global = true)]
    pub long: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Exact thermodynamics table.
    Exact,
    /// D(n,m) tables from the pair-group cycle index.
    Polya,
    /// Monte Carlo runs over the (n, ensemble, beta) grid.
    Simulate,
    /// Observable estimates from simulated runs.
    Analyze,
    /// Multiple-histogram curves from simulated runs.
    Reweight,
    /// Oracle suite; exits 1 on any failure.
    Validate,
    /// SVG charts from the tables in the output directory.
    Plot,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Polya => "polya",
            Command::Simulate => "simulate",
            Command::Analyze => "analyze",
            Command::Reweight => "reweight",
            Command::Validate => "validate",
            Command::Plot => "plot",
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Done,
    ValidationFailed,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::ValidationFailed) => {
            eprintln!("validation failed");
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse { .. } => EXIT_USAGE,
        Error::Context { source, .. } => exit_code(source),
        _ => EXIT_FAILED,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None if cli.command == Command::Validate => validate_defaults(),
        None => return Err(Error::config("--config", "a config file is required for this command")),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("--threads", e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Exact => exact(&cfg, cli.long),
        Command::Polya => polya_tables(&cfg),
        Command::Simulate => simulate(&cfg),
        Command::Analyze => analyze(&cfg),
        Command::Reweight => reweight(&cfg),
        Command::Validate => validate(&cfg, cli.long),
        Command::Plot => plot_all(&cfg),
    })
}

fn meta<'a>(command: Command, cfg: &'a ExperimentConfig) -> Meta<'a> {
    Meta { command: command.name(), config: cfg, extra: Vec::new() }
}

fn num(x: f64) -> String {
    x.to_string()
}

enum ExactSource {
    Census,
    ClosedForm,
    Polya,
}

fn exact_source(cfg: &ExperimentConfig, n: usize, ensemble: Ensemble, long: bool) -> Result<ExactSource> {
    let cap = if long { exhaustive::LONG_MAX_N } else { exhaustive::DEFAULT_MAX_N };
    if n <= cap {
        return Ok(ExactSource::Census);
    }
    match (cfg.model, ensemble) {
        (ModelKind::Free, Ensemble::Labeled) => Ok(ExactSource::ClosedForm),
        (ModelKind::Free, Ensemble::Unlabeled) if n <= polya::MAX_POLYA_N => Ok(ExactSource::Polya),
        (ModelKind::Free, Ensemble::Unlabeled) => {
            Err(Error::config("n", format!("unlabeled free exact values need n <= {}, got {n}", polya::MAX_POLYA_N)))
        }
        (ModelKind::Ising, _) => Err(Error::config(
            "n",
            format!("exact Ising sums need n <= {} (n <= {} with --long), got {n}", exhaustive::DEFAULT_MAX_N, exhaustive::LONG_MAX_N),
        )),
    }
}

/// Exact observables for one (n, ensemble) over the config's β list.
pub fn exact_rows(cfg: &ExperimentConfig, n: usize, ensemble: Ensemble, long: bool) -> Result<Vec<ExactObservables>> {
    let p = cfg.params(n)?;
    match exact_source(cfg, n, ensemble, long)? {
        ExactSource::Census => exhaustive::exact_curve(&cfg.beta, &p, ensemble, long),
        ExactSource::ClosedForm => cfg.beta.iter().map(|&b| enumeration::labeled_free_observables(b, &p)).collect(),
        ExactSource::Polya => polya::polya_curve(&cfg.beta, &p),
    }
}

fn exact(cfg: &ExperimentConfig, long: bool) -> Result<Outcome> {
    for &n in &cfg.n {
        for &ens in &cfg.ensembles {
            exact_source(cfg, n, ens, long)?;
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &ens in &cfg.ensembles {
            for o in exact_rows(cfg, n, ens, long)? {
                let t = o.thermo;
                rows.push(vec![
                    n.to_string(),
                    num(t.beta),
                    ens.to_string(),
                    num(t.f),
                    num(t.u),
                    num(t.c),
                    num(o.s1),
                    num(o.chi_s1),
                    num(o.m),
                    num(o.chi_m),
                ]);
            }
        }
    }
    let header = ["n", "beta", "ensemble", "f", "u", "c", "s1", "chi_s1", "m", "chi_m"];
    write_table(&cfg.out.join("exact.csv"), &meta(Command::Exact, cfg), &header, &rows)?;
    Ok(Outcome::Done)
}

fn polya_tables(cfg: &ExperimentConfig) -> Result<Outcome> {
    if let Some(&n) = cfg.n.iter().find(|&&n| n > polya::MAX_POLYA_N) {
        return Err(Error::config("n", format!("pair-group tables need n <= {}, got {n}", polya::MAX_POLYA_N)));
    }
    for &n in &cfg.n {
        let d = polya::edge_polynomial(n)?;
        let rows: Vec<Vec<String>> = d.iter().enumerate().map(|(m, x)| vec![m.to_string(), x.to_string()]).collect();
        write_table(&cfg.out.join(format!("polya_n{n}.csv")), &meta(Command::Polya, cfg), &["m", "D"], &rows)?;
    }
    Ok(Outcome::Done)
}

/// One grid point per (n, ensemble, β), in that nesting order.
pub fn grid(cfg: &ExperimentConfig) -> Result<Vec<ChainConfig>> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        let params = cfg.params(n)?;
        for &ensemble in &cfg.ensembles {
            for &beta in &cfg.beta {
                let mut c = ChainConfig::new(params, beta, ensemble, cfg.seed);
                c.stream = out.len() as u64;
                c.equilibration_sweeps = cfg.equilibration;
                c.target_measurements = cfg.measurements;
                c.max_sweeps = cfg.max_sweeps;
                c.start = cfg.start;
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn run_file(idx: usize) -> String {
    format!("run_{idx:04}.csv")
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let points = grid(cfg)?;
    let records: Vec<RunRecord> = points
        .par_iter()
        .map(|c| {
            run_chain(c).map_err(|e| e.context(format!("n={} beta={} ensemble={}", c.params.n, c.beta, c.ensemble)))
        })
        .collect::<Result<_>>()?;
    let mut manifest = Vec::new();
    for (idx, r) in records.iter().enumerate() {
        let c = &r.config;
        let rows: Vec<Vec<String>> = r
            .rows
            .iter()
            .map(|m| {
                vec![
                    m.sweep.to_string(),
                    num(m.energy),
                    m.n1.to_string(),
                    num(m.s1),
                    m.gamma.map_or(String::new(), |g| g.to_string()),
                ]
            })
            .collect();
        let mut run_meta = meta(Command::Simulate, cfg);
        run_meta.extra = vec![format!(
            "run: n={} beta={} ensemble={} stream={} tau={} spacing={} equilibration_sweeps={} total_sweeps={} converged={}",
            c.params.n, c.beta, c.ensemble, c.stream, r.tau, r.spacing, r.equilibration_sweeps, r.total_sweeps, r.converged
        )];
        write_table(&cfg.out.join(run_file(idx)), &run_meta, &["sweep", "E", "n1", "s1", "gamma"], &rows)?;
        if !r.converged {
            eprintln!(
                "warning: run {idx} (n={} beta={} ensemble={}) did not converge within max_sweeps",
                c.params.n, c.beta, c.ensemble
            );
        }
        manifest.push(vec![
            c.params.n.to_string(),
            num(c.beta),
            c.ensemble.to_string(),
            c.seed.to_string(),
            c.stream.to_string(),
            num(r.tau),
            num(r.acceptance_rate),
            r.converged.to_string(),
            run_file(idx),
        ]);
    }
    let header = ["n", "beta", "ensemble", "seed", "stream", "tau", "acceptance", "converged", "file"];
    write_table(&cfg.out.join("manifest.csv"), &meta(Command::Simulate, cfg), &header, &manifest)?;
    Ok(Outcome::Done)
}

/// A simulated run read back from disk.
pub struct StoredRun {
    pub n: usize,
    pub beta: f64,
    pub ensemble: Ensemble,
    pub tau: f64,
    pub converged: bool,
    pub series: Series,
}

pub fn read_runs(dir: &Path) -> Result<Vec<StoredRun>> {
    let manifest = Table::read(&dir.join("manifest.csv"))?;
    let cols = ["n", "beta", "ensemble", "tau", "converged", "file"].map(|c| manifest.col(c));
    let [cn, cb, ce, ct, cc, cf] = cols;
    let (cn, cb, ce, ct, cc, cf) = (cn?, cb?, ce?, ct?, cc?, cf?);
    let mut out = Vec::new();
    for row in 0..manifest.rows.len() {
        let n: usize = manifest.get(row, cn)?;
        let beta: f64 = manifest.get(row, cb)?;
        let file: String = manifest.get(row, cf)?;
        let run = Table::read(&dir.join(&file))?;
        let (e, k, s) = (run.col("E")?, run.col("n1")?, run.col("s1")?);
        let mut series = Series { n, beta, energy: Vec::new(), n1: Vec::new(), s1: Vec::new() };
        for r in 0..run.rows.len() {
            series.energy.push(run.get(r, e)?);
            series.n1.push(run.get(r, k)?);
            series.s1.push(run.get(r, s)?);
        }
        out.push(StoredRun {
            n,
            beta,
            ensemble: manifest.get::<String>(row, ce)?.parse()?,
            tau: manifest.get(row, ct)?,
            converged: manifest.get(row, cc)?,
            series,
        });
    }
    Ok(out)
}

fn analyze(cfg: &ExperimentConfig) -> Result<Outcome> {
    let runs = read_runs(&cfg.out)?;
    let mut rows = Vec::new();
    for run in &runs {
        if !run.converged {
            eprintln!("warning: run n={} beta={} ensemble={} is flagged non-converged", run.n, run.beta, run.ensemble);
        }
        let est = estimate(&run.series)
            .map_err(|e| e.context(format!("n={} beta={} ensemble={}", run.n, run.beta, run.ensemble)))?;
        for e in est {
            rows.push(vec![
                run.n.to_string(),
                num(run.beta),
                run.ensemble.to_string(),
                e.observable.to_string(),
                num(e.value),
                num(e.std_error),
                e.n_samples.to_string(),
            ]);
        }
    }
    let header = ["n", "beta", "ensemble", "observable", "value", "stderr", "nsamples"];
    write_table(&cfg.out.join("estimates.csv"), &meta(Command::Analyze, cfg), &header, &rows)?;
    Ok(Outcome::Done)
}

/// Evenly spaced grid from lo to hi inclusive.
pub fn beta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).filter(|&b| b <= hi).collect()
}

fn reweight(cfg: &ExperimentConfig) -> Result<Outcome> {
    let runs = read_runs(&cfg.out)?;
    let mut groups: BTreeMap<(usize, Ensemble), Vec<Series>> = BTreeMap::new();
    for run in runs {
        groups.entry((run.n, run.ensemble)).or_default().push(run.series);
    }
    let mut rows = Vec::new();
    for ((n, ens), series) in &groups {
        let p = cfg.params(*n)?;
        let ctx = |e: Error| e.context(format!("n={n} ensemble={ens}"));
        let rw = Reweighter::new(series, &p).map_err(ctx)?;
        let (lo, hi) = rw.beta_range();
        for pt in rw.curve(&beta_grid(lo, hi, cfg.reweight_step)).map_err(ctx)? {
            let mut row = vec![n.to_string(), num(pt.beta), ens.to_string()];
            row.extend(pt.values().iter().map(|&v| num(v)));
            rows.push(row);
        }
    }
    let header = ["n", "beta", "ensemble", "u", "c", "m", "chi_m", "s1", "chi_s1"];
    write_table(&cfg.out.join("reweight.csv"), &meta(Command::Reweight, cfg), &header, &rows)?;
    Ok(Outcome::Done)
}

fn validate_defaults() -> ExperimentConfig {
    ExperimentConfig {
        n: vec![5],
        beta: vec![0.5, 1.0, 2.0],
        seed: 2024,
        out: PathBuf::from("validate"),
        ..ExperimentConfig::default()
    }
}

fn validate(cfg: &ExperimentConfig, long: bool) -> Result<Outcome> {
    let checks = crate::cli::validate::run_suite(cfg, long)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.clone(), c.detail.clone(), num(c.value), num(c.reference), num(c.tolerance), c.pass.to_string()])
        .collect();
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {} {}: {} vs {} (tol {})", c.name, c.detail, c.value, c.reference, c.tolerance);
    }
    let header = ["check", "detail", "value", "reference", "tolerance", "pass"];
    write_table(&cfg.out.join("validate.csv"), &meta(Command::Validate, cfg), &header, &rows)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { Outcome::Done } else { Outcome::ValidationFailed })
}

fn plot_all(cfg: &ExperimentConfig) -> Result<Outcome> {
    let written = plot::render_directory(&cfg.out)?;
    if written == 0 {
        return Err(Error::invalid(format!(
            "{} holds none of exact.csv, estimates.csv, reweight.csv, manifest.csv",
            cfg.out.display()
        )));
    }
    Ok(Outcome::Done)
}
