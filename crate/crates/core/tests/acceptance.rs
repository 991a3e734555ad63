//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use qgraph::analysis::{energy_quantum, estimate, Observable, ObservableEstimate, Reweighter, Series};
use qgraph::enumeration::{self, exhaustive, polya};
use qgraph::hamiltonian::{Ensemble, ModelParams};
use qgraph::hilbert::{
    action_matrix, antisymmetrize, full_basis, ladder_apply, mat_mul, one_slot_matrices, permute,
    project_vertex_operator, ratio, symmetrize, BasisKet, Ladder, Sector, StateVector, VertexObservable,
};
use qgraph::mc::{detailed_balance_exact, run_chain, ChainConfig, RunRecord};
use qgraph::symmetry::{isomorphism_classes, Permutation};
use qgraph::Result;

const SEED: u64 = 20240611;

struct Verdict {
    pass: bool,
    detail: String,
    failures: Vec<String>,
}

impl Verdict {
    fn from_failures(checked: usize, what: &str, failures: Vec<String>) -> Verdict {
        Verdict { pass: failures.is_empty(), detail: format!("{} of {checked} {what} failed", failures.len()), failures }
    }
}

fn value(est: &[ObservableEstimate], obs: Observable) -> (f64, f64) {
    let e = est.iter().find(|e| e.observable == obs).expect("estimate present");
    (e.value, e.std_error)
}

fn within(x: f64, sigma: f64, reference: f64, k: f64) -> bool {
    (x - reference).abs() <= k * sigma
}

fn run_all(configs: &[ChainConfig]) -> Result<Vec<RunRecord>> {
    configs.par_iter().map(run_chain).collect()
}

fn chain_configs(p: &ModelParams, betas: &[f64], ensemble: Ensemble, measurements: usize, first_stream: u64) -> Vec<ChainConfig> {
    betas
        .iter()
        .enumerate()
        .map(|(k, &beta)| {
            let mut c = ChainConfig::new(*p, beta, ensemble, SEED);
            c.stream = first_stream + k as u64;
            c.target_measurements = measurements;
            c
        })
        .collect()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).collect()
}

fn census_agreement() -> Result<Verdict> {
    let betas = grid(0.5, 5.0, 0.5);
    let mut failures = Vec::new();
    let mut checked = 0;
    for (stream0, p) in [(0, ModelParams::free(7, 0.0, 1.0)?), (100, ModelParams::ising(7, -0.5, 1.0)?)] {
        let exact = exhaustive::exact_curve(&betas, &p, Ensemble::Unlabeled, false)?;
        let runs = run_all(&chain_configs(&p, &betas, Ensemble::Unlabeled, 4000, stream0))?;
        for (run, ex) in runs.iter().zip(&exact) {
            let est = estimate(&Series::from(run))?;
            let refs = [
                (Observable::U, ex.thermo.u),
                (Observable::C, ex.thermo.c),
                (Observable::S1, ex.s1),
                (Observable::ChiS1, ex.chi_s1),
            ];
            for (obs, reference) in refs {
                checked += 1;
                let (x, s) = value(&est, obs);
                if !within(x, s, reference, 3.0) {
                    failures.push(format!("{} beta={} {obs}: {x} +- {s} vs {reference}", p.kind, run.config.beta));
                }
            }
        }
    }
    Ok(Verdict::from_failures(checked, "comparisons", failures))
}

fn closed_form() -> Result<Verdict> {
    let p = ModelParams::free(10, 0.0, 1.0)?;
    let betas = grid(0.0, 5.0, 0.5);
    let runs = run_all(&chain_configs(&p, &betas, Ensemble::Labeled, 4000, 200))?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for run in &runs {
        let beta = run.config.beta;
        let exact = enumeration::labeled_free_thermo(beta, &p)?;
        let density = enumeration::er_edge_probability(beta, &p)?;
        let est = estimate(&Series::from(run))?;
        let (m, sm) = value(&est, Observable::M);
        let (u, su) = value(&est, Observable::U);
        let (c, sc) = value(&est, Observable::C);
        for (name, x, s, reference) in [("u", u, su, exact.u), ("c", c, sc, exact.c), ("level-0 density", 1.0 - m, sm, density)] {
            checked += 1;
            if !within(x, s, reference, 3.0) {
                failures.push(format!("beta={beta} {name}: {x} +- {s} vs {reference}"));
            }
        }
    }
    Ok(Verdict::from_failures(checked, "comparisons", failures))
}

fn polya_consistency() -> Result<Verdict> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 1..=6 {
        let d = polya::edge_polynomial(n)?;
        let mut brute = vec![BigUint::zero(); d.len()];
        for g in isomorphism_classes(n)? {
            brute[g.n1()] += 1u8;
        }
        checked += d.len();
        for (m, (a, b)) in d.iter().zip(&brute).enumerate() {
            if a != b {
                failures.push(format!("D({n},{m}) = {a}, brute force {b}"));
            }
        }
    }
    let p = ModelParams::free(7, 0.0, 1.0)?;
    for beta in grid(0.0, 9.5, 0.5) {
        checked += 1;
        let a = polya::polya_log_partition(beta, &p)?;
        let b = exhaustive::exhaustive_partition(beta, &p, Ensemble::Unlabeled, false)?.log_z;
        // relative error of Z from the difference of logarithms
        let rel = (a - b).exp_m1().abs();
        if rel > 1e-10 {
            failures.push(format!("n=7 beta={beta}: relative error {rel:e}"));
        }
    }
    Ok(Verdict::from_failures(checked, "checks", failures))
}

fn detailed_balance() -> Result<Verdict> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in [ModelParams::free(4, 0.0, 1.0)?, ModelParams::ising(4, -0.5, 1.0)?] {
        let quantum = BigRational::from_float(energy_quantum(&p)).expect("finite quantum");
        for ens in [Ensemble::Labeled, Ensemble::Unlabeled] {
            for t in [ratio(1, 2), ratio(3, 7), ratio(1, 1000)] {
                let r = detailed_balance_exact(&p, ens, &quantum, &t)?;
                checked += r.transitions;
                if r.violations > 0 {
                    failures.push(format!("{} {ens} t={t}: {} violations", p.kind, r.violations));
                }
            }
        }
    }
    Ok(Verdict::from_failures(checked, "transitions", failures))
}

type Op = fn(&StateVector) -> Result<StateVector>;

fn operator_suite() -> Result<Verdict> {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut check = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            failures.push(what);
        }
    };
    let (s, a): (Op, Op) = (symmetrize, antisymmetrize);
    for n in 2..=4 {
        for d in 2..=3u8 {
            for sector in [Sector::Symmetric, Sector::Antisymmetric] {
                let mut ok = [true; 5];
                let perms: Vec<Permutation> = Permutation::all(n).collect();
                for ket in full_basis(n, d, sector)? {
                    let v = StateVector::from_ket(&ket);
                    let (sv, av) = (s(&v)?, a(&v)?);
                    ok[0] &= s(&sv)? == sv;
                    ok[1] &= a(&av)? == av;
                    ok[2] &= s(&av)?.is_zero();
                    ok[3] &= a(&sv)?.is_zero();
                    for pi in &perms {
                        let sign = BigRational::from_integer(pi.sign().into());
                        ok[4] &= permute(pi, &av)? == av.scaled(&sign);
                    }
                }
                for (k, name) in ["S^2 = S", "A^2 = A", "SA = 0", "AS = 0", "pi A = sgn(pi) A"].iter().enumerate() {
                    check(ok[k], format!("{name} fails at n={n} D={d} {sector:?}"));
                }
            }
        }
    }

    for d in 2..=4u8 {
        let (plus, minus) = one_slot_matrices(d);
        let (pm, mp) = (mat_mul(&plus, &minus), mat_mul(&minus, &plus));
        let dd = d as usize;
        let delta = |x: usize, y: usize| i64::from(x == y);
        let mut ok = true;
        for i in 0..dd {
            for j in 0..dd {
                let diag = delta(i, j);
                ok &= pm[i][j] - mp[i][j] == diag * (delta(i, 0) - delta(j, dd - 1));
                ok &= pm[i][j] + mp[i][j] == diag * (2 - delta(i, 0) - delta(j, dd - 1));
            }
        }
        let raise = action_matrix(d, |v| ladder_apply(Ladder::Raise, 0, v))?;
        for i in 0..dd {
            for j in 0..dd {
                ok &= raise[j][i] == BigRational::from_integer(plus[i][j].into());
            }
        }
        check(ok, format!("one-slot commutator/anticommutator mismatch at D={d}"));
    }

    // Vertices 1..4 of the worked examples are 0..3 here; slots are ordered
    // 01, 02, 03, 12, 13, 23.
    let nolocal = BasisKet::new(4, 3, vec![0, 2, 2, 0, 0, 2], Sector::Antisymmetric)?;
    let projected = antisymmetrize(&StateVector::from_ket(&nolocal))?;
    check(!projected.is_zero(), "nolocal projection vanishes".into());
    for vertex in 0..4 {
        let op = project_vertex_operator(VertexObservable::Degree(0), vertex);
        check(op.apply(&projected)? == projected.scaled(&ratio(3, 2)), format!("nolocal eigenvalue at vertex {vertex} is not 3/2"));
    }
    check(op_average(&nolocal) == ratio(3, 2), "nolocal vertex average is not 3/2".into());

    let cycle = BasisKet::new(4, 3, vec![0, 2, 0, 0, 2, 0], Sector::Antisymmetric)?;
    let mut expected = StateVector::zero(4, 3, Sector::Antisymmetric);
    for levels in [[0u8, 2, 0, 0, 2, 0], [0, 0, 2, 2, 0, 0], [2, 0, 0, 0, 0, 2]] {
        expected.add_term(levels.to_vec(), ratio(1, 3));
    }
    check(antisymmetrize(&StateVector::from_ket(&cycle))? == expected, "4-cycle projection differs from the 3-term sum".into());

    Ok(Verdict::from_failures(checked, "identities", failures))
}

fn op_average(ket: &BasisKet) -> BigRational {
    project_vertex_operator(VertexObservable::Degree(0), 0).averaged_eigenvalue(ket)
}

struct Curve {
    peak_c: f64,
    peak_beta: f64,
    tau_at_peak: f64,
    tau_at_zero: f64,
}

fn phase_curve(p: &ModelParams, ensemble: Ensemble, betas: &[f64], stream0: u64) -> Result<(Curve, Vec<RunRecord>)> {
    let runs = run_all(&chain_configs(p, betas, ensemble, 1000, stream0))?;
    let series: Vec<Series> = runs.iter().map(Series::from).collect();
    let rw = Reweighter::new(&series, p)?;
    let (lo, hi) = rw.beta_range();
    let points = rw.curve(&grid(lo, hi, 0.05))?;
    let peak = points.iter().copied().filter(|q| q.c.is_finite()).fold(None::<qgraph::analysis::CurvePoint>, |best, q| match best {
        Some(b) if b.c >= q.c => Some(b),
        _ => Some(q),
    });
    let peak = peak.expect("non-empty curve");
    let nearest = runs
        .iter()
        .min_by(|a, b| (a.config.beta - peak.beta).abs().total_cmp(&(b.config.beta - peak.beta).abs()))
        .expect("runs");
    let zero = runs.iter().find(|r| r.config.beta == 0.0).expect("beta = 0 simulated");
    Ok((Curve { peak_c: peak.c, peak_beta: peak.beta, tau_at_peak: nearest.tau, tau_at_zero: zero.tau }, runs))
}

fn phase_structure() -> Result<Verdict> {
    let betas = grid(0.0, 10.0, 0.25);
    let sizes = [10usize, 12, 15];
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut lines = Vec::new();
    let mut stream = 1000;
    for (label, e0) in [("free", None), ("ising ferro", Some(-0.5))] {
        let mut unlabeled = BTreeMap::new();
        let mut labeled = BTreeMap::new();
        for &n in &sizes {
            let p = match e0 {
                None => ModelParams::free(n, 0.0, 1.0)?,
                Some(e0) => ModelParams::ising(n, e0, 1.0)?,
            };
            for ens in [Ensemble::Unlabeled, Ensemble::Labeled] {
                let (curve, _) = phase_curve(&p, ens, &betas, stream)?;
                stream += betas.len() as u64;
                lines.push(format!(
                    "{label} n={n} {ens}: peak c={:.4} at beta={}, tau(peak)={:.2}, tau(0)={:.2}",
                    curve.peak_c, curve.peak_beta, curve.tau_at_peak, curve.tau_at_zero
                ));
                match ens {
                    Ensemble::Unlabeled => unlabeled.insert(n, curve),
                    Ensemble::Labeled => labeled.insert(n, curve),
                };
            }
        }
        for w in sizes.windows(2) {
            checked += 1;
            let (a, b) = (&unlabeled[&w[0]], &unlabeled[&w[1]]);
            if !(b.peak_c > a.peak_c) {
                failures.push(format!("{label} unlabeled peak c does not rise from n={} ({}) to n={} ({})", w[0], a.peak_c, w[1], b.peak_c));
            }
        }
        for (n, c) in &unlabeled {
            checked += 1;
            if !(c.tau_at_peak >= 2.0 * c.tau_at_zero) {
                failures.push(format!("{label} unlabeled n={n}: tau at peak {} < 2 x tau(0) {}", c.tau_at_peak, c.tau_at_zero));
            }
        }
        checked += 1;
        let peaks: Vec<f64> = labeled.values().map(|c| c.peak_c).collect();
        let max = peaks.iter().copied().fold(f64::MIN, f64::max);
        let min = peaks.iter().copied().fold(f64::MAX, f64::min);
        let spread = (max - min) / max;
        lines.push(format!("{label} labeled peak spread {:.1}%", 100.0 * spread));
        if !(spread < 0.2) {
            failures.push(format!("{label} labeled peak c spread {spread:.3} >= 0.2"));
        }
    }

    let p = ModelParams::ising(15, 0.5, 1.0)?;
    let lab = run_all(&chain_configs(&p, &betas, Ensemble::Labeled, 1000, stream))?;
    let unl = run_all(&chain_configs(&p, &betas, Ensemble::Unlabeled, 1000, stream + betas.len() as u64))?;
    let mut worst = 0.0f64;
    for (a, b) in lab.iter().zip(&unl) {
        checked += 1;
        let (ua, sa) = value(&estimate(&Series::from(a))?, Observable::U);
        let (ub, sb) = value(&estimate(&Series::from(b))?, Observable::U);
        let sigma = (sa * sa + sb * sb).sqrt();
        worst = worst.max((ua - ub).abs() / sigma);
        if !within(ua, sigma, ub, 3.0) {
            failures.push(format!("antiferro n=15 beta={}: labeled u {ua} +- {sa}, unlabeled u {ub} +- {sb}", a.config.beta));
        }
    }
    lines.push(format!("antiferro n=15 largest |u_l - u_u| / sigma = {worst:.2}"));
    let mut verdict = Verdict::from_failures(checked, "checks", failures);
    for l in lines {
        println!("    {l}");
    }
    verdict.detail.push_str(" (details above)");
    Ok(verdict)
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).expect("inside dir").display().to_string();
                out.insert(key, fs::read(&path).expect("readable output"));
            }
        }
    }
    out
}

fn determinism() -> Result<Verdict> {
    let work = tempfile::tempdir()?;
    let config = work.path().join("run.cfg");
    fs::write(
        &config,
        "model = ising\nE0 = -0.5\nn = 5, 6\nbeta = 0.5:2:0.5\nmeasurements = 1000\nseed = 11\nout = results\n",
    )?;
    let commands = ["exact", "polya", "simulate", "analyze", "reweight", "plot", "validate"];
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let out = work.path().join("results");
        if out.exists() {
            fs::remove_dir_all(&out)?;
        }
        for cmd in commands {
            let status = Command::new(env!("CARGO_BIN_EXE_qgraph"))
                .args([cmd, "--config", config.to_str().expect("utf-8 path"), "--threads", threads])
                .current_dir(work.path())
                .output()?;
            if !status.status.success() {
                return Ok(Verdict {
                    pass: false,
                    detail: format!("`qgraph {cmd}` exited with {}", status.status),
                    failures: vec![String::from_utf8_lossy(&status.stderr).into_owned()],
                });
            }
        }
        runs.push(snapshot(&out));
    }
    let (a, b) = (&runs[0], &runs[1]);
    let mut failures = Vec::new();
    for (name, bytes) in a {
        if b.get(name) != Some(bytes) {
            failures.push(format!("{name} differs between runs"));
        }
    }
    for name in b.keys().filter(|k| !a.contains_key(*k)) {
        failures.push(format!("{name} only produced by the second run"));
    }
    let csvs = a.keys().filter(|k| k.ends_with(".csv")).count();
    let mut v = Verdict::from_failures(a.len(), "files", failures);
    v.detail = format!("{} ({csvs} CSV tables, 1 vs 3 threads)", v.detail);
    Ok(v)
}

fn main() {
    let criteria: [(&str, fn() -> Result<Verdict>); 7] = [
        ("MC vs census, n=7 unlabeled", census_agreement),
        ("closed-form oracle, labeled free n=10", closed_form),
        ("Polya consistency", polya_consistency),
        ("exact detailed balance, n=4", detailed_balance),
        ("operator algebra", operator_suite),
        ("phase structure, n in {10, 12, 15}", phase_structure),
        ("determinism of CLI output", determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict = f().unwrap_or_else(|e| Verdict { pass: false, detail: format!("error: {e}"), failures: Vec::new() });
        let secs = start.elapsed().as_secs_f64();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} {status}: {name}: {} [{secs:.1} s]", verdict.detail);
        for f in verdict.failures.iter().take(20) {
            println!("    {f}");
        }
        all &= verdict.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
