use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use expfunc::bm::{frobenius_solve, BmDriftParams};
use expfunc::range::{check_in_range, decide_membership, finite_k_check, growth_necessary_check, FiniteKOptions};
use expfunc::sim::{empirical_laplace, simulate_functional, verify_fixed_point, SimConfig};
use expfunc::spec_file::{read_spec, SpecDoc};
use expfunc::stable::{preimage_polynomial, stable_preimage, stable_range_check, StableConvolutionSpec};
use expfunc::support::support_of_functional;
use expfunc::{Decision, Error, LevyTriplet, PositiveLawSpec, RangeVerdict};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "expfunc", version, about = "Exponential functionals of Lévy processes")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Upper bound on simulation worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    General,
    FiniteK,
    Growth,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::General => "general",
            Method::FiniteK => "finite-k",
            Method::Growth => "growth",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Support of the law of the exponential functional.
    Support {
        #[arg(long)]
        xi: PathBuf,
        #[arg(long)]
        eta: PathBuf,
    },
    /// Whether a positive law is the law of V for ξ_t = σB_t + at.
    RangeCheck {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Pre-image of a positive α-stable law under ξ_t = σB_t + at.
    PreimageStable {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Frobenius series for the Laplace transform of V when ψ_η is a power series.
    SolveOde {
        #[arg(long)]
        theta: f64,
        /// Coefficients f₁, f₂, … of ψ_η(u) = Σ fₙ uⁿ.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        feta: Vec<f64>,
        /// Series truncation order.
        #[arg(long = "N", default_value_t = 200)]
        n: usize,
        /// Evaluation grid `lo:hi:n`.
        #[arg(long, default_value = "0.1:1:10")]
        grid: String,
        /// Fix C₁ instead of fitting it.
        #[arg(long = "c1", visible_alias = "C1", allow_hyphen_values = true)]
        c1: Option<f64>,
        /// Gaussian scale; by default σ² = 2 and a = θ.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Monte Carlo samples of V.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// CSV destination for the samples.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare simulated and analytic Laplace transforms of V.
    Verify {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        u: Vec<f64>,
        /// Also run the fixed-point check at this time.
        #[arg(long)]
        t_check: Option<f64>,
    },
}

#[derive(clap::Args)]
struct SimArgs {
    #[arg(long)]
    xi: PathBuf,
    #[arg(long)]
    eta: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    /// Horizon; defaults to max(30, 20/E[ξ₁]).
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Small-jump cutoff for infinite-activity measures.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    fn reason(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Io(s) => s.clone(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Spec(_)) => 65,
            CliError::Lib(Error::Domain(_) | Error::Unsupported(_)) => 64,
            CliError::Lib(Error::Inconclusive(_)) => 2,
            CliError::Lib(Error::Numeric(_)) => 70,
            CliError::Io(_) => 74,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Report {
    command: &'static str,
    config: Value,
    inputs: Vec<(&'static str, PathBuf, String)>,
    seed: Option<u64>,
    result: Value,
    human: String,
    exit: u8,
}

fn decision_exit(d: Decision) -> u8 {
    match d {
        Decision::Accept => 0,
        Decision::Reject => 1,
        Decision::Inconclusive => 2,
    }
}

/// JSON number, or a string for non-finite values.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

struct Loaded {
    doc: SpecDoc,
    sha: String,
}

/// Any failure while loading or interpreting a spec file is a spec error.
fn as_spec(e: Error) -> Error {
    match e {
        Error::Spec(_) => e,
        other => Error::Spec(other.to_string()),
    }
}

fn load(path: &Path) -> CliResult<Loaded> {
    let (doc, bytes) = read_spec(path).map_err(as_spec)?;
    Ok(Loaded { doc, sha: sha256_hex(&bytes) })
}

fn process(l: &Loaded) -> CliResult<LevyTriplet> {
    Ok(l.doc.to_triplet().map_err(as_spec)?)
}

fn law(l: &Loaded) -> CliResult<PositiveLawSpec> {
    Ok(l.doc.to_law().map_err(as_spec)?)
}

fn doc_value(d: &SpecDoc) -> Value {
    serde_json::to_value(d).expect("spec documents serialise")
}

fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Support { xi, eta } => {
            let (lx, le) = (load(xi)?, load(eta)?);
            let s = support_of_functional(&process(&lx)?, &process(&le)?)?;
            Ok(Report {
                command: "support",
                config: json!({ "xi": doc_value(&lx.doc), "eta": doc_value(&le.doc) }),
                inputs: vec![("xi", xi.clone(), lx.sha), ("eta", eta.clone(), le.sha)],
                seed: None,
                result: json!({ "kind": s.kind.as_str(), "lower": num(s.lower), "upper": num(s.upper), "set": s.to_string() }),
                human: format!("support: {s}\nkind: {}\n", s.kind.as_str()),
                exit: 0,
            })
        }
        Command::RangeCheck { mu, a, sigma, method } => {
            let lm = load(mu)?;
            let m = law(&lm)?;
            let p = BmDriftParams::new(*a, *sigma)?;
            let xi = p.triplet();
            let config = json!({ "mu": doc_value(&lm.doc), "a": a, "sigma": sigma, "method": method.as_str() });
            let inputs = vec![("mu", mu.clone(), lm.sha)];
            if *method == Method::Growth {
                let g = growth_necessary_check(&m, &p)?;
                let result = json!({
                    "decision": g.decision,
                    "limsup": num(g.limsup),
                    "eta_drift_positive": g.eta_drift_positive,
                    "certificate": g.certificate,
                });
                let human = format!("decision: {}\ncertificate: {}\n", g.decision.as_str(), g.certificate);
                return Ok(Report {
                    command: "range-check",
                    config,
                    inputs,
                    seed: None,
                    result,
                    human,
                    exit: decision_exit(g.decision),
                });
            }
            let v = match method {
                Method::Auto => decide_membership(&m, &xi)?,
                Method::General => check_in_range(&m, &xi)?,
                Method::FiniteK => finite_k_check(&m, &p, &FiniteKOptions::default())?,
                Method::Growth => unreachable!("handled above"),
            };
            Ok(Report {
                command: "range-check",
                config,
                inputs,
                seed: None,
                result: verdict_value(&v),
                human: verdict_human(&v),
                exit: decision_exit(v.decision),
            })
        }
        Command::PreimageStable { alpha, c, a, sigma } => {
            let spec = StableConvolutionSpec::single(*alpha, *c)?;
            let v = stable_range_check(&spec, *a, *sigma)?;
            let form = preimage_polynomial(&spec, *a, *sigma);
            let terms: Vec<Value> = form.terms.iter().map(|&(g, d)| json!({ "exponent": g, "coefficient": d })).collect();
            let eta = if v.decision == Decision::Accept {
                SpecDoc::from_triplet(&stable_preimage(*alpha, *c, *a, *sigma)?)
            } else {
                None
            };
            let mut human = format!("decision: {}\ncertificate: {}\n", v.decision.as_str(), v.certificate);
            let _ = writeln!(human, "f(u) = {}", poly_string(&form.terms));
            if let Some(e) = &eta {
                let _ = write!(human, "eta:\n{}", e.to_toml()?);
            }
            Ok(Report {
                command: "preimage-stable",
                config: json!({ "alpha": alpha, "c": c, "a": a, "sigma": sigma }),
                inputs: vec![],
                seed: None,
                result: json!({
                    "decision": v.decision,
                    "certificate": v.certificate,
                    "polynomial": terms,
                    "eta": eta.as_ref().map(doc_value),
                }),
                human,
                exit: decision_exit(v.decision),
            })
        }
        Command::SolveOde { theta, feta, n, grid, c1, sigma } => {
            let p = match sigma {
                Some(s) => BmDriftParams::new(theta * s * s / 2.0, *s)?,
                None => BmDriftParams::from_theta(*theta)?,
            };
            let us = parse_grid(grid)?;
            let (s, pts) = frobenius_solve(feta, &p, *n, &us, *c1)?;
            let head = |v: &[f64]| v.iter().take(6).copied().map(num).collect::<Vec<_>>();
            let points: Vec<Value> = pts
                .iter()
                .map(|q| json!({ "u": q.u, "value": num(q.value), "error_bound": num(q.error_bound) }))
                .collect();
            let mut human = format!(
                "theta = {}, sigma^2 = {}, N = {}\nC1 = {}, C2 = {}\ncertified radius = {}\n",
                s.theta, s.sigma2, s.truncation_n, s.c1, s.c2, s.radius_estimate
            );
            let _ = writeln!(human, "c_n: {:?}", &s.c_coeffs[..s.c_coeffs.len().min(6)]);
            let _ = writeln!(human, "d_n: {:?}", &s.d_coeffs[..s.d_coeffs.len().min(6)]);
            let _ = writeln!(human, "{:>14} {:>22} {:>12}", "u", "L_V(u)", "error");
            for q in &pts {
                let _ = writeln!(human, "{:>14.6e} {:>22.15e} {:>12.3e}", q.u, q.value, q.error_bound);
            }
            Ok(Report {
                command: "solve-ode",
                config: json!({
                    "theta": theta, "feta": feta, "N": n, "grid": grid, "c1": c1,
                    "a": p.a, "sigma": p.sigma, "sigma2": p.sigma2(),
                }),
                inputs: vec![],
                seed: None,
                result: json!({
                    "c1": s.c1, "c2": s.c2, "radius_estimate": num(s.radius_estimate),
                    "c_coeffs": head(&s.c_coeffs), "d_coeffs": head(&s.d_coeffs), "points": points,
                }),
                human,
                exit: 0,
            })
        }
        Command::Simulate { sim, out } => {
            let (lx, le) = (load(&sim.xi)?, load(&sim.eta)?);
            let (xi, eta) = (process(&lx)?, process(&le)?);
            let cfg = sim_config(sim, &xi)?;
            let s = simulate_functional(&xi, &eta, &cfg)?;
            let n = s.values.len() as f64;
            let mean = s.values.iter().sum::<f64>() / n;
            let min = s.values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if let Some(path) = out {
                let mut csv = String::from("path,value\n");
                for (i, v) in s.values.iter().enumerate() {
                    let _ = writeln!(csv, "{i},{v}");
                }
                std::fs::write(path, csv).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            }
            let mut result = json!({
                "n_paths": s.values.len(),
                "mean": num(mean), "min": num(min), "max": num(max),
                "truncation_bound": num(s.truncation_bound),
                "rng_lineage": s.rng_lineage,
                "out": out,
            });
            if out.is_none() {
                result["values"] = Value::Array(s.values.iter().copied().map(num).collect());
            }
            let human = format!(
                "paths: {}\nmean: {mean}\nmin: {min}\nmax: {max}\ntruncation bound: {}\n{}",
                s.values.len(),
                s.truncation_bound,
                out.as_ref().map(|p| format!("samples written to {}\n", p.display())).unwrap_or_default()
            );
            Ok(Report {
                command: "simulate",
                config: sim_config_value(&cfg, &lx.doc, &le.doc),
                inputs: vec![("xi", sim.xi.clone(), lx.sha), ("eta", sim.eta.clone(), le.sha)],
                seed: Some(cfg.seed),
                result,
                human,
                exit: 0,
            })
        }
        Command::Verify { sim, mu, u, t_check } => {
            let (lx, le, lm) = (load(&sim.xi)?, load(&sim.eta)?, load(mu)?);
            let (xi, eta, m) = (process(&lx)?, process(&le)?, law(&lm)?);
            let cfg = sim_config(sim, &xi)?;
            let s = simulate_functional(&xi, &eta, &cfg)?;
            let mut rows = Vec::new();
            let mut all_pass = true;
            let mut human = format!("{:>8} {:>12} {:>12} {:>10} {:>8}  verdict\n", "u", "empirical", "analytic", "SE", "z");
            for &uu in u {
                let (emp, se) = empirical_laplace(&s, uu)?;
                let exact = m.psi_v.eval(uu)?.exp();
                let z = if se > 0.0 { (emp - exact) / se } else if emp == exact { 0.0 } else { f64::INFINITY };
                let pass = z.abs() <= 3.0;
                all_pass &= pass;
                let _ = writeln!(
                    human,
                    "{uu:>8} {emp:>12.6} {exact:>12.6} {se:>10.2e} {z:>8.2}  {}",
                    if pass { "pass" } else { "fail" }
                );
                rows.push(json!({
                    "u": uu, "empirical": num(emp), "analytic": num(exact), "std_error": num(se),
                    "z": num(z), "verdict": if pass { "pass" } else { "fail" },
                }));
            }
            let mut result = json!({ "rows": rows, "truncation_bound": num(s.truncation_bound) });
            if let Some(t) = t_check {
                let r = verify_fixed_point(&xi, &eta, &cfg, *t)?;
                all_pass &= r.passed;
                let _ = writeln!(
                    human,
                    "fixed point at t = {t}: KS = {:.4}, p = {:.3e}, {}",
                    r.ks_statistic,
                    r.p_value,
                    if r.passed { "pass" } else { "fail" }
                );
                result["fixed_point"] = serde_json::to_value(&r).expect("report serialises");
            }
            let mut config = sim_config_value(&cfg, &lx.doc, &le.doc);
            config["mu"] = doc_value(&lm.doc);
            config["u"] = json!(u);
            config["t_check"] = json!(t_check);
            Ok(Report {
                command: "verify",
                config,
                inputs: vec![("xi", sim.xi.clone(), lx.sha), ("eta", sim.eta.clone(), le.sha), ("mu", mu.clone(), lm.sha)],
                seed: Some(cfg.seed),
                result,
                human,
                exit: if all_pass { 0 } else { 1 },
            })
        }
    }
}

fn sim_config(sim: &SimArgs, xi: &LevyTriplet) -> CliResult<SimConfig> {
    let horizon = match sim.horizon {
        Some(t) => t,
        None => SimConfig::default_horizon(xi)?,
    };
    Ok(SimConfig::new(horizon, sim.dt, sim.paths, sim.seed)?.with_cutoff(sim.eps)?)
}

fn sim_config_value(cfg: &SimConfig, xi: &SpecDoc, eta: &SpecDoc) -> Value {
    json!({
        "xi": doc_value(xi),
        "eta": doc_value(eta),
        "paths": cfg.n_paths,
        "dt": cfg.step_dt,
        "T": cfg.horizon_t,
        "seed": cfg.seed,
        "eps": cfg.small_jump_cutoff,
    })
}

fn verdict_value(v: &RangeVerdict) -> Value {
    let witness = v.eta_witness.as_ref().map(|w| {
        json!({
            "drift": w.drift.map(num),
            "eta": w.triplet.as_ref().and_then(SpecDoc::from_triplet).as_ref().map(doc_value),
            "tail_table": w.tail_table.iter().map(|&(t, m)| json!([num(t), num(m)])).collect::<Vec<_>>(),
        })
    });
    json!({
        "decision": v.decision,
        "certificate": v.certificate,
        "location": v.location.map(num),
        "witness": witness,
    })
}

fn verdict_human(v: &RangeVerdict) -> String {
    let mut s = format!("decision: {}\ncertificate: {}\n", v.decision.as_str(), v.certificate);
    if let Some(x) = v.location {
        let _ = writeln!(s, "location: {x}");
    }
    if let Some(w) = &v.eta_witness {
        if let Some(d) = w.drift {
            let _ = writeln!(s, "eta drift: {d}");
        }
        if let Some(doc) = w.triplet.as_ref().and_then(SpecDoc::from_triplet) {
            if let Ok(t) = doc.to_toml() {
                let _ = write!(s, "eta:\n{t}");
            }
        }
    }
    s
}

fn poly_string(terms: &[(f64, f64)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms.iter().map(|(g, d)| format!("{d} u^{g}")).collect::<Vec<_>>().join(" + ")
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Lib(Error::domain(format!("grid must be lo:hi:n with 0 < lo <= hi and n >= 1, got '{s}'")));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn emit(cli: &Cli, r: &Report) {
    match cli.format {
        Format::Human => print!("{}", r.human),
        Format::Structured => {
            let inputs: serde_json::Map<String, Value> = r
                .inputs
                .iter()
                .map(|(k, p, h)| (k.to_string(), json!({ "path": p, "sha256": h })))
                .collect();
            let doc = json!({
                "command": r.command,
                "config": r.config,
                "provenance": { "version": VERSION, "seed": r.seed, "inputs": inputs },
                "result": r.result,
                "exit_code": r.exit,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json output"));
        }
    }
}

fn fail(kind: &str, reason: &str, code: u8) -> ExitCode {
    let reason = reason.lines().next().unwrap_or("").replace('"', "'");
    eprintln!("error: kind={kind} reason=\"{reason}\"");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let msg = msg.trim_start_matches("error: ");
            return fail("usage", msg, 64);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("usage", "--threads must be at least 1", 64);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail("usage", &e.to_string(), 64);
        }
    }
    match run(&cli) {
        Ok(r) => {
            emit(&cli, &r);
            ExitCode::from(r.exit)
        }
        Err(e) => fail(e.kind(), &e.reason(), e.exit_code()),
    }
}
