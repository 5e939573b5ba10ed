//! Scenario files and the command-line front end.
//!
//! A scenario names a model, a target functional, a grid of initial
//! capitals and the solver, inversion and Monte Carlo settings. Every
//! command reads one scenario and writes a single artifact into `--out`,
//! stamped with the scenario hash and seed.

use crate::error::{Error, Result};
use crate::feq::{equation_residual, rho_eval, rho_jet, solve_unknowns_with, SeriesOptions, TransformSolution, DEFAULT_TOL};
use crate::inversion::{invert_avoiding, invert_probability, InversionParams};
use crate::numerics::MAX_ORDER;
use crate::models::{assemble, BuildOptions, ModelSpec, TargetFunctional, DEFAULT_UNIFORM_NODES};
use crate::roots::RootCertificate;
use crate::selfcheck::{self, SelfcheckOptions};
use crate::simulator::{estimate, McEstimate, PathCaps};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub depth_tol: f64,
    /// Derivatives of the transform at `s = 1` reported by `solve`.
    pub jet_order: usize,
    pub uniform_nodes: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { depth_tol: DEFAULT_TOL, jet_order: 0, uniform_nodes: DEFAULT_UNIFORM_NODES }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McParams {
    pub n: u64,
    pub seed: u64,
    /// Defaults to [`PathCaps::for_capital`] per grid point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caps: Option<PathCaps>,
}

impl Default for McParams {
    fn default() -> Self {
        McParams { n: 100_000, seed: 1, caps: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default = "ruin_probability")]
    pub functional: TargetFunctional,
    pub x_grid: Vec<f64>,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub inversion: InversionParams,
    #[serde(default)]
    pub mc: McParams,
}

fn ruin_probability() -> TargetFunctional {
    TargetFunctional::RuinProbability
}

impl Scenario {
    /// Parse TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_grid.is_empty() {
            return Err(Error::InvalidParameter("x_grid is empty".into()));
        }
        if self.x_grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || self.x_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("x_grid must be positive and strictly increasing".into()));
        }
        if !(self.solver.depth_tol > 0.0) || self.solver.uniform_nodes == 0 {
            return Err(Error::InvalidParameter("solver parameters must be positive".into()));
        }
        if self.solver.jet_order > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("jet_order {} > {MAX_ORDER}", self.solver.jet_order)));
        }
        self.inversion.validate()?;
        if let Some(caps) = &self.mc.caps {
            caps.validate()?;
        }
        self.model.validate()
    }

    /// Canonical TOML form; parsing it gives back an identical scenario.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn caps_for(&self, x: f64) -> PathCaps {
        self.mc.caps.unwrap_or_else(|| PathCaps::for_capital(x))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Stamp {
    pub scenario_hash: String,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnknownValue {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub model: &'static str,
    pub functional: TargetFunctional,
    pub unknowns: Vec<UnknownValue>,
    pub collocation_residual: f64,
    pub tail_bound: f64,
    /// Largest residual of the defining equation over a few test points.
    pub equation_residual: f64,
    /// `rho^(l)(1)` for `l = 0..=jet_order`.
    pub derivatives_at_one: Vec<UnknownValue>,
    pub roots: Option<RootCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationRow {
    pub x: f64,
    #[serde(flatten)]
    pub estimate: McEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub functional: TargetFunctional,
    pub results: Vec<SimulationRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub transform: f64,
    pub mc_mean: f64,
    pub mc_half_width: f64,
    pub z: f64,
    pub censored_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub rows: Vec<ComparisonRow>,
    pub verdict: Verdict,
}

impl ComparisonReport {
    /// PASS iff `|z| <= 3` on at least 95% of the grid.
    pub fn verdict_of(rows: &[ComparisonRow]) -> Verdict {
        let ok = rows.iter().filter(|r| r.z.abs() <= 3.0).count();
        if ok as f64 >= 0.95 * rows.len() as f64 { Verdict::Pass } else { Verdict::Fail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootsReport {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub certificate: RootCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfcheckReport {
    pub seed: u64,
    pub mc_n: u64,
    pub checks: Vec<selfcheck::CheckResult>,
}

/// Solve the scenario's functional equation.
pub fn solve(sc: &Scenario) -> Result<(TransformSolution, Option<RootCertificate>)> {
    let alpha = sc.functional.alpha();
    if alpha.norm() != 0.0 && !sc.model.supports_time() {
        return Err(Error::UnsupportedFunctional(format!("ruin-time transform for {}", sc.model.kind())));
    }
    let asm = assemble(&sc.model, alpha, &BuildOptions { uniform_nodes: sc.solver.uniform_nodes })?;
    let opts = SeriesOptions { tol: sc.solver.depth_tol, ..Default::default() };
    Ok((solve_unknowns_with(&asm.system, &opts)?, asm.certificate))
}

/// Real points where a scaled image of `s` lands on a coefficient pole.
fn pole_ladder(sol: &TransformSolution) -> Vec<f64> {
    let sys = &sol.system;
    let mut out = Vec::new();
    for p in sys.poles.iter().filter(|p| p.im == 0.0 && p.re > 0.0) {
        for map in sys.maps.iter().filter(|m| m.is_pure_scaling()) {
            let mut q = p.re;
            while q < 1e6 {
                out.push(q);
                q /= map.scale;
            }
        }
    }
    out
}

/// `(x, value)` for every grid capital.
pub fn invert_grid(sc: &Scenario, sol: &TransformSolution) -> Result<Vec<(f64, f64)>> {
    let flagged = pole_ladder(sol);
    let f = |s: Complex64| rho_eval(sol, s);
    sc.x_grid
        .iter()
        .map(|&x| {
            let v = match sc.functional {
                TargetFunctional::RuinProbability => invert_probability(f, x, &sc.inversion, &flagged)?,
                TargetFunctional::RuinTimeLst { .. } => invert_avoiding(f, x, &sc.inversion, &flagged)?,
            };
            Ok((x, v))
        })
        .collect()
}

pub fn simulate(sc: &Scenario) -> Result<Vec<SimulationRow>> {
    sc.x_grid
        .iter()
        .map(|&x| Ok(SimulationRow { x, estimate: estimate(&sc.model, x, &sc.functional, sc.mc.n, &sc.caps_for(x), sc.mc.seed)? }))
        .collect()
}

pub fn compare(sc: &Scenario) -> Result<ComparisonReport> {
    let (sol, _) = solve(sc)?;
    let values = invert_grid(sc, &sol)?;
    let sims = simulate(sc)?;
    let rows: Vec<ComparisonRow> = values
        .iter()
        .zip(&sims)
        .map(|(&(x, v), s)| {
            let sd = s.estimate.half_width / 1.96;
            let z = if sd > 0.0 { (v - s.estimate.mean) / sd } else if (v - s.estimate.mean).abs() < 1e-9 { 0.0 } else { f64::INFINITY };
            ComparisonRow {
                x,
                transform: v,
                mc_mean: s.estimate.mean,
                mc_half_width: s.estimate.half_width,
                z,
                censored_fraction: s.estimate.censored_fraction,
            }
        })
        .collect();
    let verdict = ComparisonReport::verdict_of(&rows);
    Ok(ComparisonReport { stamp: stamp(sc), rows, verdict })
}

fn stamp(sc: &Scenario) -> Stamp {
    Stamp { scenario_hash: sc.hash(), seed: sc.mc.seed }
}

#[derive(Debug, Parser)]
#[command(name = "dualrisk", about = "Ruin probabilities and ruin-time transforms for dual risk models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML, or JSON).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Directory for the output artifact.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo paths per grid point.
    #[arg(long = "mc-n", global = true)]
    pub mc_n: Option<u64>,
    /// Truncation tolerance of the lattice series.
    #[arg(long = "depth-tol", global = true)]
    pub depth_tol: Option<f64>,
    /// Terms of the inversion formula.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Resolve the unknown boundary values; writes solve.json.
    Solve,
    /// Invert the transform on the grid; writes invert.csv.
    Invert,
    /// Monte Carlo estimates on the grid; writes simulate.json.
    Simulate,
    /// Transform against Monte Carlo; writes compare.json.
    Compare,
    /// Right-half-plane roots of the divisor; writes roots.json.
    Roots,
    /// Run the acceptance checks; writes selfcheck.json.
    Selfcheck,
}

impl Cli {
    fn scenario(&self) -> Result<Scenario> {
        let path = self.scenario.as_ref().ok_or_else(|| Error::Parse("--scenario is required".into()))?;
        let mut sc = Scenario::load(path)?;
        if let Some(seed) = self.seed {
            sc.mc.seed = seed;
        }
        if let Some(n) = self.mc_n {
            sc.mc.n = n;
        }
        if let Some(t) = self.depth_tol {
            sc.solver.depth_tol = t;
        }
        if let Some(t) = self.terms {
            sc.inversion.terms = t;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

/// Run one command; returns the process exit code on success.
pub fn execute(cli: &Cli) -> Result<i32> {
    if cli.command == Command::Selfcheck {
        let defaults = SelfcheckOptions::default();
        let opts = SelfcheckOptions { mc_n: cli.mc_n.unwrap_or(defaults.mc_n), seed: cli.seed.unwrap_or(defaults.seed) };
        let checks = selfcheck::run_all(&opts);
        for c in &checks {
            println!("{} criterion {}: {} ({:.1}s) {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.seconds, c.detail);
        }
        let failed = checks.iter().any(|c| !c.passed);
        write_json(&cli.out, "selfcheck.json", &SelfcheckReport { seed: opts.seed, mc_n: opts.mc_n, checks })?;
        return Ok(failed as i32);
    }

    let sc = cli.scenario()?;
    let st = stamp(&sc);
    let path = match cli.command {
        Command::Solve => {
            let (sol, roots) = solve(&sc)?;
            let mut eq: f64 = 0.0;
            for s in [Complex64::new(0.5, 0.0), Complex64::new(1.0, 1.0), Complex64::new(3.0, -2.0)] {
                eq = eq.max(equation_residual(&sol, s)?.norm());
            }
            let unknowns = sol
                .system
                .unknowns
                .iter()
                .zip(&sol.resolved_unknowns)
                .map(|(d, u)| UnknownValue { label: d.label.clone(), re: u.re, im: u.im })
                .collect();
            let jet = rho_jet(&sol, Complex64::new(1.0, 0.0), sc.solver.jet_order)?;
            let derivatives_at_one = (0..=sc.solver.jet_order)
                .map(|l| {
                    let d = jet.derivative(l);
                    UnknownValue { label: format!("rho^({l})(1)"), re: d.re, im: d.im }
                })
                .collect();
            let report = SolveReport {
                stamp: st,
                model: sc.model.kind(),
                functional: sc.functional,
                unknowns,
                collocation_residual: sol.residual,
                tail_bound: sol.tail_bound,
                equation_residual: eq,
                derivatives_at_one,
                roots,
            };
            println!("{}: {} unknowns, collocation residual {:.2e}", report.model, report.unknowns.len(), report.collocation_residual);
            write_json(&cli.out, "solve.json", &report)?
        }
        Command::Invert => {
            let (sol, _) = solve(&sc)?;
            let rows = invert_grid(&sc, &sol)?;
            fs::create_dir_all(&cli.out)?;
            let path = cli.out.join("invert.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Parse(e.to_string()))?;
            w.write_record(["x", "value", "scenario_hash", "seed"]).map_err(|e| Error::Parse(e.to_string()))?;
            for (x, v) in rows {
                println!("{x}\t{v:.8}");
                w.write_record([x.to_string(), format!("{v:.12}"), st.scenario_hash.clone(), st.seed.to_string()])
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
            w.flush()?;
            path
        }
        Command::Simulate => {
            let results = simulate(&sc)?;
            for r in &results {
                println!("{}\t{:.6} +- {:.6}", r.x, r.estimate.mean, r.estimate.half_width);
            }
            write_json(&cli.out, "simulate.json", &SimulationReport { stamp: st, functional: sc.functional, results })?
        }
        Command::Compare => {
            let report = compare(&sc)?;
            for r in &report.rows {
                println!("{}\t{:.6}\t{:.6} +- {:.6}\tz={:.2}", r.x, r.transform, r.mc_mean, r.mc_half_width, r.z);
            }
            println!("{}", if report.verdict == Verdict::Pass { "PASS" } else { "FAIL" });
            let code = (report.verdict == Verdict::Fail) as i32;
            write_json(&cli.out, "compare.json", &report)?;
            return Ok(code);
        }
        Command::Roots => {
            let asm = assemble(&sc.model, sc.functional.alpha(), &BuildOptions { uniform_nodes: sc.solver.uniform_nodes })?;
            let certificate = asm.certificate.unwrap_or(RootCertificate {
                roots: Vec::new(),
                expected_count: 0,
                winding_number: 0,
                residuals: Vec::new(),
            });
            println!("{} roots in the right half-plane", certificate.roots.len());
            write_json(&cli.out, "roots.json", &RootsReport { stamp: st, certificate })?
        }
        Command::Selfcheck => unreachable!("handled above"),
    };
    log::info!("wrote {}", path.display());
    Ok(0)
}

/// Parse arguments, run, and map errors to exit codes.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
