//! The acceptance suite as a library: each check runs a property or oracle
//! comparison and reports pass/fail with a one-line detail. Used by the
//! `selfcheck` command and by the acceptance test binary.

use crate::catalog;
use crate::copulas::{gz_star, h_star};
use crate::distributions::{InterarrivalSpec, PhaseDist};
use crate::error::{Error, Result};
use crate::feq::{
    equation_residual, lattice_coefficients, rho_eval, rho_jet, solve_unknowns, AffineMap, FeqSystem, JetFn,
};
use crate::inversion::{invert, invert_probability, InversionParams};
use crate::models::{
    assemble, build_ruin_system, build_time_system, causal_weights, BuildOptions, GfgmAdditive, GfgmGain, ModelSpec,
    TargetFunctional,
};
use crate::numerics::Jet;
use crate::simulator::{estimate, PathCaps};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

type C64 = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SelfcheckOptions {
    /// Paths per Monte Carlo estimate.
    pub mc_n: u64,
    pub seed: u64,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions { mc_n: 1_000_000, seed: 20_240_601 }
    }
}

type Check = fn(&SelfcheckOptions) -> Result<(bool, String)>;

const CHECKS: [(u32, &str, Check, f64); 8] = [
    (1, "functional-equation residuals", residual_suite, 60.0),
    (2, "solver vs simulator", solver_vs_simulator, 600.0),
    (3, "ruin-time transform", ruin_time, f64::INFINITY),
    (4, "reduction identities", reductions, f64::INFINITY),
    (5, "root certificates", root_certificates, 30.0),
    (6, "lattice vs word enumeration", lattice_vs_words, f64::INFINITY),
    (7, "derivative collocation", derivative_collocation, f64::INFINITY),
    (8, "analytical limits", analytical_limits, f64::INFINITY),
];

/// Run every check in order.
pub fn run_all(opts: &SelfcheckOptions) -> Vec<CheckResult> {
    CHECKS.iter().map(|c| run_one(c, opts)).collect()
}

/// Run the check with the given id.
pub fn run(id: u32, opts: &SelfcheckOptions) -> Option<CheckResult> {
    CHECKS.iter().find(|c| c.0 == id).map(|c| run_one(c, opts))
}

fn run_one(&(id, name, check, budget): &(u32, &'static str, Check, f64), opts: &SelfcheckOptions) -> CheckResult {
    let t = Instant::now();
    let (mut passed, mut detail) = match check(opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = t.elapsed().as_secs_f64();
    if seconds > budget {
        passed = false;
        detail = format!("{detail}; took {seconds:.1}s, budget {budget}s");
    }
    CheckResult { id, name, passed, detail, seconds }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn b_exp(rate: f64) -> InterarrivalSpec {
    InterarrivalSpec::Phase(PhaseDist::exponential(rate).expect("positive rate"))
}

/// Points with real part in `[0.1, 5]` and imaginary part in `[-5, 5]`.
pub fn random_points(seed: u64, n: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| c(0.1 + 4.9 * rng.random::<f64>(), -5.0 + 10.0 * rng.random::<f64>())).collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Largest relative difference between two systems' maps, unknown points and
/// equation jets at `points`; infinite when their shapes differ.
pub fn system_distance(x: &FeqSystem, y: &FeqSystem, points: &[C64]) -> Result<f64> {
    if x.maps.len() != y.maps.len() || x.unknowns.len() != y.unknowns.len() {
        return Ok(f64::INFINITY);
    }
    let mut d: f64 = 0.0;
    for (m, n) in x.maps.iter().zip(&y.maps) {
        d = d.max((m.scale - n.scale).abs()).max((m.shift - n.shift).norm());
    }
    for (u, v) in x.unknowns.iter().zip(&y.unknowns) {
        if u.derivative_order != v.derivative_order {
            return Ok(f64::INFINITY);
        }
        d = d.max((u.point - v.point).norm());
    }
    for &s in points {
        let j = Jet::var(s, 2);
        let (ex, ey) = ((x.eval)(&j)?, (y.eval)(&j)?);
        if ex.hk.len() != ey.hk.len() {
            return Ok(f64::INFINITY);
        }
        let pairs = ex.coeffs.iter().zip(&ey.coeffs).chain([(&ex.h0, &ey.h0)]).chain(ex.hk.iter().zip(&ey.hk));
        for (p, q) in pairs {
            for k in 0..=2 {
                d = d.max(rel(p.coeff(k), q.coeff(k)));
            }
        }
    }
    Ok(d)
}

fn residual_suite(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let mut worst: (f64, &str) = (0.0, "");
    for spec in catalog::variants() {
        let sol = solve_unknowns(&build_ruin_system(&spec)?)?;
        for s in random_points(11, 20) {
            let r = equation_residual(&sol, s)?.norm();
            if r > worst.0 {
                worst = (r, spec.kind());
            }
        }
    }
    Ok((worst.0 < 1e-6, format!("9 variants x 20 points, max residual {:.2e} ({})", worst.0, worst.1)))
}

/// z-score of a transform value against a Monte Carlo estimate.
fn z_score(value: f64, mean: f64, half_width: f64) -> f64 {
    let sd = half_width / 1.96;
    if sd > 0.0 {
        (value - mean) / sd
    } else if (value - mean).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn solver_vs_simulator(opts: &SelfcheckOptions) -> Result<(bool, String)> {
    let xs = [0.5, 1.0, 2.0, 4.0];
    let params = InversionParams::default();
    let (mut ok, mut total, mut worst) = (0, 0, 0.0f64);
    for (name, spec) in catalog::calibration() {
        let sol = solve_unknowns(&build_ruin_system(&spec)?)?;
        for x in xs {
            let r = invert_probability(|s| rho_eval(&sol, s), x, &params, &[])?;
            let mc = estimate(&spec, x, &TargetFunctional::RuinProbability, opts.mc_n, &PathCaps::for_capital(x), opts.seed)?;
            let z = z_score(r, mc.mean, mc.half_width);
            log::info!("{name} x={x}: transform {r:.6}, mc {:.6} +- {:.6}, z {z:.2}", mc.mean, mc.half_width);
            total += 1;
            ok += (z.abs() <= 3.0 && !mc.flagged) as usize;
            worst = worst.max(z.abs());
        }
    }
    Ok((ok as f64 >= 0.95 * total as f64, format!("{ok}/{total} points within 3 half-widths, max |z| {worst:.2}")))
}

fn ruin_time(opts: &SelfcheckOptions) -> Result<(bool, String)> {
    let specs: Vec<ModelSpec> =
        catalog::variants().into_iter().filter(|s| matches!(s.kind(), "fgm_proportional" | "linear_dependence")).collect();
    let params = InversionParams::default();
    let (mut ok, mut total, mut worst) = (0, 0, 0.0f64);
    let mut identity: f64 = 0.0;
    for spec in &specs {
        identity = identity.max(system_distance(
            &build_ruin_system(spec)?,
            &build_time_system(spec, c(0.0, 0.0))?,
            &random_points(2, 10),
        )?);
        for alpha in [0.5, 1.0] {
            let f = TargetFunctional::RuinTimeLst { alpha, alpha_im: 0.0 };
            let sol = solve_unknowns(&build_time_system(spec, f.alpha())?)?;
            for x in [0.5, 1.0, 2.0] {
                let v = invert(|s| rho_eval(&sol, s), x, &params)?;
                let mc = estimate(spec, x, &f, opts.mc_n, &PathCaps::for_capital(x), opts.seed)?;
                let z = z_score(v, mc.mean, mc.half_width);
                total += 1;
                ok += (z.abs() <= 3.0) as usize;
                worst = worst.max(z.abs());
            }
        }
    }
    Ok((
        ok == total && identity < 1e-12,
        format!("{ok}/{total} within 3 half-widths (max |z| {worst:.2}); alpha=0 vs ruin system {identity:.1e}"),
    ))
}

fn reductions(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let pts = random_points(3, 10);
    let b = b_exp(1.0);
    let fgm = |theta: f64, n: u32, mu: f64, a: f64| ModelSpec::FgmProportional { interarrival: b.clone(), n, mu, theta, a };
    let pairs: Vec<(&str, ModelSpec, ModelSpec, f64)> = vec![
        (
            "p=1",
            ModelSpec::FgmMixture { interarrival: b.clone(), p: 1.0, a: 0.5, n: 2, mu: 1.5, theta1: 0.4, m: 1, nu: 2.0, theta2: -0.3 },
            fgm(0.4, 2, 1.5, 0.5),
            0.0,
        ),
        (
            "q=0",
            ModelSpec::TwoSided {
                interarrival: b.clone(),
                p: 1.0,
                k: vec![1.0],
                a: vec![0.25],
                m: vec![1.0],
                beta: vec![0.5],
                mu: 0.8,
                nu: 2.0,
            },
            fgm(0.0, 1, 0.8, 0.25),
            0.0,
        ),
        (
            "theta=0",
            ModelSpec::CausalProportional {
                interarrival: b.clone(),
                threshold: b_exp(0.7),
                a0: 0.5,
                a1: 0.5,
                c0: PhaseDist::exponential(1.5)?,
                c1: PhaseDist::exponential(1.5)?,
            },
            fgm(0.0, 1, 1.5, 0.5),
            0.0,
        ),
        (
            "theta=0 (gfgm)",
            ModelSpec::GfgmProportional { interarrival: b.clone(), mu: 1.5, theta: 0.0, k: 2, b: 1, c: 1, d: 2, a: 0.5 },
            fgm(0.0, 1, 1.5, 0.5),
            0.0,
        ),
        ("c=0", ModelSpec::LinearDependence { lambda: 1.0, mu: 0.9, theta: -0.4, a: 0.5, c: 0.0 }, fgm(-0.4, 1, 0.9, 0.5), 0.0),
        (
            "a=0",
            ModelSpec::FgmMixture { interarrival: b.clone(), p: 0.3, a: 0.0, n: 1, mu: 1.2, theta1: 0.0, m: 1, nu: 1.2, theta2: 0.0 },
            ModelSpec::LinearDependence { lambda: 1.0, mu: 1.2, theta: 0.0, a: 0.0, c: 0.0 },
            0.5,
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, x, y, alpha) in &pairs {
        let a = c(*alpha, 0.0);
        let d = system_distance(&build_time_system_any(x, a)?, &build_time_system_any(y, a)?, &pts)?;
        if d >= 1e-12 {
            notes.push(format!("{name}: {d:.1e}"));
        }
        worst = worst.max(d);
    }
    // Busy-period oracle.
    let mut takacs: f64 = 0.0;
    for (lambda, mu, alpha) in [(2.0, 1.0, 0.5), (0.8, 1.0, 1.0)] {
        let spec = ModelSpec::LinearDependence { lambda, mu, theta: 0.0, a: 0.0, c: 0.0 };
        let sol = solve_unknowns(&assemble(&spec, c(alpha, 0.0), &BuildOptions::default())?.system)?;
        let bq = mu - lambda - alpha;
        let eta = 0.5 * (-bq + (bq * bq + 4.0 * alpha * mu).sqrt());
        for s in [0.5, 1.0, 2.0] {
            takacs = takacs.max((rho_eval(&sol, c(s, 0.0))? - 1.0 / (s + eta)).norm());
        }
    }
    Ok((
        worst < 1e-12 && takacs < 1e-8,
        format!("{} reductions, max distance {worst:.1e} {notes:?}; busy period error {takacs:.1e}", pairs.len()),
    ))
}

/// The time system where supported, the ruin system when `alpha = 0`.
fn build_time_system_any(spec: &ModelSpec, alpha: C64) -> Result<FeqSystem> {
    Ok(assemble(spec, alpha, &BuildOptions::default())?.system)
}

fn root_certificates(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let b = b_exp(1.0);
    let mut cases: Vec<(String, ModelSpec, f64, usize)> = Vec::new();
    for m in [1u32, 2] {
        cases.push((
            format!("fgm mixture m={m}"),
            ModelSpec::FgmMixture { interarrival: b.clone(), p: 0.6, a: 0.5, n: 1, mu: 1.0, theta1: 0.3, m, nu: 1.5, theta2: 0.4 },
            0.0,
            3 * m as usize - 1,
        ));
    }
    for c2 in [1u32, 2] {
        cases.push((
            format!("gfgm mixture c2={c2}"),
            ModelSpec::GfgmMixture {
                interarrival: b.clone(),
                p: 0.6,
                a: 0.5,
                gfgm1: GfgmGain { mu: 1.0, theta: 0.5, k: 1, b: 1, c: 1, d: 1 },
                gfgm2: GfgmAdditive { nu: 1.5, theta: 0.4, k: 1, b: 1, c: c2, d: 2 },
            },
            0.0,
            c2 as usize + 2,
        ));
    }
    cases.push((
        "linear dependence busy period".into(),
        ModelSpec::LinearDependence { lambda: 1.0, mu: 1.5, theta: 0.5, a: 0.0, c: 0.0 },
        0.5,
        2,
    ));
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, spec, alpha, expected) in &cases {
        let cert = assemble(spec, c(*alpha, 0.0), &BuildOptions::default())?
            .certificate
            .ok_or_else(|| Error::Domain(format!("{name}: no root equations")))?;
        worst = cert.residuals.iter().fold(worst, |a, r| a.max(*r));
        if cert.roots.len() != *expected || cert.winding_number != *expected as i64 || cert.residuals.iter().any(|r| *r >= 1e-8) {
            bad.push(format!("{name}: {} roots, winding {}", cert.roots.len(), cert.winding_number));
        }
    }
    Ok((bad.is_empty(), format!("{} cases, max residual {worst:.1e} {bad:?}", cases.len())))
}

/// Multi-index coefficients by enumerating every word of length `depth`.
pub fn word_enumeration(sys: &FeqSystem, s: C64, depth: usize) -> Result<BTreeMap<Vec<u32>, C64>> {
    let m = sys.maps.len();
    let mut out = BTreeMap::new();
    for w in 0..m.pow(depth as u32) {
        let (mut p, mut g, mut code) = (s, c(1.0, 0.0), w);
        let mut idx = vec![0u32; m];
        for _ in 0..depth {
            let l = code % m;
            code /= m;
            g *= (sys.eval)(&Jet::constant(p, p, 0))?.coeffs[l].value();
            p = sys.maps[l].apply(p);
            idx[l] += 1;
        }
        *out.entry(idx).or_insert(c(0.0, 0.0)) += g;
    }
    Ok(out)
}

fn pole(k: f64, p: f64) -> JetFn {
    Arc::new(move |s: &Jet| Ok(s.add_scalar(c(p, 0.0)).recip().scale_re(k)))
}

fn lattice_vs_words(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let two = FeqSystem::from_parts(
        "two maps",
        vec![(pole(0.6, 2.0), AffineMap::scaling(0.5)), (pole(0.5, 3.0), AffineMap::scaling(1.0 / 3.0))],
        pole(1.0, 1.0),
        vec![],
        vec![],
    );
    let three = FeqSystem::from_parts(
        "three maps",
        vec![
            (pole(0.4, 2.0), AffineMap::scaling(0.8)),
            (pole(0.3, 1.5), AffineMap::scaling(0.5)),
            (pole(0.2, 4.0), AffineMap::scaling(0.25)),
        ],
        pole(1.0, 1.0),
        vec![],
        vec![],
    );
    let mut worst: f64 = 0.0;
    for sys in [&two, &three] {
        for s in random_points(6, 10) {
            let lat = lattice_coefficients(sys, s, 6, 0)?;
            for depth in 0..=6 {
                for (idx, g) in word_enumeration(sys, s, depth)? {
                    let got = lat.get(&idx).map(|j| j.value()).unwrap_or(c(f64::NAN, 0.0));
                    worst = worst.max((got - g).norm() / (1.0 + g.norm()));
                }
            }
        }
    }
    Ok((worst <= 1e-9, format!("2 systems x 10 points, depths 0..=6, max error {worst:.1e}")))
}

fn derivative_collocation(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let mu = 2.0;
    let spec = ModelSpec::FgmProportional { interarrival: b_exp(1.0), n: 2, mu, theta: -0.5, a: 0.5 };
    let sol = solve_unknowns(&build_ruin_system(&spec)?)?;
    let jet = rho_jet(&sol, c(mu, 0.0), 3)?;
    let h = 0.005;
    let f = |k: f64| rho_eval(&sol, c(mu + k * h, 0.0)).map(|v| v.re);
    let (m2, m1, z, p1, p2) = (f(-2.0)?, f(-1.0)?, f(0.0)?, f(1.0)?, f(2.0)?);
    let fd = [
        z,
        (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
        (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h),
        (-m2 + 2.0 * m1 - 2.0 * p1 + p2) / (2.0 * h * h * h),
    ];
    let worst = fd.iter().enumerate().map(|(l, d)| (jet.derivative(l).re - d).abs() / jet.derivative(l).norm()).fold(0.0, f64::max);
    Ok((worst < 1e-4, format!("rho^(l)(mu), l<=3, max relative deviation {worst:.1e}")))
}

fn analytical_limits(_: &SelfcheckOptions) -> Result<(bool, String)> {
    let a = 1.5;
    let mut lim_err: f64 = 0.0;
    for spec in [
        ModelSpec::FgmProportional { interarrival: b_exp(1.0), n: 1, mu: 1.0, theta: 0.5, a },
        ModelSpec::GfgmProportional { interarrival: b_exp(1.0), mu: 1.0, theta: 0.5, k: 1, b: 2, c: 2, d: 1, a },
    ] {
        let sys = build_ruin_system(&spec)?;
        let mut s = c(1.0, 0.5);
        for _ in 0..30 {
            s = sys.maps[0].apply(s);
        }
        let coef = (sys.eval)(&Jet::var(s, 0))?.coeffs[0].value();
        lim_err = lim_err.max((coef - 1.0 / (1.0 + a)).norm());
    }
    let guard = matches!(
        build_ruin_system(&ModelSpec::UniformProportional { interarrival: b_exp(1.0), mu: 1.0, a: 0.1, b: 3.0 }),
        Err(Error::ConvergenceGuard(_))
    );
    let b = InterarrivalSpec::Phase(PhaseDist::erlang(2, 1.5)?);
    let h0 = h_star(&b, c(0.0, 0.0), 0)?.value().norm();
    let g0 = (gz_star(&b, 1, 2, c(0.0, 0.0), 0)?.value() - 1.0).norm();
    let (w0, w1) = causal_weights(&b, &b_exp(0.7));
    let mut chi: f64 = 0.0;
    for s in random_points(17, 10) {
        chi = chi.max((w0.lt(s) + w1.lt(s) - b.lst_jet(s, 0)?.value()).norm());
    }
    let passed = lim_err < 1e-10 && guard && h0 < 1e-10 && g0 < 1e-10 && chi < 1e-10;
    Ok((
        passed,
        format!("limit error {lim_err:.1e}, guard {guard}, h*(0) {h0:.1e}, g_Z*(0)-1 {g0:.1e}, chi0+chi1-phi {chi:.1e}"),
    ))
}
