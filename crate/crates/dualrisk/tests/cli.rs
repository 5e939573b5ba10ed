//! Scenario files and the command-line front end.

use dualrisk::catalog;
use dualrisk::cli::{self, Scenario};
use dualrisk::models::TargetFunctional;
use dualrisk::Error;
use std::path::{Path, PathBuf};

fn scenario_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

fn out_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dualrisk-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str]) -> i32 {
    cli::main(std::iter::once("dualrisk").chain(args.iter().copied()))
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn every_variant_round_trips_through_toml() {
    for spec in catalog::variants() {
        for functional in [TargetFunctional::RuinProbability, TargetFunctional::RuinTimeLst { alpha: 0.75, alpha_im: 0.0 }] {
            let sc = Scenario {
                model: spec.clone(),
                functional,
                x_grid: vec![0.5, 1.0, 2.5],
                solver: Default::default(),
                inversion: Default::default(),
                mc: Default::default(),
            };
            let text = sc.to_toml().unwrap();
            let back = Scenario::parse(&text).unwrap();
            assert_eq!(back, sc, "{text}");
            assert_eq!(back.hash(), sc.hash());
            assert_eq!(back.to_toml().unwrap(), text);
        }
    }
}

#[test]
fn shipped_scenarios_parse_and_hash_distinctly() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut hashes = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        match Scenario::load(&path) {
            Ok(sc) => hashes.push(sc.hash()),
            Err(e) => assert!(path.ends_with("uniform_unstable.toml") && matches!(e, Error::ConvergenceGuard(_)), "{e}"),
        }
    }
    let n = hashes.len();
    hashes.sort();
    hashes.dedup();
    assert!(n >= 5 && hashes.len() == n);
}

#[test]
fn json_scenarios_are_accepted() {
    let sc = Scenario::load(Path::new(&scenario_path("causal.toml"))).unwrap();
    let json = serde_json::to_string(&sc).unwrap();
    assert_eq!(Scenario::parse(&json).unwrap(), sc);
}

#[test]
fn malformed_scenarios_are_parse_errors() {
    assert!(matches!(Scenario::parse("x_grid = [1.0]\n[model]\ntype = \"nope\""), Err(Error::Parse(_))));
    assert!(matches!(Scenario::parse("x_grid = ["), Err(Error::Parse(_))));
    let sc = Scenario::load(Path::new(&scenario_path("causal.toml"))).unwrap();
    let text = sc.to_toml().unwrap().replace("x_grid = [0.5, 1.0, 2.0, 3.0]", "x_grid = [1.0, 0.5]");
    assert!(matches!(Scenario::parse(&text), Err(Error::InvalidParameter(_))));
}

#[test]
fn compare_passes_for_independent_exponential_model() {
    let out = out_dir("compare");
    let code = run(&["compare", "--scenario", &scenario_path("fgm_independent.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = read_json(out.join("compare.json"));
    assert_eq!(report["verdict"], "PASS");
    assert_eq!(report["seed"], 7);
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn seed_and_path_count_flags_override_the_file() {
    let out = out_dir("simulate");
    let code = run(&[
        "simulate",
        "--scenario",
        &scenario_path("two_sided.toml"),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
        "--mc-n",
        "2000",
    ]);
    assert_eq!(code, 0);
    let report = read_json(out.join("simulate.json"));
    assert_eq!(report["seed"], 99);
    assert_eq!(report["results"][0]["n"], 2000);
}

#[test]
fn invert_writes_stamped_csv() {
    let out = out_dir("invert");
    assert_eq!(run(&["invert", "--scenario", &scenario_path("causal.toml"), "--out", out.to_str().unwrap(), "--terms", "30"]), 0);
    let text = std::fs::read_to_string(out.join("invert.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,value,scenario_hash,seed");
    assert_eq!(lines.len(), 5);
    let values: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn busy_period_scenario_has_two_certified_roots() {
    let out = out_dir("roots");
    assert_eq!(run(&["roots", "--scenario", &scenario_path("busy_period.toml"), "--out", out.to_str().unwrap()]), 0);
    let report = read_json(out.join("roots.json"));
    assert_eq!(report["certificate"]["roots"].as_array().unwrap().len(), 2);
    assert_eq!(report["certificate"]["winding_number"], 2);
}

#[test]
fn solve_reports_requested_derivatives() {
    let out = out_dir("solve");
    let path = scenario_path("linear_time.toml");
    let sc = Scenario::load(Path::new(&path)).unwrap();
    let mut sc3 = sc.clone();
    sc3.solver.jet_order = 3;
    let file = out.with_extension("toml");
    std::fs::write(&file, sc3.to_toml().unwrap()).unwrap();
    assert_eq!(run(&["solve", "--scenario", file.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let report = read_json(out.join("solve.json"));
    assert_eq!(report["derivatives_at_one"].as_array().unwrap().len(), 4);
    assert!(report["equation_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["scenario_hash"], sc3.hash());
}

#[test]
fn exit_codes_follow_error_classes() {
    let out = out_dir("codes");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["solve", "--scenario", &scenario_path("uniform_unstable.toml"), "--out", o]), 3);
    assert_eq!(run(&["solve", "--scenario", "/does/not/exist.toml", "--out", o]), 2);
    assert_eq!(run(&["solve", "--scenario", &scenario_path("causal.toml"), "--out", o, "--terms", "4"]), 2);
    assert_eq!(run(&["solve", "--scenario", &scenario_path("causal.toml"), "--out", o, "--depth-tol=-1"]), 2);
    assert_eq!(run(&["solve", "--out", o]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    // Ruin-time transform for a two-sided model is not available.
    let sc = Scenario::load(Path::new(&scenario_path("two_sided.toml"))).unwrap();
    let sc = Scenario { functional: TargetFunctional::RuinTimeLst { alpha: 0.5, alpha_im: 0.0 }, ..sc };
    let file = out_dir("two-sided-time").with_extension("toml");
    std::fs::write(&file, sc.to_toml().unwrap()).unwrap();
    assert_eq!(run(&["solve", "--scenario", file.to_str().unwrap(), "--out", o]), 3);
}
