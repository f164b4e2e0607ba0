use std::path::Path;
use std::process::Command;

use plateau_hyp::cli::{parse_config, read_grid_csv, Mode};
use plateau_hyp::operator::DiscreteOperator;
use plateau_hyp::solver::{solve_dirichlet, DirichletProblem, Domain, InitialGuess, SolverConfig};
use plateau_hyp::{fix_orientation_sign, Grid, GridFunction};

fn run(mode: &str, config: &str, dir: &Path, extra: &[&str]) -> i32 {
    let path = dir.join(format!("{mode}.json"));
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_plateau-hyp"))
        .arg(mode)
        .arg("--config")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    out.status.code().unwrap()
}

const DIRICHLET: &str = r#"{"H": 0.5, "exact": {"family": "tilted_plane", "a": 0.5773502691896258, "b": 0.2},
    "domain": {"L": 0.5, "y_min": 0.2, "y_max": 1.2}, "grid": 17, "solver": {"tol": 1e-10}}"#;

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve-asymptotic", r#"{"H": 1.0}"#, dir.path(), &[]), 2);
    assert_eq!(run("solve-asymptotic", r#"{"H": 0.2, "gird": 33}"#, dir.path(), &[]), 2);
    assert_eq!(run("solve-asymptotic", r#"{"grid": 9}"#, dir.path(), &[]), 2);
    assert_eq!(run("solve-asymptotic", r#"{"domain": {"y_min": 0.0}}"#, dir.path(), &[]), 2);
    assert_eq!(run("barrier", r#"{"l": 1.0"#, dir.path(), &[]), 2);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn exhausted_newton_budget_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DIRICHLET.replace(r#""tol": 1e-10"#, r#""tol": 1e-10, "max_iters": 1"#);
    assert_eq!(run("solve-dirichlet", &cfg, dir.path(), &[]), 3);
}

#[test]
fn failed_checks_exit_with_four_and_carry_their_values() {
    let dir = tempfile::tempdir().unwrap();
    // Five nodes per axis are far from the asymptotic regime of the order test.
    assert_eq!(run("verify-exact", r#"{"grid": 5}"#, dir.path(), &[]), 4);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    let failed: Vec<_> = report["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| c["value"].is_number() && c["tolerance"].is_number()));
}

#[test]
fn dirichlet_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve-dirichlet", DIRICHLET, dir.path(), &[]), 0);
    let out = dir.path().join("out");

    let cfg = parse_config(DIRICHLET, Some(Mode::SolveDirichlet)).unwrap();
    let grid = Grid::chart_box(2, 0.5, 0.2, 1.2, 17).unwrap();
    let family = cfg.exact.unwrap();
    let data = GridFunction::try_sample(grid.clone(), |z| family.value(z)).unwrap();
    let op = DiscreteOperator::new(&grid, cfg.structure, cfg.h, fix_orientation_sign().unwrap()).unwrap();
    let p = DirichletProblem::new(op, &Domain::Box).unwrap();
    let solver = SolverConfig { tol: 1e-10, ..SolverConfig::default() };
    let (u, _) = solve_dirichlet(&p, &data, InitialGuess::Harmonic, &solver).unwrap();

    let (header, rows) = read_grid_csv(&std::fs::read(out.join("solution.csv")).unwrap()).unwrap();
    assert_eq!(header, ["x1", "y", "u"]);
    assert_eq!(rows.len(), grid.len());
    for (k, row) in rows.iter().enumerate() {
        let z = grid.coords(k);
        assert_eq!((row[0], row[1]), (z[0], z[1]));
        assert_eq!(row[2].to_bits(), u.values[k].to_bits(), "node {k}");
    }

    let obj = std::fs::read_to_string(out.join("graph.obj")).unwrap();
    let vertices: Vec<Vec<f64>> = obj
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| l.split(' ').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(vertices.len(), 17 * 17);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 16 * 16);
    // Parabolic graphs put u in the first coordinate over the chart point.
    for (k, v) in vertices.iter().enumerate() {
        let z = grid.coords(k);
        assert_eq!(v, &vec![u.values[k], z[0], z[1]]);
    }

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    for check in report["checks"].as_array().unwrap() {
        for key in ["name", "status", "value", "tolerance", "anchor"] {
            assert!(check.get(key).is_some(), "{key} missing in {check}");
        }
    }
    assert_eq!(report["config"]["grid"], 17);
}

fn without_runtime(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("runtime_seconds");
    v
}

#[test]
fn identical_runs_are_byte_identical() {
    let cfg = r#"{"H": 0.3, "boundary": {"kind": "bump", "center": [0.2], "height": 0.3, "width": 0.3, "base": 0.2},
        "grid": 17, "solver": {"shuffle": true}}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run("solve-asymptotic", cfg, a.path(), &["--seed", "11", "--threads", "1"]), 0);
    assert_eq!(run("solve-asymptotic", cfg, b.path(), &["--seed", "11", "--threads", "1"]), 0);
    for f in ["solution.csv", "graph.obj"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let ra = without_runtime(&std::fs::read(a.path().join("out/report.json")).unwrap());
    let rb = without_runtime(&std::fs::read(b.path().join("out/report.json")).unwrap());
    assert_eq!(ra, rb);
    assert_eq!(ra["config"]["seed"], 11);
}

#[test]
fn barrier_mode_writes_levels_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("barrier", r#"{"l": 1.0}"#, dir.path(), &[]), 0);
    let out = dir.path().join("out");
    let (header, levels) = read_grid_csv(&std::fs::read(out.join("levels.csv")).unwrap()).unwrap();
    assert_eq!(header, ["k", "t_k", "R_k"]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let k = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "K").unwrap()["value"].as_f64().unwrap();
    assert_eq!(levels.len(), k as usize + 1);
    assert_eq!(levels[0][1], -(0.5 * report["details"]["stack"]["alpha"].as_f64().unwrap()).sin());
    let (_, profile) = read_grid_csv(&std::fs::read(out.join("profile.csv")).unwrap()).unwrap();
    assert!(profile.iter().all(|r| r[1] >= 0.0));
    assert_eq!(profile.last().unwrap()[1], 0.0);
}
