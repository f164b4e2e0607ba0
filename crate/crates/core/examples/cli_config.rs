//! Runs a scenario from a JSON configuration, as the binary does, into a temporary directory.

use plateau_hyp::cli::{parse_config, run_scenario, Mode};

const CONFIG: &str = r#"{
    "H": 0.25,
    "boundary": {"kind": "sinusoid_decay", "amplitude": 0.1, "period": 0.5, "decay": 0.4, "offset": 0.4},
    "domain": {"L": 1.0, "y_min": 0.05, "y_max": 1.0},
    "grid": 33,
    "solver": {"tol": 1e-9}
}"#;

fn main() -> plateau_hyp::Result<()> {
    let cfg = parse_config(CONFIG, Some(Mode::SolveAsymptotic))?;
    let dir = tempfile::tempdir()?;
    let (report, artifacts) = run_scenario(&cfg, dir.path())?;
    for check in &report.checks {
        println!("{:?} {} {:.3e}", check.status, check.name, check.value);
    }
    for file in &artifacts.files {
        println!("wrote {}", file.file_name().unwrap().to_string_lossy());
    }
    Ok(())
}
