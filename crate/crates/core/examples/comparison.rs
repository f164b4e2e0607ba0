//! Ordered asymptotic data produce ordered Perron solutions.

use plateau_hyp::perron::{comparison_check, run_asymptotic_solve, AsymptoticSetup, BoundaryDatum, PerronConfig};

fn main() -> plateau_hyp::Result<()> {
    let lower = BoundaryDatum::Bump { center: vec![0.0], height: 0.3, width: 0.25, base: 0.2 };
    let upper = BoundaryDatum::Shifted { datum: Box::new(lower.clone()), by: 0.1 };
    let setup = AsymptoticSetup { c_max: Some(upper.c_max()), ..AsymptoticSetup::new(2, -0.2, 1.0, 0.05, 1.0, 33) };
    let cfg = PerronConfig::default();
    let (u1, _, _) = run_asymptotic_solve(&lower, &setup, &cfg)?;
    let (u2, _, _) = run_asymptotic_solve(&upper, &setup, &cfg)?;
    let report = comparison_check(&u1, &u2, cfg.tol)?;
    println!("max (u1 − u2)⁺ = {:.2e} against {:.1e}: {}", report.max_positive_part, report.tolerance, report.pass);
    Ok(())
}
