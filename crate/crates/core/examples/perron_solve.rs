//! Perron iteration for asymptotic data given by a smooth step.

use plateau_hyp::perron::{boundary_attainment_report, run_asymptotic_solve, AsymptoticSetup, BoundaryDatum, PerronConfig};

fn main() -> plateau_hyp::Result<()> {
    let phi = BoundaryDatum::SmoothStep { low: 0.2, high: 0.7, width: 0.15, center: 0.0 };
    let setup = AsymptoticSetup::new(2, 0.3, 1.0, 0.05, 1.0, 33);
    let (u, report, problem) = run_asymptotic_solve(&phi, &setup, &PerronConfig::default())?;
    println!(
        "{} sweeps over {} balls in {} colors, residual {:.1e}, increment {:.1e}",
        report.sweeps, report.balls, report.colors, report.final_residual, report.final_increment
    );
    println!("sandwich margins: lower {:.2e}, upper {:.2e}", report.sandwich_lower, report.sandwich_upper);
    let attainment = boundary_attainment_report(&u, &phi, &problem, 0.1)?;
    println!("max |u − φ| on the first interior row: {:.3e}", attainment.max_error);
    for row in attainment.rows.iter().step_by(8) {
        println!("  x = {:+.3}  u = {:.5}  φ = {:.5}", row.x[0], row.u, row.phi);
    }
    Ok(())
}
