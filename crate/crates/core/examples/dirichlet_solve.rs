//! Damped Newton solve of a Dirichlet problem whose solution is a hemisphere.

use plateau_hyp::operator::DiscreteOperator;
use plateau_hyp::solver::{solve_dirichlet, DirichletProblem, Domain, InitialGuess, SolverConfig};
use plateau_hyp::{fix_orientation_sign, ExactSolution, Grid, GridFunction, KillingKind};

fn main() -> plateau_hyp::Result<()> {
    let conv = fix_orientation_sign()?;
    let exact = ExactSolution::Hemisphere { t: 0.0, r: 2.0 };
    for nodes in [17, 33, 65] {
        let grid = Grid::chart_box(2, 0.5, 0.2, 1.2, nodes)?;
        let data = GridFunction::try_sample(grid.clone(), |z| exact.value(z))?;
        let op = DiscreteOperator::new(&grid, KillingKind::Parabolic, 0.0, conv)?;
        let problem = DirichletProblem::new(op, &Domain::Box)?;
        let (u, report) = solve_dirichlet(&problem, &data, InitialGuess::Harmonic, &SolverConfig::default())?;
        println!(
            "{nodes:3} nodes: {} Newton steps, residual {:.1e}, max error {:.3e}",
            report.iterations,
            report.final_residual,
            u.max_abs_diff(&data)
        );
    }
    Ok(())
}
