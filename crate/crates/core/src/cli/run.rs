use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{load_config, DiagnosticsReport, Mode, RunConfig};
use super::output::{graph_obj, grid_csv, write_atomic};
use crate::barriers::{build_stack, closed_form_offset, g_alpha, select_alpha};
use crate::geometry::{ChartPoint, ExactSolution, KillingKind};
use crate::grid::{Grid, GridFunction};
use crate::operator::{
    drift_from_flow, fix_orientation_sign, gamma_from_metric, killing_graph_patch, max_interior_residual,
    numerical_mean_curvature, q_value, qh_pointwise, DiscreteOperator, NormalOrientation, OrientationConvention,
};
use crate::perron::{
    boundary_attainment_report, comparison_check, run_asymptotic_solve, AsymptoticSetup, BallOrder, PerronConfig,
};
use crate::solver::{gradient_diagnostic, residual_norm, solve_dirichlet, DirichletProblem, Domain, InitialGuess, SolverConfig};
use crate::{Error, Result};

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

/// Process exit status for an error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Domain(_) => 2,
        Error::Divergence(_) => 3,
        Error::Check(_) | Error::Orientation(_) => 4,
        Error::Io(_) => 1,
    }
}

/// Loads the config, runs it, and maps the outcome to an exit status.
pub fn execute(mode: Mode, config: &Path, out_dir: &Path, seed: Option<u64>) -> i32 {
    let outcome = load_config(config, Some(mode)).and_then(|mut cfg| {
        if let Some(s) = seed {
            cfg.seed = s;
        }
        run_scenario(&cfg, out_dir)
    });
    match outcome {
        Ok((report, artifacts)) => {
            for c in &report.checks {
                let tol = c.tolerance.map_or(String::new(), |t| format!(" (tolerance {t:.3e})"));
                println!("{:<5} {:<48} {:.6e}{tol}", format!("{:?}", c.status).to_uppercase(), c.name, c.value);
            }
            for f in &artifacts.files {
                println!("wrote {}", f.display());
            }
            if report.all_pass() {
                0
            } else {
                4
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one scenario, writes its artifacts and report under `out_dir`, and returns the report.
pub fn run_scenario(cfg: &RunConfig, out_dir: &Path) -> Result<(DiagnosticsReport, Artifacts)> {
    let start = Instant::now();
    let mut report = DiagnosticsReport::new(cfg.clone());
    let mut artifacts = Artifacts::default();
    match cfg.mode() {
        Mode::VerifyExact => verify_exact(cfg, &mut report)?,
        Mode::OracleMc => oracle_mc(cfg, &mut report)?,
        Mode::Barrier => barrier(cfg, &mut report, out_dir, &mut artifacts)?,
        Mode::SolveDirichlet => {
            let u = dirichlet(cfg, &mut report)?;
            artifacts.files.extend(emit_outputs(&u, cfg, out_dir, "")?);
        }
        Mode::SolveAsymptotic => {
            let u = asymptotic(cfg, &mut report)?;
            artifacts.files.extend(emit_outputs(&u, cfg, out_dir, "")?);
        }
        Mode::Compare => {
            let (u1, u2) = compare(cfg, &mut report)?;
            artifacts.files.extend(emit_outputs(&u1, cfg, out_dir, "")?);
            artifacts.files.extend(emit_outputs(&u2, cfg, out_dir, "_upper")?);
        }
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    let path = out_dir.join(&cfg.outputs.report);
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Io(e.into()))?;
    write_atomic(&path, &json)?;
    artifacts.files.push(path);
    Ok((report, artifacts))
}

fn with_suffix(name: &str, suffix: &str) -> String {
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}{suffix}.{ext}"),
        None => format!("{name}{suffix}"),
    }
}

/// Writes the node table and, for two-dimensional slices, the OBJ mesh of the graph.
pub fn emit_outputs(u: &GridFunction, cfg: &RunConfig, out_dir: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let csv = out_dir.join(with_suffix(&cfg.outputs.csv, suffix));
    write_atomic(&csv, &grid_csv(u)?)?;
    files.push(csv);
    if u.grid.dim() == 2 {
        let obj = out_dir.join(with_suffix(&cfg.outputs.obj, suffix));
        write_atomic(&obj, &graph_obj(u, cfg.structure)?)?;
        files.push(obj);
    }
    Ok(files)
}

fn chart_grid(cfg: &RunConfig, nodes: usize) -> Result<Grid> {
    Grid::chart_box(cfg.n, cfg.domain.half_width, cfg.domain.y_min, cfg.domain.y_max, nodes)
}

/// Largest `|(x, y)|` over the configured box.
fn box_reach(cfg: &RunConfig) -> f64 {
    let l = cfg.domain.half_width;
    ((cfg.n - 1) as f64 * l * l + cfg.domain.y_max * cfg.domain.y_max).sqrt()
}

fn random_point(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> ChartPoint {
    let l = cfg.domain.half_width;
    let x = (0..cfg.n - 1).map(|_| rng.gen_range(-l..=l)).collect();
    ChartPoint { x, y: rng.gen_range(cfg.domain.y_min..=cfg.domain.y_max) }
}

/// The exact families with their mean curvature: a constant, a hemisphere whose disk
/// contains the box, and the equidistant plane.
fn catalog(cfg: &RunConfig, conv: OrientationConvention) -> Vec<(&'static str, ExactSolution, f64)> {
    let h_plane = if cfg.h != 0.0 { cfg.h } else { 0.5 };
    vec![
        ("constant", ExactSolution::Constant { c: 0.5 }, 0.0),
        ("hemisphere", ExactSolution::Hemisphere { t: 0.0, r: 1.5 * box_reach(cfg) }, 0.0),
        ("tilted_plane", ExactSolution::TiltedPlane { a: conv.equidistant_slope(h_plane), b: 0.2 }, h_plane),
    ]
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

const EXACT_FLOOR: f64 = 1e-11;

fn verify_exact(cfg: &RunConfig, report: &mut DiagnosticsReport) -> Result<()> {
    let conv = fix_orientation_sign()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = [cfg.grid, 2 * cfg.grid - 1, 4 * cfg.grid - 3];
    for (name, family, h) in catalog(cfg, conv) {
        let worst = (0..100)
            .map(|_| qh_pointwise(&family, &random_point(cfg, &mut rng), KillingKind::Parabolic, h, conv).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        report.at_most(&format!("{name}: pointwise residual"), worst, 1e-9, "exact solutions of the parabolic operator");

        let mut residuals = Vec::new();
        let mut errors = Vec::new();
        for &nodes in &sizes {
            let grid = chart_grid(cfg, nodes)?;
            let exact = GridFunction::try_sample(grid.clone(), |z| family.value(z))?;
            residuals.push(max_interior_residual(&exact, KillingKind::Parabolic, h, conv)?);
            let op = DiscreteOperator::new(&grid, KillingKind::Parabolic, h, conv)?;
            let p = DirichletProblem::new(op, &Domain::Box)?;
            let solver = SolverConfig { max_iters: cfg.solver.max_iters, ..SolverConfig::default() };
            let (u, _) = solve_dirichlet(&p, &exact, InitialGuess::Harmonic, &solver)?;
            errors.push(u.max_abs_diff(&exact));
        }
        for (what, values) in [("discrete residual", &residuals), ("Dirichlet error", &errors)] {
            let finest = *values.last().unwrap();
            if finest <= EXACT_FLOOR {
                report.at_most(&format!("{name}: {what} (reproduced exactly)"), finest, EXACT_FLOOR, "exactness of the scheme");
            } else {
                let ord = orders(values);
                let min = ord.iter().copied().fold(f64::INFINITY, f64::min);
                report.at_least(&format!("{name}: {what} order"), min, 1.9, "second-order consistency");
            }
            report.detail(&format!("{name}_{}", what.replace(' ', "_").to_lowercase()), serde_json::json!({
                "nodes": sizes, "values": values, "orders": orders(values),
            }));
        }
    }
    Ok(())
}

fn oracle_mc(cfg: &RunConfig, report: &mut DiagnosticsReport) -> Result<()> {
    let conv = fix_orientation_sign()?;
    report.info("orientation sign", conv.sign(), "fixed by the tilted-plane anchor");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let against = NormalOrientation::AgainstField(KillingKind::Parabolic);
    for (name, family, _) in catalog(cfg, conv) {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let z = random_point(cfg, &mut rng);
            let h_op = conv.sign() * q_value(&family, &z, KillingKind::Parabolic)? / cfg.n as f64;
            let f = move |c: &[f64]| family.value(c).unwrap_or(f64::NAN);
            let patch = killing_graph_patch(KillingKind::Parabolic, &f);
            let h_oracle = numerical_mean_curvature(&patch, &z.coords(), &against)?;
            worst = worst.max((h_op - h_oracle).abs());
        }
        report.at_most(&format!("{name}: operator vs oracle mean curvature"), worst, 1e-6, "orientation convention");
    }
    let mut horo_dev = 0.0f64;
    for _ in 0..20 {
        let z = random_point(cfg, &mut rng);
        let height = z.y;
        let patch = move |s: &[f64]| {
            let mut p = s.to_vec();
            p.push(height);
            p
        };
        let mut down = vec![0.0; cfg.n + 1];
        down[cfg.n] = -1.0;
        let params: Vec<f64> = std::iter::once(0.1).chain(z.x.iter().copied()).collect();
        let h = numerical_mean_curvature(&patch, &params, &NormalOrientation::Along(down))?;
        horo_dev = horo_dev.max((h.abs() - 1.0).abs());
    }
    report.at_most("horosphere: |H| − 1", horo_dev, 1e-6, "horospheres bound the |H| < 1 regime");

    let (mut gamma_dev, mut drift_dev) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let z = random_point(cfg, &mut rng);
        for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
            let g = gamma_from_metric(kind, &z)?;
            gamma_dev = gamma_dev.max((g * (1.0 / kind.gamma(&z)) - 1.0).abs());
            let fd = drift_from_flow(kind, &z, 1e-5 * z.y)?;
            let b = kind.drift(&z);
            let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            drift_dev = drift_dev.max(fd.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max) / scale);
        }
    }
    report.at_most("γ·<Z, Z> − 1", gamma_dev, 1e-12, "γ = 1/<Z, Z>");
    report.at_most("drift vs flow difference oracle", drift_dev, 1e-6, "∇̄_Z Z");

    let mut radial = 0.0f64;
    for _ in 0..20 {
        let z = ChartPoint { x: (0..cfg.n - 1).map(|_| rng.gen_range(-0.8..0.8)).collect(), y: rng.gen_range(0.2..1.5) };
        let c = rng.gen_range(-1.0..1.0);
        let constant = move |_: &[f64]| c;
        let patch = killing_graph_patch(KillingKind::Hyperbolic, &constant);
        let h = numerical_mean_curvature(&patch, &z.coords(), &NormalOrientation::AgainstField(KillingKind::Hyperbolic))?;
        radial = radial.max(h.abs());
    }
    report.at_most("constant radial graph: |H|", radial, 1e-6, "dilations of a totally geodesic hemisphere");
    Ok(())
}

fn barrier(cfg: &RunConfig, report: &mut DiagnosticsReport, out_dir: &Path, artifacts: &mut Artifacts) -> Result<()> {
    let l = cfg.l;
    let alpha = select_alpha(l)?;
    let g = g_alpha(alpha);
    report.flag("l < g(α) < l + 1", g > l && g < l + 1.0, g, "choice of α");
    let stack = build_stack(l, alpha)?;
    report.at_most("t_0 + sin β", (stack.levels[0].t + stack.beta.sin()).abs(), 0.0, "first level");
    let closed = stack.levels.iter().enumerate().map(|(k, lv)| (lv.t - closed_form_offset(alpha, k)).abs()).fold(0.0, f64::max);
    report.at_most("recursion vs closed form", closed, 1e-12, "offset recursion");
    let pasting = stack
        .levels
        .windows(2)
        .map(|w| (w[1].r * stack.beta.cos() - w[0].r * alpha.cos()).abs())
        .fold(0.0, f64::max);
    report.at_most("pasting identity", pasting, 1e-14, "consecutive hemispheres meet on the cone");
    let monotone = stack.levels.windows(2).all(|w| w[1].t > w[0].t && w[1].t < stack.t_limit());
    report.flag("offsets increase toward the limit", monotone, stack.t_limit(), "limit of t_k");
    let t_k = stack.levels.last().unwrap().t;
    report.flag("l < t_K < l + 1", t_k > l && t_k < l + 1.0, t_k, "termination");
    report.info("K", stack.k() as f64, "number of stacking steps");
    report.info("α", alpha, "bisection on g");
    report.detail("stack", &stack);
    report.detail("first_level_above_l", stack.first_level_above(l));

    let mut levels = csv::Writer::from_writer(Vec::new());
    let mut profile = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    levels.write_record(["k", "t_k", "R_k"]).map_err(io)?;
    for (k, lv) in stack.levels.iter().enumerate() {
        levels.write_record([k.to_string(), format!("{:.16e}", lv.t), format!("{:.16e}", lv.r)]).map_err(io)?;
    }
    profile.write_record(["r", "w"]).map_err(io)?;
    for i in 0..=1000 {
        let r = 1.05 * i as f64 / 1000.0;
        profile.write_record([format!("{r:.16e}"), format!("{:.16e}", stack.profile(r))]).map_err(io)?;
    }
    for (name, w) in [(&cfg.outputs.levels, levels), (&cfg.outputs.profile, profile)] {
        let path = out_dir.join(name);
        write_atomic(&path, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
        artifacts.files.push(path);
    }
    Ok(())
}

fn dirichlet(cfg: &RunConfig, report: &mut DiagnosticsReport) -> Result<GridFunction> {
    let conv = fix_orientation_sign()?;
    let family = cfg.exact.expect("validated");
    let grid = chart_grid(cfg, cfg.grid)?;
    let exact = GridFunction::try_sample(grid.clone(), |z| family.value(z))?;
    let op = DiscreteOperator::new(&grid, cfg.structure, cfg.h, conv)?;
    let p = DirichletProblem::new(op, &Domain::Box)?;
    let solver = SolverConfig { tol: cfg.solver.tol, max_iters: cfg.solver.max_iters, ..SolverConfig::default() };
    let (u, solve) = solve_dirichlet(&p, &exact, InitialGuess::Harmonic, &solver)?;
    report.at_most("residual", residual_norm(&u, &p), cfg.solver.tol, "discrete equation");
    report.info("max |u − exact family|", u.max_abs_diff(&exact), "Dirichlet data from the exact family");
    report.info("Newton iterations", solve.iterations as f64, "damped Newton");
    report.detail("damping", &solve.damping);
    report.detail("gradient_bands", gradient_diagnostic(&u, &p));
    Ok(u)
}

fn perron_config(cfg: &RunConfig) -> PerronConfig {
    let base = PerronConfig::default();
    PerronConfig {
        tol: cfg.solver.tol,
        max_sweeps: cfg.solver.max_sweeps,
        ball_radius: cfg.solver.ball_radius,
        order: if cfg.solver.shuffle { BallOrder::Shuffled { seed: cfg.seed } } else { BallOrder::Lexicographic },
        solver: SolverConfig { tol: base.solver.tol.min(1e-2 * cfg.solver.tol), max_iters: cfg.solver.max_iters, ..base.solver },
        ..base
    }
}

fn asymptotic(cfg: &RunConfig, report: &mut DiagnosticsReport) -> Result<GridFunction> {
    let setup = cfg.setup();
    let pc = perron_config(cfg);
    let (u, run, problem) = run_asymptotic_solve(&cfg.boundary, &setup, &pc)?;
    let tol = pc.tol;
    report.at_most("final residual", run.final_residual, tol, "Perron fixed point");
    report.at_most("final increment", run.final_increment, tol, "Perron fixed point");
    report.at_least("u − σ", run.sandwich_lower, -tol, "subsolution below");
    report.at_least("w − u", run.sandwich_upper, -tol, "supersolution above");
    report.at_least("largest sweep decrease", run.worst_violation, -10.0 * tol, "monotone sweeps");
    if let crate::perron::BoundaryDatum::Constant { c } = cfg.boundary {
        let err = (0..u.grid.len())
            .map(|k| {
                let y = u.grid.coords(k)[cfg.n - 1];
                (u.values[k] - (c + problem.slope * y)).abs()
            })
            .fold(0.0, f64::max);
        let spacing = u.grid.spacing().iter().copied().fold(0.0, f64::max);
        report.at_most("distance to the equidistant plane", err, (10.0 * tol).max(5.0 * spacing * spacing), "equidistant solution");
    }
    let attain = boundary_attainment_report(&u, &cfg.boundary, &problem, 0.1)?;
    report.info("max |u − φ| on the first interior row", attain.max_error, "boundary attainment");
    report.detail("perron", &run);
    report.detail("attainment", &attain);
    Ok(u)
}

fn compare(cfg: &RunConfig, report: &mut DiagnosticsReport) -> Result<(GridFunction, GridFunction)> {
    let upper = cfg.upper_datum();
    let c = cfg.c_max.unwrap_or(cfg.boundary.c_max().max(upper.c_max()));
    let setup = AsymptoticSetup { c_max: Some(c), ..cfg.setup() };
    let pc = perron_config(cfg);
    let (u1, r1, _) = run_asymptotic_solve(&cfg.boundary, &setup, &pc)?;
    let (u2, r2, _) = run_asymptotic_solve(&upper, &setup, &pc)?;
    let cmp = comparison_check(&u1, &u2, pc.tol)?;
    report.at_most("max (u1 − u2)⁺", cmp.max_positive_part, cmp.tolerance, "comparison principle");
    report.info("sweeps (lower data)", r1.sweeps as f64, "Perron fixed point");
    report.info("sweeps (upper data)", r2.sweeps as f64, "Perron fixed point");
    Ok((u1, u2))
}
