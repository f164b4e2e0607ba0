//! Perron engine for the asymptotic Dirichlet problem of parabolic Killing graphs.
//!
//! The unbounded slice is truncated to a chart box. The bottom face `y = y_min` carries
//! the asymptotic data `φ` transported along equidistants, `φ(x') + a·y_min`; the lateral
//! and top faces carry the same extension clamped between the best lower barrier and
//! the supersolution plane.
//! The iterate starts at the subsolution `σ` and is raised by CMC lifts on a cover of
//! index-space balls until it stops moving and solves the discrete equation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::barriers::{build_stack, make_supersolution, select_alpha, upper_cap_barrier, PositionedStack, SupersolutionPlane};
use crate::geometry::{between_spheres_check, ChartPoint, IdealPoint, IdealSphere, KillingKind};
use crate::grid::{Grid, GridFunction};
use crate::operator::{fix_orientation_sign, DiscreteOperator, OrientationConvention};
use crate::solver::{solve_dirichlet, DirichletProblem, Domain, InitialGuess, SolverConfig};
use crate::{Error, Result};

/// Asymptotic boundary data `φ(x')` on the ideal boundary of the slice.
///
/// Profiles depend on the first horizontal coordinate, except `bump`, which is radial.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryDatum {
    Constant { c: f64 },
    /// Logistic step from `low` to `high` centered at `center` with the given width.
    SmoothStep {
        low: f64,
        high: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `base + height · exp(−|x' − center|² / width²)`.
    Bump {
        center: Vec<f64>,
        height: f64,
        width: f64,
        #[serde(default)]
        base: f64,
    },
    /// `offset + amplitude · sin(2π x_1 / period) · exp(−|x_1| / decay)`.
    SinusoidDecay { amplitude: f64, period: f64, decay: f64, offset: f64 },
    /// Piecewise-linear interpolation in `x_1`, constant beyond the ends.
    Table { xs: Vec<f64>, values: Vec<f64> },
    /// Another datum raised by a constant.
    Shifted { datum: Box<BoundaryDatum>, by: f64 },
}

impl BoundaryDatum {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let x1 = x.first().copied().unwrap_or(0.0);
        match self {
            Self::Constant { c } => *c,
            Self::SmoothStep { low, high, width, center } => low + (high - low) / (1.0 + (-(x1 - center) / width).exp()),
            Self::Bump { center, height, width, base } => {
                let d2: f64 = x.iter().zip(center.iter().chain(std::iter::repeat(&0.0))).map(|(a, c)| (a - c).powi(2)).sum();
                base + height * (-d2 / (width * width)).exp()
            }
            Self::SinusoidDecay { amplitude, period, decay, offset } => {
                offset + amplitude * (std::f64::consts::TAU * x1 / period).sin() * (-x1.abs() / decay).exp()
            }
            Self::Table { xs, values } => {
                if x1 <= xs[0] {
                    return values[0];
                }
                let last = xs.len() - 1;
                if x1 >= xs[last] {
                    return values[last];
                }
                let i = xs.partition_point(|&t| t <= x1) - 1;
                let s = (x1 - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
            Self::Shifted { datum, by } => datum.eval(x) + by,
        }
    }

    /// Upper bound `c_max` of the datum, the offset of the second bounding sphere.
    pub fn c_max(&self) -> f64 {
        match self {
            Self::Constant { c } => *c,
            Self::SmoothStep { low, high, .. } => low.max(*high),
            Self::Bump { height, base, .. } => base + height.max(0.0),
            Self::SinusoidDecay { amplitude, offset, .. } => offset + amplitude.abs(),
            Self::Table { values, .. } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::Shifted { datum, by } => datum.c_max() + by,
        }
    }

    /// Lower bound of the datum.
    pub fn c_min(&self) -> f64 {
        match self {
            Self::Constant { c } => *c,
            Self::SmoothStep { low, high, .. } => low.min(*high),
            Self::Bump { height, base, .. } => base + height.min(0.0),
            Self::SinusoidDecay { amplitude, offset, .. } => offset - amplitude.abs(),
            Self::Table { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
            Self::Shifted { datum, by } => datum.c_min() + by,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(format!("boundary datum: {m}")));
        match self {
            Self::SmoothStep { width, .. } | Self::Bump { width, .. } if !(*width > 0.0) => bad("width must be positive"),
            Self::SinusoidDecay { period, decay, .. } if !(*period > 0.0 && *decay > 0.0) => bad("period and decay must be positive"),
            Self::Table { xs, values } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    bad("table needs at least two samples and matching lengths")
                } else if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    bad("table abscissae must increase")
                } else {
                    Ok(())
                }
            }
            Self::Shifted { datum, .. } => datum.validate(),
            _ => Ok(()),
        }
    }
}

/// Truncated box and equation for an asymptotic solve.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AsymptoticSetup {
    pub n: usize,
    pub h: f64,
    pub half_width: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Nodes along each horizontal axis.
    pub nodes: usize,
    /// Nodes along `y`; defaults to `nodes`.
    #[serde(default)]
    pub nodes_y: Option<usize>,
    /// Offset of the upper bounding sphere; defaults to `sup φ`.
    #[serde(default)]
    pub c_max: Option<f64>,
}

impl AsymptoticSetup {
    pub fn new(n: usize, h: f64, half_width: f64, y_min: f64, y_max: f64, nodes: usize) -> Self {
        Self { n, h, half_width, y_min, y_max, nodes, nodes_y: None, c_max: None }
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.n == 0 || self.n > crate::grid::MAX_DIM {
            return Err(Error::Domain(format!("slice dimension must be 1..=3, got {}", self.n)));
        }
        let mut lo = vec![-self.half_width; self.n];
        let mut hi = vec![self.half_width; self.n];
        lo[self.n - 1] = self.y_min;
        hi[self.n - 1] = self.y_max;
        let mut nodes = vec![self.nodes; self.n];
        nodes[self.n - 1] = self.nodes_y.unwrap_or(self.nodes);
        Grid::new(lo, hi, nodes)
    }

    /// The same spacing on a box with doubled half-width and doubled height range.
    pub fn doubled(&self) -> Self {
        let ny = self.nodes_y.unwrap_or(self.nodes);
        Self {
            half_width: 2.0 * self.half_width,
            y_max: self.y_min + 2.0 * (self.y_max - self.y_min),
            nodes: 2 * self.nodes - 1,
            nodes_y: Some(2 * ny - 1),
            ..self.clone()
        }
    }
}

/// Order in which the balls of the cover are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallOrder {
    Lexicographic,
    Shuffled { seed: u64 },
}

/// How the interior is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartFrom {
    /// The subsolution `σ = min(0, a·y)`.
    Sigma,
    /// The pointwise maximum of `σ` and the lower barriers.
    LowerBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerronConfig {
    /// Stopping tolerance for both the sweep increment and the residual.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Ball radius in index units; `None` picks `max(4, (N − 1)/4)`.
    pub ball_radius: Option<f64>,
    pub order: BallOrder,
    pub start: StartFrom,
    /// Fit stacked-hemisphere barriers under the data (used only for `H ≥ 0`).
    pub stacks: bool,
    pub solver: SolverConfig,
}

impl Default for PerronConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_sweeps: 400,
            ball_radius: None,
            order: BallOrder::Lexicographic,
            start: StartFrom::Sigma,
            stacks: true,
            solver: SolverConfig { tol: 1e-11, ..SolverConfig::default() },
        }
    }
}

/// A closed ball in index space.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Ball {
    pub center: Vec<usize>,
    pub radius: f64,
}

impl Ball {
    fn overlaps(&self, other: &Ball) -> bool {
        let d2: f64 = self.center.iter().zip(&other.center).map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum();
        // Closed balls plus one stencil layer.
        d2.sqrt() <= self.radius + other.radius + 2.0
    }
}

/// Balls whose solve sets cover every interior node, grouped into colors of pairwise
/// disjoint balls.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    /// Ball indices per color, in visiting order.
    pub colors: Vec<Vec<usize>>,
}

impl BallCover {
    pub fn new(grid: &Grid, radius: f64, order: BallOrder) -> Result<Self> {
        let n = grid.dim();
        if !(radius >= 2.0) {
            return Err(Error::Domain(format!("ball radius {radius} is below 2 nodes")));
        }
        let rn = (n as f64).sqrt();
        let spacing = ((2.0 * (radius - rn - 1.0) / rn).floor() as usize).max(1);
        let axis_centers: Vec<Vec<usize>> = grid
            .nodes()
            .iter()
            .map(|&m| {
                let last = m - 2;
                let mut c: Vec<usize> = (1..=last).step_by(spacing).collect();
                if *c.last().unwrap() != last {
                    c.push(last);
                }
                c
            })
            .collect();
        let mut balls = Vec::new();
        let total: usize = axis_centers.iter().map(Vec::len).product();
        for code in 0..total {
            let mut c = code;
            let mut center = vec![0; n];
            for a in (0..n).rev() {
                center[a] = axis_centers[a][c % axis_centers[a].len()];
                c /= axis_centers[a].len();
            }
            balls.push(Ball { center, radius });
        }
        let mut cover = Self { balls, colors: Vec::new() };
        // Patch any interior node left uncovered.
        loop {
            let covered = cover.covered(grid);
            match (0..grid.len()).find(|&k| !grid.is_face(k) && !covered[k]) {
                Some(k) => {
                    let m = grid.multi_index(k);
                    cover.balls.push(Ball { center: m[..n].to_vec(), radius });
                }
                None => break,
            }
        }
        cover.balls.sort_by(|a, b| a.center.cmp(&b.center));
        if let BallOrder::Shuffled { seed } = order {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            cover.balls.shuffle(&mut rng);
        }
        cover.colors = greedy_colors(&cover.balls);
        Ok(cover)
    }

    /// Whether each node is solved for by at least one ball.
    pub fn covered(&self, grid: &Grid) -> Vec<bool> {
        let mut covered = vec![false; grid.len()];
        for b in &self.balls {
            for k in solve_set(grid, b) {
                covered[k] = true;
            }
        }
        covered
    }
}

fn greedy_colors(balls: &[Ball]) -> Vec<Vec<usize>> {
    let mut colors: Vec<Vec<usize>> = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        match colors.iter_mut().find(|c| c.iter().all(|&j| !balls[j].overlaps(b))) {
            Some(c) => c.push(i),
            None => colors.push(vec![i]),
        }
    }
    colors
}

fn in_ball(grid: &Grid, b: &Ball, k: usize) -> bool {
    let m = grid.multi_index(k);
    let d2: f64 = b.center.iter().enumerate().map(|(a, &c)| (m[a] as f64 - c as f64).powi(2)).sum();
    d2 <= b.radius * b.radius + 1e-9
}

fn solve_set(grid: &Grid, b: &Ball) -> Vec<usize> {
    (0..grid.len())
        .filter(|&k| {
            if grid.is_face(k) || !in_ball(grid, b, k) {
                return false;
            }
            let mut inside = true;
            grid.for_each_neighbor(k, |j| inside &= in_ball(grid, b, j));
            inside
        })
        .collect()
}

/// Outcome of one CMC lift.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    /// New values at the solved nodes.
    pub patch: Vec<(usize, f64)>,
    /// Most negative `solve − old` over the ball (before the max-combine).
    pub min_change: f64,
    pub radius_used: f64,
}

/// Solves on `ball` with the current values of `u` as boundary data and returns the
/// max-combined patch. The radius is halved on solver failure, down to 2 nodes.
///
/// With a `ceiling`, a solve that climbs above it by more than the solver tolerance
/// counts as a failure: such iterates sit on a spurious steep branch of the discrete
/// equation.
pub fn cmc_lift(
    op: &DiscreteOperator,
    u: &GridFunction,
    ball: &Ball,
    cfg: &SolverConfig,
    ceiling: Option<&GridFunction>,
) -> Result<Lift> {
    let mut radius = ball.radius;
    loop {
        let attempt = DirichletProblem::new(op.clone(), &Domain::Ball { center: ball.center.clone(), radius })
            .and_then(|p| solve_dirichlet(&p, u, InitialGuess::AsGiven, cfg).map(|(s, _)| (p, s)))
            .and_then(|(p, s)| match ceiling {
                Some(w) if p.unknowns().iter().any(|&k| s.values[k] > w.values[k] + 1e3 * cfg.tol) => {
                    Err(Error::Divergence("ball solve rose above the supersolution".into()))
                }
                _ => Ok((p, s)),
            });
        match attempt {
            Ok((p, s)) => {
                let mut min_change = f64::INFINITY;
                let patch = p
                    .unknowns()
                    .iter()
                    .map(|&k| {
                        let change = s.values[k] - u.values[k];
                        min_change = min_change.min(change);
                        (k, u.values[k].max(s.values[k]))
                    })
                    .collect();
                return Ok(Lift { patch, min_change, radius_used: radius });
            }
            Err(Error::Divergence(msg)) => {
                radius *= 0.5;
                if radius < 2.0 {
                    return Err(Error::Divergence(format!("ball at {:?} failed down to radius 2: {msg}", ball.center)));
                }
            }
            // Too small a ball has no interior nodes; treat it like a failed solve.
            Err(Error::Domain(msg)) if radius < ball.radius => {
                return Err(Error::Divergence(format!("ball at {:?} shrank to nothing: {msg}", ball.center)));
            }
            Err(e) => return Err(e),
        }
    }
}

/// Iterate, barriers and sweep log of a Perron run.
#[derive(Debug, Clone)]
pub struct PerronState {
    pub u: GridFunction,
    pub sigma: GridFunction,
    pub w: GridFunction,
    pub sweeps: usize,
    pub increments: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Most negative `solve − old` seen per sweep (the max-combine hides these).
    pub violations: Vec<f64>,
}

impl PerronState {
    /// `(min(u − σ), min(w − u))` over all nodes.
    pub fn sandwich_margins(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..self.u.values.len() {
            lo = lo.min(self.u.values[k] - self.sigma.values[k]);
            hi = hi.min(self.w.values[k] - self.u.values[k]);
        }
        (lo, hi)
    }
}

fn interior_residual(op: &DiscreteOperator, u: &GridFunction) -> f64 {
    let grid = op.grid();
    (0..grid.len())
        .into_par_iter()
        .filter(|&k| !grid.is_face(k))
        .map(|k| op.residual_at(&u.values, k).abs())
        .reduce(|| 0.0, f64::max)
}

/// One pass of lifts over the cover. Balls of one color run concurrently. Ball solves
/// that fall below the iterate are recorded in `violations`; the max-combine keeps the
/// iterate.
pub fn perron_sweep(state: &mut PerronState, op: &DiscreteOperator, cover: &BallCover, cfg: &PerronConfig) -> Result<f64> {
    let before = state.u.values.clone();
    let mut worst = 0.0f64;
    for color in &cover.colors {
        let w = &state.w;
        let lifts: Vec<Result<Lift>> =
            color.par_iter().map(|&i| cmc_lift(op, &state.u, &cover.balls[i], &cfg.solver, Some(w))).collect();
        for lift in lifts {
            let lift = lift?;
            worst = worst.min(lift.min_change);
            for (k, v) in lift.patch {
                state.u.values[k] = v;
            }
        }
    }
    state.sweeps += 1;
    state.violations.push(worst);
    let increment = state.u.values.iter().zip(&before).map(|(a, b)| a - b).fold(0.0, f64::max);
    let (lo, hi) = state.sandwich_margins();
    if lo < -cfg.tol || hi < -cfg.tol {
        return Err(Error::Check(format!("sandwich broken: min(u − σ) = {lo:.3e}, min(w − u) = {hi:.3e}")));
    }
    state.increments.push(increment);
    Ok(increment)
}

/// Lower barrier for the data: the equidistant plane through `inf φ` (exact for `H < 0`,
/// a subsolution for `H ≥ 0`), raised by fitted stacks when `H ≥ 0`.
#[derive(Debug, Clone)]
pub struct LowerBarrier {
    pub floor: f64,
    pub slope: f64,
    pub stacks: Vec<PositionedStack>,
}

impl LowerBarrier {
    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        let base = self.floor + self.slope.min(0.0) * y;
        self.stacks.iter().fold(base, |m, s| m.max(s.eval(x, y)))
    }
}

fn build_lower_barrier(phi: &BoundaryDatum, grid: &Grid, h: f64, slope: f64, use_stacks: bool) -> Result<LowerBarrier> {
    let floor = phi.c_min().max(0.0);
    let mut stacks = Vec::new();
    let n = grid.dim();
    if use_stacks && h >= 0.0 && n >= 2 && phi.c_max() > floor {
        let stack = build_stack(1.0, select_alpha(1.0)?)?;
        let eval = |x: &[f64]| phi.eval(x);
        let width = grid.hi()[0] - grid.lo()[0];
        // One stack per bottom-face column along x_1, centered on the x_1 axis.
        let cols = grid.nodes()[0];
        for i in (0..cols).step_by(((cols - 1) / 16).max(1)) {
            let mut center = vec![0.0; n - 1];
            center[0] = grid.coord(0, i);
            if let Some(s) = PositionedStack::fit_below(&stack, &center, floor, &eval, width, 1e-3 * width) {
                if s.eval(&center, 0.0) > floor {
                    stacks.push(s);
                }
            }
        }
    }
    Ok(LowerBarrier { floor, slope, stacks })
}

/// Summary of a finished asymptotic solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PerronReport {
    pub sweeps: usize,
    pub increments: Vec<f64>,
    pub residuals: Vec<f64>,
    pub final_residual: f64,
    pub final_increment: f64,
    /// Largest sweep-to-sweep drop before the max-combine (0 if none).
    pub worst_violation: f64,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub ball_radius: f64,
    pub balls: usize,
    pub colors: usize,
    pub supersolution: SupersolutionPlane,
    pub equidistant_slope: f64,
    pub stacks: usize,
    /// Whether increments were nonincreasing after three sweeps of burn-in.
    pub increments_settled: bool,
}

/// Everything a run needs besides the data: grid, operator, barriers and face values.
#[derive(Debug, Clone)]
pub struct AsymptoticProblem {
    pub op: DiscreteOperator,
    pub conv: OrientationConvention,
    pub plane: SupersolutionPlane,
    pub slope: f64,
    pub lower: LowerBarrier,
}

impl AsymptoticProblem {
    pub fn new(phi: &BoundaryDatum, setup: &AsymptoticSetup, use_stacks: bool) -> Result<Self> {
        phi.validate()?;
        let conv = fix_orientation_sign()?;
        let grid = setup.grid()?;
        let n = grid.dim();
        let samples: Vec<Vec<f64>> = if n == 1 {
            vec![vec![]]
        } else {
            (0..grid.len()).filter(|&k| grid.is_bottom(k)).map(|k| grid.coords(k)[..n - 1].to_vec()).collect()
        };
        let c = setup.c_max.unwrap_or(phi.c_max()).max(f64::MIN_POSITIVE);
        let mut e1_normal = vec![0.0; n];
        e1_normal[0] = 1.0;
        let e1 = IdealSphere::flat(e1_normal.clone(), 0.0)?;
        let e2 = IdealSphere::flat(e1_normal, c)?;
        let check = between_spheres_check(|x| phi.eval(x), &samples, &e1, &e2)?;
        if !check.holds {
            let (x, v) = check.witness.unwrap_or_default();
            return Err(Error::Domain(format!("data {v} at {x:?} leave the slab 0 ≤ φ ≤ {c}")));
        }
        let op = DiscreteOperator::new(&grid, KillingKind::Parabolic, setup.h, conv)?;
        let plane = make_supersolution(c, setup.h, conv)?;
        let slope = conv.equidistant_slope(setup.h);
        let lower = build_lower_barrier(phi, &grid, setup.h, slope, use_stacks)?;
        Ok(Self { op, conv, plane, slope, lower })
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn sigma(&self, y: f64) -> f64 {
        (self.slope * y).min(0.0)
    }

    /// Face values: the equidistant extension `φ(x') + a·y`, clamped between the lower
    /// barrier and the supersolution off the bottom face.
    pub fn face_value(&self, phi: &BoundaryDatum, x: &[f64], y: f64, bottom: bool) -> f64 {
        if bottom {
            return phi.eval(x) + self.slope * y;
        }
        let lo = self.lower.eval(x, y).max(self.sigma(y));
        (phi.eval(x) + self.slope * y).clamp(lo, self.plane.eval(y))
    }

    pub fn initial_state(&self, phi: &BoundaryDatum, start: StartFrom) -> PerronState {
        let grid = self.grid().clone();
        let n = grid.dim();
        let mut u = vec![0.0; grid.len()];
        let mut sigma = vec![0.0; grid.len()];
        let mut w = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let z = grid.coords(k);
            let (x, y) = (&z[..n - 1], z[n - 1]);
            sigma[k] = self.sigma(y);
            w[k] = self.plane.eval(y);
            u[k] = if grid.is_face(k) {
                self.face_value(phi, x, y, grid.is_bottom(k))
            } else {
                match start {
                    StartFrom::Sigma => sigma[k],
                    StartFrom::LowerBarrier => self.lower.eval(x, y).max(sigma[k]).min(w[k]),
                }
            };
        }
        PerronState {
            u: GridFunction { grid: grid.clone(), values: u },
            sigma: GridFunction { grid: grid.clone(), values: sigma },
            w: GridFunction { grid, values: w },
            sweeps: 0,
            increments: Vec::new(),
            residuals: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn default_radius(&self) -> f64 {
        let m = *self.grid().nodes().iter().min().unwrap();
        (((m - 1) / 4) as f64).max(4.0)
    }
}

/// Runs Perron sweeps until the increment and the interior residual are both `≤ tol`.
pub fn run_asymptotic_solve(
    phi: &BoundaryDatum,
    setup: &AsymptoticSetup,
    cfg: &PerronConfig,
) -> Result<(GridFunction, PerronReport, AsymptoticProblem)> {
    let problem = AsymptoticProblem::new(phi, setup, cfg.stacks)?;
    let radius = cfg.ball_radius.unwrap_or_else(|| problem.default_radius());
    let cover = BallCover::new(problem.grid(), radius, cfg.order)?;
    let mut state = problem.initial_state(phi, cfg.start);
    let mut solver = cfg.solver;
    if solver.max_update.is_none() {
        let top = state.w.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bottom = state.sigma.values.iter().copied().fold(f64::INFINITY, f64::min);
        solver.max_update = Some(0.5 * (top - bottom).max(1e-3));
    }
    let cfg = &PerronConfig { solver, ..*cfg };
    let mut final_residual = f64::INFINITY;
    let mut final_increment = f64::INFINITY;
    while state.sweeps < cfg.max_sweeps {
        final_increment = perron_sweep(&mut state, &problem.op, &cover, cfg)?;
        final_residual = interior_residual(&problem.op, &state.u);
        state.residuals.push(final_residual);
        if final_increment <= cfg.tol && final_residual <= cfg.tol {
            break;
        }
    }
    if !(final_increment <= cfg.tol && final_residual <= cfg.tol) {
        return Err(Error::Divergence(format!(
            "Perron sweeps stopped after {} with increment {final_increment:.3e}, residual {final_residual:.3e}",
            state.sweeps
        )));
    }
    let (lo, hi) = state.sandwich_margins();
    let settled = state.increments.windows(2).skip(3).all(|w| w[1] <= w[0] * (1.0 + 1e-6) + cfg.tol);
    let report = PerronReport {
        sweeps: state.sweeps,
        increments: state.increments.clone(),
        residuals: state.residuals.clone(),
        final_residual,
        final_increment,
        worst_violation: state.violations.iter().copied().fold(0.0, f64::min),
        sandwich_lower: lo,
        sandwich_upper: hi,
        ball_radius: radius,
        balls: cover.balls.len(),
        colors: cover.colors.len(),
        supersolution: problem.plane,
        equidistant_slope: problem.slope,
        stacks: problem.lower.stacks.len(),
        increments_settled: settled,
    };
    Ok((state.u, report, problem))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComparisonReport {
    /// `max (u1 − u2)⁺` over all nodes.
    pub max_positive_part: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `u1 ≤ u2 + 10·tol` nodewise.
pub fn comparison_check(u1: &GridFunction, u2: &GridFunction, tol: f64) -> Result<ComparisonReport> {
    if u1.grid != u2.grid {
        return Err(Error::Domain("comparison needs solutions on the same grid".into()));
    }
    let m = u1.values.iter().zip(&u2.values).map(|(a, b)| (a - b).max(0.0)).fold(0.0, f64::max);
    Ok(ComparisonReport { max_positive_part: m, tolerance: 10.0 * tol, pass: m <= 10.0 * tol })
}

/// One sample of the boundary attainment table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AttainmentRow {
    pub x: Vec<f64>,
    /// Height of the first interior row, where attainment is measured.
    pub y: f64,
    pub u: f64,
    pub phi: f64,
    pub error: f64,
    /// `u − lower barrier`.
    pub lower_margin: f64,
    /// `cap bound − u` for a cap over `(φ(x') + gap, x')`, where the cap reaches the row.
    pub upper_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AttainmentReport {
    pub rows: Vec<AttainmentRow>,
    pub max_error: f64,
}

/// Compares the first interior row with `φ` along the bottom face, interior columns only.
pub fn boundary_attainment_report(
    u: &GridFunction,
    phi: &BoundaryDatum,
    problem: &AsymptoticProblem,
    cap_gap: f64,
) -> Result<AttainmentReport> {
    let grid = &u.grid;
    let n = grid.dim();
    let eval = |x: &[f64]| phi.eval(x);
    let mut rows = Vec::new();
    for k in 0..grid.len() {
        let m = grid.multi_index(k);
        if m[n - 1] != 1 || (0..n - 1).any(|a| m[a] == 0 || m[a] + 1 == grid.nodes()[a]) {
            continue;
        }
        let z = grid.coords(k);
        let (x, y) = (z[..n - 1].to_vec(), z[n - 1]);
        let value = u.values[k];
        let p = phi.eval(&x);
        let upper_margin = if n >= 2 {
            let mut q = vec![p + cap_gap];
            q.extend_from_slice(&x);
            let cap = upper_cap_barrier(&IdealPoint::Finite(q), &eval, problem.op.mean_curvature())?;
            cap.bound(&ChartPoint { x: x.clone(), y }).map(|b| b - value)
        } else {
            None
        };
        rows.push(AttainmentRow {
            lower_margin: value - problem.lower.eval(&x, y).max(problem.sigma(y)),
            x,
            y,
            u: value,
            phi: p,
            error: (value - p).abs(),
            upper_margin,
        });
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(AttainmentReport { rows, max_error })
}
