//! Damped Newton solver for the discrete Dirichlet problem `Q_h(u) = f` on a node mask.
//!
//! Nodes outside the solve set keep their values and act as boundary data. The
//! Jacobian is assembled by colored finite differences (the stencil is the `3^n`
//! block, so nodes congruent mod 3 in every axis never share a residual) and
//! factored as a banded matrix.
//!
//! The mean-convexity hypothesis of the continuous Dirichlet theory is not checked;
//! a solve that cannot reduce its residual reports [`Error::Divergence`]. The
//! Ricci bound of that theory holds automatically on `H^n`.

use std::collections::VecDeque;

use crate::grid::{GridFunction, MAX_DIM};
use crate::linalg::{BandedLu, BandedMatrix};
use crate::operator::DiscreteOperator;
use crate::{Error, Result};

/// Which nodes of the grid are solved for.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// All nodes off the box faces.
    Box,
    /// Closed Euclidean ball in index space around a node.
    Ball { center: Vec<usize>, radius: f64 },
    /// Closed domain given as a node mask.
    Mask(Vec<bool>),
}

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub op: DiscreteOperator,
    /// Flat indices of the solved nodes, ascending.
    unknowns: Vec<usize>,
    /// `unknown_of[k]` is the position of node `k` in `unknowns`, or `usize::MAX`.
    unknown_of: Vec<usize>,
}

impl DirichletProblem {
    /// A node is solved for when it and its whole `3^n` block lie in the closed
    /// domain and it is off the box faces.
    pub fn new(op: DiscreteOperator, domain: &Domain) -> Result<Self> {
        let grid = op.grid().clone();
        let closed: Vec<bool> = match domain {
            Domain::Box => vec![true; grid.len()],
            Domain::Mask(m) => {
                if m.len() != grid.len() {
                    return Err(Error::Domain("mask size does not match grid".into()));
                }
                m.clone()
            }
            Domain::Ball { center, radius } => (0..grid.len())
                .map(|k| {
                    let m = grid.multi_index(k);
                    let d2: f64 = center.iter().enumerate().map(|(a, &c)| (m[a] as f64 - c as f64).powi(2)).sum();
                    d2 <= radius * radius + 1e-9
                })
                .collect(),
        };
        let mut unknown_of = vec![usize::MAX; grid.len()];
        let mut unknowns = Vec::new();
        for k in 0..grid.len() {
            if !closed[k] || grid.is_face(k) {
                continue;
            }
            let mut inside = true;
            grid.for_each_neighbor(k, |j| inside &= closed[j]);
            if inside {
                unknown_of[k] = unknowns.len();
                unknowns.push(k);
            }
        }
        if unknowns.is_empty() {
            return Err(Error::Domain("domain has no interior nodes".into()));
        }
        let p = Self { op, unknowns, unknown_of };
        if !p.is_connected() {
            return Err(Error::Domain("solve set is not connected".into()));
        }
        Ok(p)
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn is_unknown(&self, k: usize) -> bool {
        self.unknown_of[k] != usize::MAX
    }

    fn is_connected(&self) -> bool {
        let grid = self.op.grid();
        let mut seen = vec![false; grid.len()];
        let mut queue = VecDeque::from([self.unknowns[0]]);
        seen[self.unknowns[0]] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            grid.for_each_neighbor(k, |j| {
                if self.is_unknown(j) && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            });
        }
        count == self.unknowns.len()
    }

    fn residuals(&self, u: &[f64]) -> Vec<f64> {
        self.unknowns.iter().map(|&k| self.op.elliptic_residual_at(u, k)).collect()
    }

    fn bandwidth(&self) -> usize {
        let grid = self.op.grid();
        let mut bw = 0;
        for (i, &k) in self.unknowns.iter().enumerate() {
            grid.for_each_neighbor(k, |j| {
                let uj = self.unknown_of[j];
                if uj != usize::MAX {
                    bw = bw.max(uj.abs_diff(i));
                }
            });
        }
        bw
    }

    /// Finite-difference Jacobian of `residual` with respect to the unknowns.
    fn jacobian(&self, u: &mut [f64], base: &[f64], residual: impl Fn(&[f64], usize) -> f64) -> BandedMatrix {
        let grid = self.op.grid();
        let n = grid.dim();
        let bw = self.bandwidth();
        let mut jac = BandedMatrix::zeros(self.unknowns.len(), bw, bw);
        let colors = 3usize.pow(n as u32);
        let mut steps = vec![0.0; grid.len()];
        for color in 0..colors {
            let mut digits = [0usize; MAX_DIM];
            let mut c = color;
            for d in digits.iter_mut().take(n) {
                *d = c % 3;
                c /= 3;
            }
            let in_color = |k: usize| {
                let m = grid.multi_index(k);
                (0..n).all(|a| m[a] % 3 == digits[a])
            };
            let mut any = false;
            for &k in &self.unknowns {
                if in_color(k) {
                    let d = 1e-7 * u[k].abs().max(1.0);
                    steps[k] = d;
                    u[k] += d;
                    any = true;
                }
            }
            if !any {
                continue;
            }
            for (i, &k) in self.unknowns.iter().enumerate() {
                let r = residual(u, k);
                let mut hit = |j: usize| {
                    if self.is_unknown(j) && in_color(j) {
                        jac.add(i, self.unknown_of[j], (r - base[i]) / steps[j]);
                    }
                };
                hit(k);
                grid.for_each_neighbor(k, &mut hit);
            }
            for &k in &self.unknowns {
                if in_color(k) {
                    u[k] -= steps[k];
                }
            }
        }
        jac
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Max-norm residual tolerance at solved nodes.
    pub tol: f64,
    pub max_iters: usize,
    /// Frozen-coefficient sweeps tried when Newton backtracking stalls.
    pub picard_sweeps: usize,
    /// Smallest Newton damping factor before falling back.
    pub min_step: f64,
    /// Largest nodewise change accepted in one Newton step; longer steps are scaled down.
    #[serde(default)]
    pub max_update: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 60, picard_sweeps: 50, min_step: 2f64.powi(-20), max_update: None }
    }
}

/// Starting iterate inside the solve set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    AsGiven,
    BoundaryMean,
    /// Discrete Euclidean-harmonic extension of the boundary values.
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GradientBand {
    /// Minimum index distance to the non-solved nodes.
    pub min_distance: usize,
    /// Sup of the centered-difference chart gradient over the band.
    pub sup_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// Accepted damping factor per Newton step (0 marks a frozen-coefficient sweep).
    pub damping: Vec<f64>,
    pub bands: Vec<GradientBand>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}

/// Solves the Dirichlet problem. Non-solved nodes of `initial` are the boundary data.
pub fn solve_dirichlet(
    p: &DirichletProblem,
    initial: &GridFunction,
    guess: InitialGuess,
    cfg: &SolverConfig,
) -> Result<(GridFunction, SolveReport)> {
    if initial.grid != *p.op.grid() {
        return Err(Error::Domain("initial data live on a different grid".into()));
    }
    let mut u = initial.values.clone();
    apply_guess(p, &mut u, guess)?;
    let mut res = p.residuals(&u);
    let mut norm = max_abs(&res);
    let mut damping = Vec::new();
    let mut iters = 0;
    let mut stale: Option<BandedLu> = None;
    let mut slow = 0;
    while norm > cfg.tol {
        if iters >= cfg.max_iters {
            return Err(Error::Divergence(format!("residual {norm:.3e} after {iters} iterations")));
        }
        iters += 1;
        // Chord step with the previous factorization, kept while it contracts well.
        if let Some(lu) = &stale {
            let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
            lu.solve(&mut step);
            if cfg.max_update.map_or(true, |cap| max_abs(&step) <= cap) {
                let mut trial = u.clone();
                for (i, &k) in p.unknowns.iter().enumerate() {
                    trial[k] += step[i];
                }
                let trial_res = p.residuals(&trial);
                let trial_norm = max_abs(&trial_res);
                if trial_norm.is_finite() && trial_norm <= 0.5 * norm {
                    u = trial;
                    res = trial_res;
                    norm = trial_norm;
                    damping.push(1.0);
                    continue;
                }
            }
            stale = None;
        }
        let jac = p.jacobian(&mut u, &res, |v, k| p.op.elliptic_residual_at(v, k));
        let lu = jac.factor().ok_or_else(|| Error::Divergence("singular Newton Jacobian".into()))?;
        let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
        lu.solve(&mut step);
        let longest = max_abs(&step);
        let mut lambda = match cfg.max_update {
            Some(cap) if longest > cap => cap / longest,
            _ => 1.0,
        };
        let accepted = loop {
            let mut trial = u.clone();
            for (i, &k) in p.unknowns.iter().enumerate() {
                trial[k] += lambda * step[i];
            }
            let trial_res = p.residuals(&trial);
            let trial_norm = max_abs(&trial_res);
            if trial_norm.is_finite() && trial_norm < (1.0 - 1e-4 * lambda) * norm {
                slow = if trial_norm > 0.9 * norm { slow + 1 } else { 0 };
                u = trial;
                res = trial_res;
                norm = trial_norm;
                break true;
            }
            lambda *= 0.5;
            if lambda < cfg.min_step {
                break false;
            }
        };
        if accepted {
            damping.push(lambda);
            // Saturated fluxes let Newton creep along a runaway direction.
            if slow < 3 {
                stale = Some(lu);
                continue;
            }
            slow = 0;
        }
        // Frozen-coefficient fallback.
        let before = norm;
        for _ in 0..cfg.picard_sweeps {
            let frozen = u.clone();
            let jac = p.jacobian(&mut u, &res, |v, k| p.op.frozen_residual_at(v, &frozen, k));
            let lu = jac.factor().ok_or_else(|| Error::Divergence("singular frozen-coefficient system".into()))?;
            let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
            lu.solve(&mut step);
            for (i, &k) in p.unknowns.iter().enumerate() {
                u[k] += step[i];
            }
            res = p.residuals(&u);
            norm = max_abs(&res);
            damping.push(0.0);
            if !norm.is_finite() || norm <= cfg.tol {
                break;
            }
        }
        if !norm.is_finite() || norm >= before {
            return Err(Error::Divergence(format!(
                "Newton stalled at residual {before:.3e} and frozen-coefficient sweeps did not help"
            )));
        }
    }
    let solved = GridFunction { grid: initial.grid.clone(), values: u };
    let bands = gradient_diagnostic(&solved, p);
    Ok((solved, SolveReport { iterations: iters, final_residual: norm, damping, bands }))
}

fn apply_guess(p: &DirichletProblem, u: &mut [f64], guess: InitialGuess) -> Result<()> {
    let grid = p.op.grid();
    match guess {
        InitialGuess::AsGiven => {}
        InitialGuess::BoundaryMean => {
            let mut sum = 0.0;
            let mut count = 0usize;
            for &k in &p.unknowns {
                grid.for_each_neighbor(k, |j| {
                    if !p.is_unknown(j) {
                        sum += u[j];
                        count += 1;
                    }
                });
            }
            let mean = sum / count.max(1) as f64;
            for &k in &p.unknowns {
                u[k] = mean;
            }
        }
        InitialGuess::Harmonic => {
            let n = grid.dim();
            let bw = p.bandwidth();
            let mut m = BandedMatrix::zeros(p.unknowns.len(), bw, bw);
            let mut rhs = vec![0.0; p.unknowns.len()];
            for (i, &k) in p.unknowns.iter().enumerate() {
                for a in 0..n {
                    let w = 1.0 / grid.spacing()[a].powi(2);
                    let s = grid.strides()[a];
                    m.add(i, i, -2.0 * w);
                    for j in [k - s, k + s] {
                        if p.is_unknown(j) {
                            m.add(i, p.unknown_of[j], w);
                        } else {
                            rhs[i] -= w * u[j];
                        }
                    }
                }
            }
            let lu = m.factor().ok_or_else(|| Error::Domain("singular harmonic extension".into()))?;
            lu.solve(&mut rhs);
            for (i, &k) in p.unknowns.iter().enumerate() {
                u[k] = rhs[i];
            }
        }
    }
    Ok(())
}

/// Max-norm of the oriented residual over the solved nodes.
pub fn residual_norm(u: &GridFunction, p: &DirichletProblem) -> f64 {
    p.unknowns.iter().map(|&k| p.op.residual_at(&u.values, k).abs()).fold(0.0, f64::max)
}

/// Sup of the chart gradient over nested bands `{distance ≥ r}`, `r = 1, 2, 4, ...`.
pub fn gradient_diagnostic(u: &GridFunction, p: &DirichletProblem) -> Vec<GradientBand> {
    let grid = &u.grid;
    let n = grid.dim();
    let mut dist = vec![usize::MAX; grid.len()];
    let mut queue = VecDeque::new();
    for k in 0..grid.len() {
        if !p.is_unknown(k) {
            dist[k] = 0;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let d = dist[k];
        grid.for_each_neighbor(k, |j| {
            if dist[j] == usize::MAX {
                dist[j] = d + 1;
                queue.push_back(j);
            }
        });
    }
    let grad: Vec<(usize, f64)> = p
        .unknowns
        .iter()
        .map(|&k| {
            let g2: f64 = (0..n)
                .map(|a| {
                    let s = grid.strides()[a];
                    ((u.values[k + s] - u.values[k - s]) / (2.0 * grid.spacing()[a])).powi(2)
                })
                .sum();
            (dist[k], g2.sqrt())
        })
        .collect();
    let max_d = grad.iter().map(|g| g.0).max().unwrap_or(0);
    let mut bands = Vec::new();
    let mut r = 1;
    while r <= max_d {
        let sup = grad.iter().filter(|g| g.0 >= r).map(|g| g.1).fold(0.0, f64::max);
        bands.push(GradientBand { min_distance: r, sup_gradient: sup });
        r *= 2;
    }
    bands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ExactSolution, KillingKind};
    use crate::grid::Grid;
    use crate::operator::fix_orientation_sign;

    fn op(nodes: usize, h: f64) -> DiscreteOperator {
        let conv = fix_orientation_sign().unwrap();
        let grid = Grid::chart_box(2, 0.4, 0.2, 0.8, nodes).unwrap();
        DiscreteOperator::new(&grid, KillingKind::Parabolic, h, conv).unwrap()
    }

    #[test]
    fn constant_data_give_constant_solution() {
        let o = op(17, 0.0);
        let grid = o.grid().clone();
        let p = DirichletProblem::new(o, &Domain::Ball { center: vec![8, 8], radius: 6.0 }).unwrap();
        let mut init = GridFunction::constant(grid, 0.7);
        for &k in p.unknowns() {
            init.values[k] = 0.0;
        }
        let (u, rep) = solve_dirichlet(&p, &init, InitialGuess::AsGiven, &SolverConfig::default()).unwrap();
        assert!(u.values.iter().all(|v| (v - 0.7).abs() < 1e-9));
        assert!(rep.final_residual <= 1e-10);
        assert!(rep.bands.iter().all(|b| b.sup_gradient < 1e-8));
    }

    #[test]
    fn single_node_perturbation_scales_like_inverse_h_squared() {
        let o = op(33, 0.0);
        let grid = o.grid().clone();
        let p = DirichletProblem::new(o, &Domain::Box).unwrap();
        let delta = 1e-6;
        let mut u = GridFunction::constant(grid.clone(), 0.3);
        let k = grid.index(&[16, 16]);
        u.values[k] += delta;
        let r = residual_norm(&u, &p);
        let y = grid.coords(k)[1];
        let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
        // Diagonal of y^n·y^{2-n}/(yW)·Δ_h at W = 1 is 2y/h_x² + 2y/h_y².
        let expected = 2.0 * y * delta * (1.0 / (hx * hx) + 1.0 / (hy * hy));
        assert!((r / expected - 1.0).abs() < 0.05, "{r} vs {expected}");
    }

    #[test]
    fn guesses_agree() {
        let hemi = ExactSolution::Hemisphere { t: 0.1, r: 1.0 };
        let o = op(17, 0.0);
        let grid = o.grid().clone();
        let p = DirichletProblem::new(o, &Domain::Box).unwrap();
        let init = GridFunction::try_sample(grid, |z| hemi.value(z)).unwrap();
        let cfg = SolverConfig::default();
        let (a, _) = solve_dirichlet(&p, &init, InitialGuess::Harmonic, &cfg).unwrap();
        let (b, _) = solve_dirichlet(&p, &init, InitialGuess::BoundaryMean, &cfg).unwrap();
        assert!(a.max_abs_diff(&b) <= 10.0 * cfg.tol);
    }

    #[test]
    fn flat_start_does_not_run_away() {
        let conv = fix_orientation_sign().unwrap();
        let grid = Grid::chart_box(2, 0.5, 0.2, 1.2, 17).unwrap();
        let o = DiscreteOperator::new(&grid, KillingKind::Parabolic, 0.1445, conv).unwrap();
        let p = DirichletProblem::new(o, &Domain::Box).unwrap();
        let init = GridFunction::sample(grid, |z| 0.0418 * (3.0 * z[0]).sin() + 0.426 * z[1]);
        let cfg = SolverConfig::default();
        let (a, _) = solve_dirichlet(&p, &init, InitialGuess::Harmonic, &cfg).unwrap();
        let (b, rep) = solve_dirichlet(&p, &init, InitialGuess::BoundaryMean, &cfg).unwrap();
        assert!(a.max_abs_diff(&b) <= 10.0 * cfg.tol);
        assert!(rep.damping.contains(&0.0));
    }

    #[test]
    fn disconnected_mask_rejected() {
        let o = op(17, 0.0);
        let grid = o.grid().clone();
        let mask: Vec<bool> = (0..grid.len()).map(|k| {
            let m = grid.multi_index(k);
            m[0] != 8
        }).collect();
        assert!(DirichletProblem::new(o, &Domain::Mask(mask)).is_err());
    }
}
