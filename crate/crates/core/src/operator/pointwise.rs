use crate::geometry::{dot, ChartPoint, ExactSolution, KillingKind};
use crate::operator::OrientationConvention;
use crate::{Error, Result};

/// A scalar function on a chart patch with first and second derivatives.
pub trait ScalarPatch {
    fn value(&self, z: &[f64]) -> Result<f64>;
    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>>;
}

impl ScalarPatch for ExactSolution {
    fn value(&self, z: &[f64]) -> Result<f64> {
        ExactSolution::value(self, z)
    }
    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        ExactSolution::gradient(self, z)
    }
    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        ExactSolution::hessian(self, z)
    }
}

/// Derivatives by fourth-order centered differences with step `rel_step · y`.
pub struct FdPatch<F> {
    pub f: F,
    pub rel_step: f64,
    /// Derivatives up to this order are available (1 or 2).
    pub order: usize,
}

impl<F: Fn(&[f64]) -> f64> FdPatch<F> {
    pub fn new(f: F) -> Self {
        Self { f, rel_step: 1e-3, order: 2 }
    }

    fn step(&self, z: &[f64]) -> f64 {
        self.rel_step * z[z.len() - 1]
    }

    fn shifted(&self, z: &[f64], moves: &[(usize, f64)]) -> f64 {
        let mut w = z.to_vec();
        for &(i, d) in moves {
            w[i] += d;
        }
        (self.f)(&w)
    }

    fn d1(&self, z: &[f64], i: usize, h: f64) -> f64 {
        let f = |d: f64| self.shifted(z, &[(i, d)]);
        (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
    }
}

impl<F: Fn(&[f64]) -> f64> ScalarPatch for FdPatch<F> {
    fn value(&self, z: &[f64]) -> Result<f64> {
        Ok((self.f)(z))
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let h = self.step(z);
        Ok((0..z.len()).map(|i| self.d1(z, i, h)).collect())
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.order < 2 {
            return Err(Error::Domain("patch has no second derivatives".into()));
        }
        let n = z.len();
        let h = self.step(z);
        let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut hess = vec![vec![0.0; n]; n];
        for i in 0..n {
            let f = |d: f64| self.shifted(z, &[(i, d)]);
            hess[i][i] = (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
            for j in 0..i {
                let mut s = 0.0;
                for &(a, wa) in &w {
                    for &(b, wb) in &w {
                        s += wa * wb * self.shifted(z, &[(i, a * h), (j, b * h)]);
                    }
                }
                hess[i][j] = s / (144.0 * h * h);
                hess[j][i] = hess[i][j];
            }
        }
        Ok(hess)
    }
}

/// Generic Killing-graph operator
/// `div(∇u / √(γ + |∇u|²)) − γ/√(γ + |∇u|²) · <∇u, ∇̄_Z Z>` in chart coordinates,
/// where the slice carries the metric `|dz|² / y²`.
///
/// `p` and `hess` are the chart gradient and Hessian of `u` at `(x, y)`.
pub fn killing_operator(kind: KillingKind, x: &[f64], y: f64, p: &[f64], hess: &[Vec<f64>]) -> f64 {
    let n = p.len();
    let (gamma, dgamma) = kind.gamma_with_gradient(x, y);
    let b = kind.drift_raw(x, y);
    let p2 = dot(p, p);
    let s = (gamma + y * y * p2).sqrt();
    let iy = n - 1;
    let mut div = 0.0;
    for i in 0..n {
        let hp: f64 = (0..n).map(|j| hess[i][j] * p[j]).sum();
        let ds = (dgamma[i] + if i == iy { 2.0 * y * p2 } else { 0.0 } + 2.0 * y * y * hp) / (2.0 * s);
        let dy2 = if i == iy { 2.0 * y * p[i] } else { 0.0 };
        div += (dy2 + y * y * hess[i][i]) / s - y * y * p[i] * ds / (s * s);
    }
    // Volume factor y^{-n} of the slice metric.
    div -= n as f64 / y * (y * y * p[iy] / s);
    div - gamma / s * dot(p, &b)
}

/// The parabolic operator after simplification:
/// `y · div_E(∇_E u / W) − n · ∂_y u / W` with `W = √(1 + |∇_E u|²)`.
pub fn parabolic_reduced(y: f64, p: &[f64], hess: &[Vec<f64>]) -> f64 {
    let n = p.len();
    let w = (1.0 + dot(p, p)).sqrt();
    let lap: f64 = (0..n).map(|i| hess[i][i]).sum();
    let php: f64 = (0..n).map(|i| (0..n).map(|j| p[i] * hess[i][j] * p[j]).sum::<f64>()).sum();
    y * (lap / w - php / (w * w * w)) - n as f64 * p[n - 1] / w
}

/// The raw operator value `Q(u)` at a chart point.
pub fn q_value(u: &dyn ScalarPatch, z: &ChartPoint, kind: KillingKind) -> Result<f64> {
    let c = z.coords();
    let p = u.gradient(&c)?;
    let hess = u.hessian(&c)?;
    Ok(killing_operator(kind, &z.x, z.y, &p, &hess))
}

/// Oriented residual `n·H_η(u) − n·H`, zero exactly when the Killing graph of `u` has
/// mean curvature `H` with respect to the normal satisfying `<η, Z> ≤ 0`.
pub fn qh_pointwise(
    u: &dyn ScalarPatch,
    z: &ChartPoint,
    kind: KillingKind,
    h: f64,
    conv: OrientationConvention,
) -> Result<f64> {
    Ok(conv.residual(q_value(u, z, kind)?, z.dim(), h))
}
