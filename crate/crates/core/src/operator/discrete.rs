//! Divergence-form discretization of the Killing-graph operator on a [`Grid`].
//!
//! Face fluxes `y_f^{2-n} (δu/h) / S_f` with `S_f = √(γ_f + y_f² |∂u|²_f)` are differenced
//! at each interior node and scaled by the volume factor `y^n`; tangential derivatives
//! on faces are averages of centered differences at the two adjacent nodes. The drift
//! term uses centered differences at the node. The stencil is the `3^n` block.

use crate::geometry::KillingKind;
use crate::grid::{Grid, GridFunction, MAX_DIM};
use crate::operator::OrientationConvention;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    kind: KillingKind,
    forcing: f64,
    h: f64,
    conv: OrientationConvention,
    gamma_node: Vec<f64>,
    drift_node: Vec<[f64; MAX_DIM]>,
    /// `γ` at the midpoint of the face toward `+e_a`, per axis.
    gamma_face: Vec<Vec<f64>>,
}

impl DiscreteOperator {
    pub fn new(grid: &Grid, kind: KillingKind, h: f64, conv: OrientationConvention) -> Result<Self> {
        if !(h.abs() < 1.0) {
            return Err(Error::Domain(format!("mean curvature must satisfy |H| < 1, got {h}")));
        }
        let n = grid.dim();
        let len = grid.len();
        let mut gamma_node = Vec::with_capacity(len);
        let mut drift_node = Vec::with_capacity(len);
        let mut gamma_face = vec![vec![0.0; len]; n];
        for k in 0..len {
            let z = grid.coords(k);
            let (g, _) = kind.gamma_with_gradient(&z[..n - 1], z[n - 1]);
            gamma_node.push(g);
            let b = kind.drift_raw(&z[..n - 1], z[n - 1]);
            let mut bb = [0.0; MAX_DIM];
            bb[..n].copy_from_slice(&b);
            drift_node.push(bb);
            for (a, faces) in gamma_face.iter_mut().enumerate() {
                let mut zf = z;
                zf[a] += 0.5 * grid.spacing()[a];
                faces[k] = kind.gamma_with_gradient(&zf[..n - 1], zf[n - 1]).0;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            kind,
            forcing: conv.forcing(n, h),
            h,
            conv,
            gamma_node,
            drift_node,
            gamma_face,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> KillingKind {
        self.kind
    }

    pub fn mean_curvature(&self) -> f64 {
        self.h
    }

    pub fn convention(&self) -> OrientationConvention {
        self.conv
    }

    /// Centered difference along `axis` at node `k`.
    #[inline]
    fn centered(&self, u: &[f64], k: usize, axis: usize) -> f64 {
        let s = self.grid.strides()[axis];
        (u[k + s] - u[k - s]) / (2.0 * self.grid.spacing()[axis])
    }

    /// Face flux between `k` and `k + e_axis`, with the coefficient `1/S_f` taken from `coef`.
    #[inline]
    fn flux(&self, u: &[f64], coef: &[f64], k: usize, axis: usize, y: f64) -> f64 {
        let n = self.grid.dim();
        let s = self.grid.strides()[axis];
        let h = self.grid.spacing()[axis];
        let d = (u[k + s] - u[k]) / h;
        let dc = (coef[k + s] - coef[k]) / h;
        let mut grad2 = dc * dc;
        for b in (0..n).filter(|&b| b != axis) {
            let t = 0.5 * (self.centered(coef, k, b) + self.centered(coef, k + s, b));
            grad2 += t * t;
        }
        let yf = if axis == n - 1 { y + 0.5 * h } else { y };
        let sf = (self.gamma_face[axis][k] + yf * yf * grad2).sqrt();
        yf.powi(2 - n as i32) * d / sf
    }

    /// `Q_h(u) − f` at an interior node (elliptic form: subsolutions are `≥ 0`).
    pub fn elliptic_residual_at(&self, u: &[f64], k: usize) -> f64 {
        self.residual_with_coefficients(u, u, k)
    }

    /// Residual of the linear operator obtained by freezing the coefficients at `frozen`.
    pub fn frozen_residual_at(&self, u: &[f64], frozen: &[f64], k: usize) -> f64 {
        self.residual_with_coefficients(u, frozen, k)
    }

    fn residual_with_coefficients(&self, u: &[f64], coef: &[f64], k: usize) -> f64 {
        let n = self.grid.dim();
        let z = self.grid.coords(k);
        let y = z[n - 1];
        let mut div = 0.0;
        let mut grad2 = 0.0;
        let mut drift = 0.0;
        for a in 0..n {
            let s = self.grid.strides()[a];
            let h = self.grid.spacing()[a];
            let y_lo = if a == n - 1 { y - h } else { y };
            div += (self.flux(u, coef, k, a, y) - self.flux(u, coef, k - s, a, y_lo)) / h;
            let gc = self.centered(coef, k, a);
            grad2 += gc * gc;
            drift += self.centered(u, k, a) * self.drift_node[k][a];
        }
        let gamma = self.gamma_node[k];
        let sn = (gamma + y * y * grad2).sqrt();
        y.powi(n as i32) * div - gamma / sn * drift - self.forcing
    }

    /// Oriented residual `sign·Q_h − n·H` at an interior node.
    pub fn residual_at(&self, u: &[f64], k: usize) -> f64 {
        self.conv.sign() * self.elliptic_residual_at(u, k)
    }
}

/// Oriented discrete residual at every interior node of the box; face nodes hold 0.
pub fn qh_residual_grid(u: &GridFunction, kind: KillingKind, h: f64, conv: OrientationConvention) -> Result<GridFunction> {
    let op = DiscreteOperator::new(&u.grid, kind, h, conv)?;
    let values = (0..u.grid.len())
        .map(|k| if u.grid.is_face(k) { 0.0 } else { op.residual_at(&u.values, k) })
        .collect();
    Ok(GridFunction { grid: u.grid.clone(), values })
}

/// Max-norm of the residual over interior nodes.
pub fn max_interior_residual(u: &GridFunction, kind: KillingKind, h: f64, conv: OrientationConvention) -> Result<f64> {
    Ok(qh_residual_grid(u, kind, h, conv)?.values.iter().fold(0.0, |m, r| m.max(r.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ExactSolution;
    use crate::operator::fix_orientation_sign;

    fn box2(nodes: usize) -> Grid {
        Grid::chart_box(2, 0.4, 0.2, 0.8, nodes).unwrap()
    }

    #[test]
    fn constants_have_zero_residual() {
        let conv = fix_orientation_sign().unwrap();
        for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
            for n in 1..=3 {
                let g = Grid::chart_box(n, 0.4, 0.2, 0.8, 7).unwrap();
                let u = GridFunction::constant(g, 1.7);
                assert!(max_interior_residual(&u, kind, 0.0, conv).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_function_residual_is_the_forcing() {
        let conv = fix_orientation_sign().unwrap();
        let u = GridFunction::constant(box2(9), 0.0);
        let r = max_interior_residual(&u, KillingKind::Parabolic, 0.5, conv).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn second_order_on_hemisphere() {
        let conv = fix_orientation_sign().unwrap();
        let hemi = ExactSolution::Hemisphere { t: 0.0, r: 1.0 };
        let errs: Vec<f64> = [65, 129, 257]
            .iter()
            .map(|&k| {
                let g = Grid::chart_box(2, 0.3, 0.3, 0.6, k).unwrap();
                let u = GridFunction::try_sample(g, |z| hemi.value(z)).unwrap();
                max_interior_residual(&u, KillingKind::Parabolic, 0.0, conv).unwrap()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.9, "{errs:?}");
        }
    }

    #[test]
    fn rejects_unit_curvature() {
        let conv = fix_orientation_sign().unwrap();
        assert!(DiscreteOperator::new(&box2(5), KillingKind::Parabolic, 1.0, conv).is_err());
    }
}
