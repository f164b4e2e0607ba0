//! Mean curvature of parametric hypersurfaces computed directly from the half-space
//! metric. It shares no code path with the Killing-graph operator and is used to fix
//! and audit the orientation convention.

use crate::geometry::{dot, ChartPoint, KillingKind};
use crate::linalg::solve_small;
use crate::operator::pointwise::killing_operator;
use crate::{Error, Result};

/// Relative finite-difference step (times the height of the surface point).
pub const ORACLE_REL_STEP: f64 = 1e-3;

/// Sign relating the raw operator to the mean curvature `H_η` for the normal with
/// `<η, Z> ≤ 0`, i.e. `n·H_η(u) = sign · Q(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientationConvention {
    sign: i8,
}

impl OrientationConvention {
    pub(crate) fn from_sign(sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        Self { sign }
    }

    pub fn sign(self) -> f64 {
        self.sign as f64
    }

    /// Right-hand side `f` of `Q(u) = f` for target curvature `h` in dimension `n`.
    pub fn forcing(self, n: usize, h: f64) -> f64 {
        self.sign() * n as f64 * h
    }

    /// Oriented residual `sign·Q − n·h` from a raw operator value.
    pub fn residual(self, q: f64, n: usize, h: f64) -> f64 {
        self.sign() * q - n as f64 * h
    }

    /// `Q` is elliptic with positive principal part, so subsolutions have `Q ≥ f`.
    /// In oriented form that is `sign · residual ≥ 0`.
    pub fn is_sub_residual(self, residual: f64, tol: f64) -> bool {
        self.sign() * residual >= -tol
    }

    pub fn is_super_residual(self, residual: f64, tol: f64) -> bool {
        self.sign() * residual <= tol
    }

    /// Slope `a` of the parabolic Killing graph `u = a·y + b` with mean curvature `h`.
    pub fn equidistant_slope(self, h: f64) -> f64 {
        -self.sign() * h / (1.0 - h * h).sqrt()
    }
}

/// How to orient the unit normal of a parametric hypersurface.
#[derive(Debug, Clone)]
pub enum NormalOrientation {
    /// Euclidean normal with nonnegative dot product against the given vector.
    Along(Vec<f64>),
    /// Normal `η` with `<η, Z> ≤ 0` for a Killing field evaluated at the surface point.
    AgainstField(KillingKind),
}

/// `(1/n)·trace` of the shape operator `−∇̄η` of the hypersurface `X(s)` at `s`.
pub fn numerical_mean_curvature(
    patch: &dyn Fn(&[f64]) -> Vec<f64>,
    s: &[f64],
    orientation: &NormalOrientation,
) -> Result<f64> {
    let n = s.len();
    let x0 = patch(s);
    let dim = x0.len();
    if dim != n + 1 {
        return Err(Error::Domain(format!("patch of {n} parameters must map into R^{}", n + 1)));
    }
    let y = x0[n];
    if !(y > 0.0) {
        return Err(Error::Domain("patch point must lie in the half-space".into()));
    }
    let h = ORACLE_REL_STEP * y;
    let at = |moves: &[(usize, f64)]| {
        let mut w = s.to_vec();
        for &(i, d) in moves {
            w[i] += d;
        }
        patch(&w)
    };
    let combine = |terms: &[(f64, Vec<f64>)], scale: f64| -> Vec<f64> {
        (0..dim).map(|c| terms.iter().map(|(w, v)| w * v[c]).sum::<f64>() / scale).collect()
    };
    let stencil = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

    let tangents: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let terms: Vec<(f64, Vec<f64>)> = stencil.iter().map(|&(o, w)| (w, at(&[(i, o * h)]))).collect();
            combine(&terms, 12.0 * h)
        })
        .collect();
    let mut second = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        let terms: Vec<(f64, Vec<f64>)> = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)]
            .iter()
            .map(|&(o, w)| (w, at(&[(i, o * h)])))
            .collect();
        second[i][i] = combine(&terms, 12.0 * h * h);
        for j in 0..i {
            let mut terms = Vec::with_capacity(16);
            for &(a, wa) in &stencil {
                for &(b, wb) in &stencil {
                    terms.push((wa * wb, at(&[(i, a * h), (j, b * h)])));
                }
            }
            second[i][j] = combine(&terms, 144.0 * h * h);
            second[j][i] = second[i][j].clone();
        }
    }

    let mut normal = unit_normal(&tangents)?;
    let reference = match orientation {
        NormalOrientation::Along(v) => v.clone(),
        NormalOrientation::AgainstField(kind) => {
            let p = crate::AmbientPoint::new(x0.clone())?;
            kind.field(&p).iter().map(|c| -c).collect()
        }
    };
    if dot(&normal, &reference) < 0.0 {
        normal.iter_mut().for_each(|c| *c = -*c);
    }

    // Christoffel symbols of |dx|²/y²: Γ(U, V) = −(U_y V + V_y U)/y + (U·V)/y e_y.
    let christoffel = |u: &[f64], v: &[f64]| -> Vec<f64> {
        let mut g: Vec<f64> = (0..dim).map(|c| -(u[n] * v[c] + v[n] * u[c]) / y).collect();
        g[n] += dot(u, v) / y;
        g
    };
    let mut metric = vec![vec![0.0; n]; n];
    let mut form = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            metric[i][j] = dot(&tangents[i], &tangents[j]) / (y * y);
            let cov: Vec<f64> = second[i][j].iter().zip(christoffel(&tangents[i], &tangents[j])).map(|(a, b)| a + b).collect();
            // <∇̄_i X_j, η> with η = y·N and metric factor 1/y².
            form[i][j] = dot(&cov, &normal) / y;
        }
    }
    let mut trace = 0.0;
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| form[i][j]).collect();
        let sol = solve_small(&metric, &col).ok_or_else(|| Error::Domain("degenerate tangent frame".into()))?;
        trace += sol[j];
    }
    Ok(trace / n as f64)
}

/// Euclidean unit normal to the span of `tangents` in `R^{n+1}`.
fn unit_normal(tangents: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = tangents.len() + 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(tangents.len());
    for t in tangents {
        let mut v = t.clone();
        for b in &basis {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
        }
        let len = dot(&v, &v).sqrt();
        if len < 1e-12 * (1.0 + dot(t, t).sqrt()) {
            return Err(Error::Domain("degenerate tangent frame".into()));
        }
        basis.push(v.into_iter().map(|a| a / len).collect());
    }
    let mut best: Option<Vec<f64>> = None;
    let mut best_len = 0.0;
    for k in 0..dim {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for b in &basis {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
        }
        let len = dot(&v, &v).sqrt();
        if len > best_len {
            best_len = len;
            best = Some(v.into_iter().map(|a| a / len).collect());
        }
    }
    best.ok_or_else(|| Error::Domain("degenerate tangent frame".into()))
}

/// Parametrization of the Killing graph of `u` over the chart: `z ↦ Ψ(u(z), z)`.
pub fn killing_graph_patch<'a>(kind: KillingKind, u: &'a dyn Fn(&[f64]) -> f64) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
    move |z: &[f64]| {
        let point = ChartPoint { x: z[..z.len() - 1].to_vec(), y: z[z.len() - 1] };
        kind.graph_point(u(z), &point).into_coords()
    }
}

/// `1/<Z, Z>` evaluated from the model metric at the slice point over `z`.
pub fn gamma_from_metric(kind: KillingKind, z: &ChartPoint) -> Result<f64> {
    let p = kind.slice_map(z);
    let v = kind.field(&p);
    let norm2 = dot(&v, &v) / (p.height() * p.height());
    if !(norm2 > 0.0) {
        return Err(Error::Domain("the Killing field vanishes at this point".into()));
    }
    Ok(1.0 / norm2)
}

/// `∇̄_Z Z` in chart components, from a centered difference of `Z` along its own flow,
/// the Christoffel symbols of the model metric, and a difference Jacobian of the chart.
pub fn drift_from_flow(kind: KillingKind, z: &ChartPoint, step: f64) -> Result<Vec<f64>> {
    let n = z.dim();
    let p = kind.slice_map(z);
    let y = p.height();
    let zf = kind.field(&p);
    let ahead = kind.field(&kind.flow(step, &p));
    let behind = kind.field(&kind.flow(-step, &p));
    let mut b: Vec<f64> = ahead.iter().zip(&behind).map(|(a, c)| (a - c) / (2.0 * step)).collect();
    let zy = zf[n];
    for (bc, zc) in b.iter_mut().zip(&zf) {
        *bc -= 2.0 * zy * zc / y;
    }
    b[n] += dot(&zf, &zf) / y;
    let c = z.coords();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut fwd = c.clone();
            let mut bwd = c.clone();
            fwd[i] += step;
            bwd[i] -= step;
            let a = kind.slice_map(&ChartPoint::from_coords(&fwd)?).into_coords();
            let d = kind.slice_map(&ChartPoint::from_coords(&bwd)?).into_coords();
            Ok(a.iter().zip(&d).map(|(u, v)| (u - v) / (2.0 * step)).collect())
        })
        .collect::<Result<_>>()?;
    let normal: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dot(&columns[i], &columns[j])).collect()).collect();
    let rhs: Vec<f64> = columns.iter().map(|col| dot(col, &b)).collect();
    solve_small(&normal, &rhs).ok_or_else(|| Error::Domain("degenerate chart Jacobian".into()))
}

/// Determines the orientation sign from the tilted plane `u = y`, then checks it
/// against the second anchor: the equidistant supersolution through `E_2` must have
/// nonnegative slope.
pub fn fix_orientation_sign() -> Result<OrientationConvention> {
    let n = 2;
    let plane = |z: &[f64]| z[z.len() - 1];
    let patch = killing_graph_patch(KillingKind::Parabolic, &plane);
    let z = [0.3, 0.7];
    let mc = numerical_mean_curvature(&patch, &z, &NormalOrientation::AgainstField(KillingKind::Parabolic))?;
    let hess = vec![vec![0.0; n]; n];
    let q = killing_operator(KillingKind::Parabolic, &z[..1], z[1], &[0.0, 1.0], &hess);
    let ratio = mc / (q / n as f64);
    let sign: i8 = if ratio > 0.0 { 1 } else { -1 };
    if (ratio - sign as f64).abs() > 1e-6 {
        return Err(Error::Orientation(format!(
            "oracle mean curvature {mc} is not ±Q/n = {}",
            q / n as f64
        )));
    }
    let conv = OrientationConvention::from_sign(sign);
    for h in [0.5f64, -0.5] {
        let a = h.abs() / (1.0 - h * h).sqrt();
        let q_of = |slope: f64| killing_operator(KillingKind::Parabolic, &z[..1], z[1], &[0.0, slope], &hess);
        let super_pos = conv.is_super_residual(conv.residual(q_of(a), n, h), 1e-12);
        let super_neg_strict = conv.sign() * conv.residual(q_of(-a), n, h) < -1e-12;
        if !super_pos || (h > 0.0 && super_neg_strict) {
            return Err(Error::Orientation(format!(
                "sign {sign}: the nonnegative-slope equidistant plane is not the supersolution for H = {h}"
            )));
        }
    }
    Ok(conv)
}
