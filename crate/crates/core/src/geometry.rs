//! Half-space model of hyperbolic space `H^{n+1}` and the Killing structures
//! used to write hypersurfaces as Killing graphs over a totally geodesic slice.
//!
//! Ambient points are stored as `(x_1, ..., x_n, y)` with `y > 0`. The slice
//! `M = H^n` is the vertical hyperplane `{x_1 = 0}`, charted by `(x_2, ..., x_n, y)`.
//! The ideal boundary is `{y = 0}` plus the point at infinity, which is the fixed
//! point of the parabolic field.

use crate::{Error, Result};

/// A point of the half-space `{y > 0}` in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    coords: Vec<f64>,
}

impl AmbientPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        match coords.last() {
            Some(&y) if coords.len() >= 2 && y > 0.0 && coords.iter().all(|c| c.is_finite()) => {
                Ok(Self { coords })
            }
            _ => Err(Error::Domain(format!(
                "ambient point must have at least 2 finite coordinates and y > 0, got {coords:?}"
            ))),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn euclidean_norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A point of the slice `M`: tangential coordinates `x` (length `n - 1`) and height `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl ChartPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("chart point needs y > 0, got y = {y}")));
        }
        Ok(Self { x, y })
    }

    /// Dimension `n` of the slice.
    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// Chart coordinates as one vector `(x, y)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.push(self.y);
        z
    }

    pub fn from_coords(z: &[f64]) -> Result<Self> {
        let (y, x) = z.split_last().ok_or_else(|| Error::Domain("empty chart coordinates".into()))?;
        Self::new(x.to_vec(), *y)
    }

    /// The point `(0, x, y)` of the vertical slice `{x_1 = 0}`.
    pub fn on_vertical_slice(&self) -> AmbientPoint {
        let mut c = Vec::with_capacity(self.dim() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.x);
        c.push(self.y);
        AmbientPoint { coords: c }
    }
}

/// A point of the ideal boundary `{y = 0} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealPoint {
    Finite(Vec<f64>),
    Infinity,
}

/// A codimension-one sphere of the ideal boundary. Spheres through `∞` are flat.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealSphere {
    Round { center: Vec<f64>, radius: f64 },
    Flat { normal: Vec<f64>, offset: f64 },
}

impl IdealSphere {
    pub fn round(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ideal sphere radius must be positive, got {radius}")));
        }
        Ok(IdealSphere::Round { center, radius })
    }

    pub fn flat(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = norm(&normal);
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("flat ideal sphere normal must be unit, |n| = {len}")));
        }
        Ok(IdealSphere::Flat { normal, offset })
    }

    /// Whether the sphere passes through the ideal point.
    pub fn contains(&self, p: &IdealPoint, tol: f64) -> bool {
        match (self, p) {
            (IdealSphere::Flat { .. }, IdealPoint::Infinity) => true,
            (IdealSphere::Round { .. }, IdealPoint::Infinity) => false,
            (IdealSphere::Flat { normal, offset }, IdealPoint::Finite(q)) => (dot(normal, q) - offset).abs() <= tol,
            (IdealSphere::Round { center, radius }, IdealPoint::Finite(q)) => (dist(center, q) - radius).abs() <= tol,
        }
    }
}

/// Which Killing field generates the graph structure.
///
/// `Parabolic` is the horizontal translation `Y = ∂_{x_1}` fixing `∞`, whose orbits
/// are horocycles orthogonal to the vertical slice. `Hyperbolic` is the dilation field
/// `X = P` fixing `0` and `∞`; its slice is the unit hemisphere, reached from the
/// vertical chart by [`KillingKind::slice_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KillingKind {
    Parabolic,
    Hyperbolic,
}

/// Center of the inversion that maps the vertical slice onto the unit hemisphere.
fn slice_inversion(n: usize) -> Primitive {
    let mut center = vec![0.0; n];
    center[0] = -1.0;
    Primitive::Invert { center, radius: std::f64::consts::SQRT_2 }
}

impl KillingKind {
    /// Killing field at an ambient point, in Euclidean components.
    pub fn field(self, p: &AmbientPoint) -> Vec<f64> {
        match self {
            KillingKind::Parabolic => {
                let mut v = vec![0.0; p.dim()];
                v[0] = 1.0;
                v
            }
            KillingKind::Hyperbolic => p.coords.clone(),
        }
    }

    /// `1/<Z, Z>` at an ambient point.
    pub fn gamma_ambient(self, p: &AmbientPoint) -> Result<f64> {
        let y = p.height();
        match self {
            KillingKind::Parabolic => Ok(y * y),
            KillingKind::Hyperbolic => {
                let r2 = dot(&p.coords, &p.coords);
                if r2 == 0.0 {
                    return Err(Error::Domain("dilation field vanishes at the origin".into()));
                }
                Ok(y * y / r2)
            }
        }
    }

    /// Map from the vertical chart `(x, y)` to the slice orthogonal to the orbits.
    pub fn slice_map(self, z: &ChartPoint) -> AmbientPoint {
        let p = z.on_vertical_slice();
        match self {
            KillingKind::Parabolic => p,
            KillingKind::Hyperbolic => slice_inversion(z.dim()).apply(&p),
        }
    }

    /// `γ` as a function on the slice, evaluated through the chart.
    pub fn gamma(self, z: &ChartPoint) -> f64 {
        let (g, _) = self.gamma_with_gradient(&z.x, z.y);
        g
    }

    /// `γ` and its chart gradient, from raw chart coordinates.
    pub fn gamma_with_gradient(self, x: &[f64], y: f64) -> (f64, Vec<f64>) {
        let n = x.len() + 1;
        let mut grad = vec![0.0; n];
        match self {
            KillingKind::Parabolic => {
                grad[n - 1] = 2.0 * y;
                (y * y, grad)
            }
            KillingKind::Hyperbolic => {
                // On the unit hemisphere γ = y_amb², with y_amb = 2y / (1 + |z|²).
                let s = 1.0 + dot(x, x) + y * y;
                let g = 4.0 * y * y / (s * s);
                for (gi, xi) in grad.iter_mut().zip(x) {
                    *gi = -16.0 * y * y * xi / (s * s * s);
                }
                grad[n - 1] = 8.0 * y / (s * s) - 16.0 * y * y * y / (s * s * s);
                (g, grad)
            }
        }
    }

    /// Chart components of `∇̄_Z Z` at a slice point.
    pub fn drift(self, z: &ChartPoint) -> Vec<f64> {
        self.drift_raw(&z.x, z.y)
    }

    pub fn drift_raw(self, x: &[f64], y: f64) -> Vec<f64> {
        let n = x.len() + 1;
        match self {
            KillingKind::Parabolic => {
                let mut b = vec![0.0; n];
                b[n - 1] = 1.0 / y;
                b
            }
            KillingKind::Hyperbolic => {
                let z = ChartPoint { x: x.to_vec(), y };
                let inv = slice_inversion(n);
                let p = inv.apply(&z.on_vertical_slice());
                let b_amb = dilation_self_derivative(&p);
                // The inversion is an involution, so its differential at p pulls back to the chart.
                let v = inv.differential(&p, &b_amb);
                v[1..].to_vec()
            }
        }
    }

    /// Flow of the field for time `s`.
    pub fn flow(self, s: f64, p: &AmbientPoint) -> AmbientPoint {
        let mut c = p.coords.clone();
        match self {
            KillingKind::Parabolic => c[0] += s,
            KillingKind::Hyperbolic => {
                let k = s.exp();
                c.iter_mut().for_each(|v| *v *= k);
            }
        }
        AmbientPoint { coords: c }
    }

    /// `Ψ(u, x)`: the Killing graph point over a chart point.
    pub fn graph_point(self, u: f64, z: &ChartPoint) -> AmbientPoint {
        self.flow(u, &self.slice_map(z))
    }
}

/// `∇̄_X X` for the dilation field `X = P` in the half-space metric.
fn dilation_self_derivative(p: &AmbientPoint) -> Vec<f64> {
    let y = p.height();
    let r2 = dot(&p.coords, &p.coords);
    let mut b: Vec<f64> = p.coords.iter().map(|c| -c).collect();
    let last = b.len() - 1;
    b[last] += r2 / y;
    b
}

/// Hyperbolic distance in the half-space model.
pub fn hyperbolic_distance(p: &AmbientPoint, q: &AmbientPoint) -> f64 {
    let chord = dist(&p.coords, &q.coords);
    2.0 * (chord / (2.0 * (p.height() * q.height()).sqrt())).asinh()
}

/// One isometry of the half-space model.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Translation parallel to the ideal plane.
    Translate(Vec<f64>),
    /// Dilation about the origin.
    Dilate(f64),
    /// Orthogonal map of the boundary coordinates, stored row-major.
    Rotate(Vec<Vec<f64>>),
    /// Inversion in the hemisphere of given center (on `{y = 0}`) and radius.
    Invert { center: Vec<f64>, radius: f64 },
}

impl Primitive {
    pub fn apply(&self, p: &AmbientPoint) -> AmbientPoint {
        let n = p.dim() - 1;
        let mut c = p.coords.clone();
        match self {
            Primitive::Translate(v) => c[..n].iter_mut().zip(v).for_each(|(a, b)| *a += b),
            Primitive::Dilate(k) => c.iter_mut().for_each(|a| *a *= k),
            Primitive::Rotate(m) => {
                for (i, row) in m.iter().enumerate() {
                    c[i] = dot(row, &p.coords[..n]);
                }
            }
            Primitive::Invert { center, radius } => {
                let mut d = p.coords.clone();
                d[..n].iter_mut().zip(center).for_each(|(a, b)| *a -= b);
                let k = radius * radius / dot(&d, &d);
                for i in 0..=n {
                    let base = if i < n { center[i] } else { 0.0 };
                    c[i] = base + k * d[i];
                }
            }
        }
        AmbientPoint { coords: c }
    }

    pub fn inverse(&self) -> Primitive {
        match self {
            Primitive::Translate(v) => Primitive::Translate(v.iter().map(|a| -a).collect()),
            Primitive::Dilate(k) => Primitive::Dilate(1.0 / k),
            Primitive::Rotate(m) => {
                let n = m.len();
                Primitive::Rotate((0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect())
            }
            inv @ Primitive::Invert { .. } => inv.clone(),
        }
    }

    /// Differential at `p` applied to the Euclidean vector `v`.
    pub fn differential(&self, p: &AmbientPoint, v: &[f64]) -> Vec<f64> {
        let n = p.dim() - 1;
        match self {
            Primitive::Translate(_) => v.to_vec(),
            Primitive::Dilate(k) => v.iter().map(|a| a * k).collect(),
            Primitive::Rotate(m) => {
                let mut out = v.to_vec();
                for (i, row) in m.iter().enumerate() {
                    out[i] = dot(row, &v[..n]);
                }
                out
            }
            Primitive::Invert { center, radius } => {
                let mut d = p.coords.clone();
                d[..n].iter_mut().zip(center).for_each(|(a, b)| *a -= b);
                let d2 = dot(&d, &d);
                let k = radius * radius / d2;
                let dv = dot(&d, v);
                v.iter().zip(&d).map(|(vi, di)| k * (vi - 2.0 * dv * di / d2)).collect()
            }
        }
    }
}

/// A composition of primitives, applied first to last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Isometry {
    pub steps: Vec<Primitive>,
}

impl Isometry {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn then(mut self, step: Primitive) -> Self {
        self.steps.push(step);
        self
    }

    pub fn apply(&self, p: &AmbientPoint) -> AmbientPoint {
        self.steps.iter().fold(p.clone(), |acc, s| s.apply(&acc))
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { steps: self.steps.iter().rev().map(Primitive::inverse).collect() }
    }
}

/// Closed-form functions on the slice used as oracles.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExactSolution {
    Constant { c: f64 },
    /// `a·y + b`
    TiltedPlane { a: f64, b: f64 },
    /// `t + sqrt(R² − |(x, y)|²)`
    Hemisphere { t: f64, r: f64 },
}

impl ExactSolution {
    /// Value at chart coordinates `z = (x, y)`.
    pub fn value(&self, z: &[f64]) -> Result<f64> {
        let y = z[z.len() - 1];
        match *self {
            ExactSolution::Constant { c } => Ok(c),
            ExactSolution::TiltedPlane { a, b } => Ok(a * y + b),
            ExactSolution::Hemisphere { t, r } => {
                let q = r * r - dot(z, z);
                if q <= 0.0 {
                    return Err(Error::Domain(format!(
                        "hemisphere of radius {r} evaluated outside its disk at {z:?}"
                    )));
                }
                Ok(t + q.sqrt())
            }
        }
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<f64> {
        self.value(&p.coords())
    }

    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = z.len();
        match *self {
            ExactSolution::Constant { .. } => Ok(vec![0.0; n]),
            ExactSolution::TiltedPlane { a, .. } => {
                let mut g = vec![0.0; n];
                g[n - 1] = a;
                Ok(g)
            }
            ExactSolution::Hemisphere { t, .. } => {
                let s = self.value(z)? - t;
                Ok(z.iter().map(|zi| -zi / s).collect())
            }
        }
    }

    pub fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = z.len();
        match *self {
            ExactSolution::Constant { .. } | ExactSolution::TiltedPlane { .. } => Ok(vec![vec![0.0; n]; n]),
            ExactSolution::Hemisphere { t, .. } => {
                let s = self.value(z)? - t;
                Ok((0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let delta = if i == j { 1.0 } else { 0.0 };
                                -delta / s - z[i] * z[j] / (s * s * s)
                            })
                            .collect()
                    })
                    .collect())
            }
        }
    }
}

/// Result of checking that boundary data lie between `E_1` and `E_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetweenSpheres {
    pub holds: bool,
    /// First sample that violates `0 ≤ φ ≤ c`, with its value.
    pub witness: Option<(Vec<f64>, f64)>,
}

/// Checks `0 ≤ φ(x) ≤ c` on the given samples, where `E_1 = {x_1 = 0}` and `E_2 = {x_1 = c}`.
pub fn between_spheres_check<F>(phi: F, samples: &[Vec<f64>], e1: &IdealSphere, e2: &IdealSphere) -> Result<BetweenSpheres>
where
    F: Fn(&[f64]) -> f64,
{
    let (n1, o1, n2, o2) = match (e1, e2) {
        (IdealSphere::Flat { normal: n1, offset: o1 }, IdealSphere::Flat { normal: n2, offset: o2 }) => (n1, *o1, n2, *o2),
        _ => return Err(Error::Domain("between-spheres check needs two flat ideal spheres".into())),
    };
    let e0_aligned = |v: &[f64]| (v[0] - 1.0).abs() < 1e-12 && v[1..].iter().all(|c| c.abs() < 1e-12);
    if !e0_aligned(n1) || !e0_aligned(n2) || o1 != 0.0 || !(o2 > 0.0) {
        return Err(Error::Domain(
            "spheres must be {x_1 = 0} and {x_1 = c} with c > 0 in the normalized chart".into(),
        ));
    }
    for x in samples {
        let v = phi(x);
        if !(v >= 0.0 && v <= o2) {
            return Ok(BetweenSpheres { holds: false, witness: Some((x.clone(), v)) });
        }
    }
    Ok(BetweenSpheres { holds: true, witness: None })
}

/// Embeds a function sampled at chart points as points of its Killing graph.
pub fn killing_graph_embed(kind: KillingKind, samples: &[(ChartPoint, f64)]) -> Vec<AmbientPoint> {
    samples.iter().map(|(z, u)| kind.graph_point(*u, z)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(c: &[f64]) -> AmbientPoint {
        AmbientPoint::new(c.to_vec()).unwrap()
    }

    fn chart(x: &[f64], y: f64) -> ChartPoint {
        ChartPoint::new(x.to_vec(), y).unwrap()
    }

    #[test]
    fn vertical_distance_is_log_ratio() {
        let d = hyperbolic_distance(&amb(&[0.0, 0.0, 1.0]), &amb(&[0.0, 0.0, std::f64::consts::E]));
        assert!((d - 1.0).abs() < 1e-14);
        let p = amb(&[0.3, -1.0, 2.0]);
        assert_eq!(hyperbolic_distance(&p, &p), 0.0);
    }

    /// Length of the semicircle geodesic joining (0,0,1) and (1,0,1), integrated numerically.
    #[test]
    fn horizontal_distance_matches_geodesic_length() {
        // Geodesic: circle centered (0.5, 0) of radius sqrt(1.25); ds = R dθ / (R sin θ).
        let r = 1.25f64.sqrt();
        let th0 = (1.0 / r).asin();
        let th1 = std::f64::consts::PI - th0;
        let m = 200_000;
        let h = (th1 - th0) / m as f64;
        // Simpson on 1/sin θ.
        let f = |t: f64| 1.0 / t.sin();
        let mut s = f(th0) + f(th1);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(th0 + k as f64 * h);
        }
        let length = s * h / 3.0;
        let d = hyperbolic_distance(&amb(&[0.0, 0.0, 1.0]), &amb(&[1.0, 0.0, 1.0]));
        assert!((d - length).abs() < 1e-10, "{d} vs {length}");
        assert!((d - 1.5f64.acosh()).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(AmbientPoint::new(vec![0.0, 0.0]).is_err());
        assert!(ChartPoint::new(vec![1.0], -1.0).is_err());
        assert!(IdealSphere::flat(vec![1.0, 1.0], 0.0).is_err());
        assert!(IdealSphere::round(vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn parabolic_drift_and_gamma() {
        let k = KillingKind::Parabolic;
        assert_eq!(k.drift(&chart(&[0.0], 2.0)), vec![0.0, 0.5]);
        assert_eq!(k.drift(&chart(&[5.0], 1.0)), vec![0.0, 1.0]);
        assert_eq!(k.gamma(&chart(&[0.0], 3.0)), 9.0);
        assert_eq!(k.gamma(&chart(&[4.0], 1.0)), 1.0);
    }

    #[test]
    fn hyperbolic_gamma_at_ambient_point() {
        let g = KillingKind::Hyperbolic.gamma_ambient(&amb(&[0.0, 0.0, 2.0])).unwrap();
        assert!((g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_slice_lies_on_unit_hemisphere() {
        for (x, y) in [(0.0, 1.0), (0.7, 0.2), (-3.0, 5.0)] {
            let p = KillingKind::Hyperbolic.slice_map(&chart(&[x], y));
            assert!((p.euclidean_norm() - 1.0).abs() < 1e-14);
            assert!(p.height() > 0.0);
        }
    }

    #[test]
    fn flows() {
        let p = amb(&[0.0, 2.0, 1.0]);
        assert_eq!(KillingKind::Parabolic.flow(1.5, &p).coords(), &[1.5, 2.0, 1.0]);
        let q = KillingKind::Hyperbolic.flow(2f64.ln(), &amb(&[1.0, 0.0, 1.0]));
        assert!(dist(q.coords(), &[2.0, 0.0, 2.0]) < 1e-15);
        assert_eq!(KillingKind::Parabolic.flow(0.0, &p), p);
        assert_eq!(KillingKind::Hyperbolic.flow(0.0, &p), p);
    }

    #[test]
    fn exact_catalog_values() {
        let h = ExactSolution::Hemisphere { t: 0.0, r: 1.0 };
        assert!((h.eval(&chart(&[0.3], 0.4)).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(h.eval(&chart(&[0.9], 0.9)).is_err());
        assert_eq!(ExactSolution::Constant { c: 2.0 }.eval(&chart(&[1.0], 1.0)).unwrap(), 2.0);
        assert_eq!(ExactSolution::TiltedPlane { a: 1.0, b: 0.0 }.eval(&chart(&[7.0], 3.0)).unwrap(), 3.0);
    }

    #[test]
    fn between_spheres() {
        let e1 = IdealSphere::flat(vec![1.0, 0.0], 0.0).unwrap();
        let e2 = IdealSphere::flat(vec![1.0, 0.0], 1.0).unwrap();
        let xs: Vec<Vec<f64>> = (0..11).map(|i| vec![-1.0 + 0.2 * i as f64]).collect();
        let ok = between_spheres_check(|x| 0.5 + 0.3 * x[0].tanh(), &xs, &e1, &e2).unwrap();
        assert!(ok.holds);
        let bad = between_spheres_check(|x| if x[0] > 0.5 { -0.1 } else { 0.5 }, &xs, &e1, &e2).unwrap();
        assert!(!bad.holds);
        assert_eq!(bad.witness.unwrap().1, -0.1);
        assert!(between_spheres_check(|_| 1.0, &xs, &e1, &e2).unwrap().holds);
        let round = IdealSphere::round(vec![0.0, 0.0], 1.0).unwrap();
        assert!(between_spheres_check(|_| 0.5, &xs, &e1, &round).is_err());
    }

    #[test]
    fn killing_graphs() {
        let pts: Vec<(ChartPoint, f64)> = [(0.1, 0.2), (-0.5, 0.6), (0.0, 0.9)]
            .iter()
            .map(|&(x, y)| {
                let z = chart(&[x], y);
                let u = ExactSolution::Hemisphere { t: 0.0, r: 1.0 }.eval(&z).unwrap();
                (z, u)
            })
            .collect();
        for p in killing_graph_embed(KillingKind::Parabolic, &pts) {
            assert!((p.euclidean_norm() - 1.0).abs() < 1e-14);
        }
        let zero: Vec<(ChartPoint, f64)> = pts.iter().map(|(z, _)| (z.clone(), 0.0)).collect();
        for p in killing_graph_embed(KillingKind::Parabolic, &zero) {
            assert_eq!(p.coords()[0], 0.0);
        }
        let ln2: Vec<(ChartPoint, f64)> = pts.iter().map(|(z, _)| (z.clone(), 2f64.ln())).collect();
        for p in killing_graph_embed(KillingKind::Hyperbolic, &ln2) {
            assert!((p.euclidean_norm() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn isometry_inverse_roundtrip() {
        let g = Isometry::identity()
            .then(Primitive::Translate(vec![0.3, -1.0]))
            .then(Primitive::Invert { center: vec![0.5, 0.5], radius: 1.3 })
            .then(Primitive::Dilate(2.5))
            .then(Primitive::Rotate(vec![vec![0.6, -0.8], vec![0.8, 0.6]]));
        let p = amb(&[0.2, 0.4, 0.7]);
        let back = g.inverse().apply(&g.apply(&p));
        assert!(dist(back.coords(), p.coords()) < 1e-13);
    }
}
