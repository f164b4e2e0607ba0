//! Explicit barriers: the stacked-hemisphere lower barrier, the equidistant
//! supersolution plane and spherical upper caps.
//!
//! Stacks live in the normalized configuration where the separated ideal point is
//! `q = (l, 0, …, 0)` and the outermost hemisphere has radius 1. [`PositionedStack`]
//! moves a stack by the isometries that commute with the parabolic flow: horizontal
//! translations, dilations and the flow itself.

use crate::geometry::{ChartPoint, ExactSolution, IdealPoint, KillingKind};
use crate::operator::{qh_pointwise, OrientationConvention};
use crate::{Error, Result};

const MAX_LEVELS: usize = 1_000_000;

/// `g(α) = cos β (sin α − sin β) / (cos β − cos α)` with `β = α/2`.
///
/// This is also the limit of the stack offsets `t_k`.
pub fn g_alpha(alpha: f64) -> f64 {
    let beta = 0.5 * alpha;
    beta.cos() * (alpha.sin() - beta.sin()) / (beta.cos() - alpha.cos())
}

/// Picks `α ∈ (0, π/2)` with `g(α)` at the midpoint `l + 1/2` of `(l, l + 1)`.
pub fn select_alpha(l: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("stack position must be positive, got {l}")));
    }
    let target = l + 0.5;
    // g decreases from +∞ at 0 to cos(π/4)(1 − sin(π/4)) at π/2.
    let (mut lo, mut hi) = (1e-12, std::f64::consts::FRAC_PI_2);
    if !(g_alpha(lo) > target && g_alpha(hi) < target) {
        return Err(Error::Domain(format!("no α brackets g(α) = {target}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_alpha(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let g = g_alpha(alpha);
    if (g - target).abs() > 1e-10 || !(l < g && g < l + 1.0) {
        return Err(Error::Domain(format!("bisection ended at g(α) = {g}, target {target}")));
    }
    Ok(alpha)
}

/// One hemisphere of the stack: center `(t, 0, …, 0)`, radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StackLevel {
    pub t: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BarrierStack {
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub levels: Vec<StackLevel>,
    /// Stopping margin: the last offset exceeds `l + margin`.
    pub margin: f64,
}

impl BarrierStack {
    /// Number of steps `K`; there are `K + 1` levels.
    pub fn k(&self) -> usize {
        self.levels.len() - 1
    }

    /// `lim t_k = (sin α − sin β) / (1 − cos α / cos β)`.
    pub fn t_limit(&self) -> f64 {
        let ratio = self.alpha.cos() / self.beta.cos();
        (self.alpha.sin() - self.beta.sin()) / (1.0 - ratio)
    }

    /// First index with `t_k > l`, if the stack reaches it.
    pub fn first_level_above(&self, l: f64) -> Option<usize> {
        self.levels.iter().position(|lv| lv.t > l)
    }

    /// The pasted profile as a function of `r = |(x, y)|`.
    pub fn profile(&self, r: f64) -> f64 {
        if r > 1.0 {
            return 0.0;
        }
        let mut w = 0.0f64;
        for lv in &self.levels {
            if r > lv.r {
                break;
            }
            w = w.max(lv.t + (lv.r * lv.r - r * r).sqrt());
        }
        w
    }

    /// Index of the piece attaining the profile at `r`, `None` where the profile is the zero base.
    pub fn active_level(&self, r: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        if r > 1.0 {
            return None;
        }
        for (k, lv) in self.levels.iter().enumerate() {
            if r > lv.r {
                break;
            }
            let v = lv.t + (lv.r * lv.r - r * r).sqrt();
            if v > best.map_or(0.0, |b| b.1) {
                best = Some((k, v));
            }
        }
        best.map(|b| b.0)
    }

    /// Value on the axis as `y → 0`: `max_k (t_k + R_k)`.
    pub fn axis_value(&self) -> f64 {
        self.profile(0.0)
    }
}

/// Closed form `t_k = (1 + R_1 + ⋯ + R_{k−1}) sin α − (1 + R_1 + ⋯ + R_k) sin β`.
pub fn closed_form_offset(alpha: f64, k: usize) -> f64 {
    let beta = 0.5 * alpha;
    let q = alpha.cos() / beta.cos();
    let geo = |m: i32| (1.0 - q.powi(m)) / (1.0 - q);
    geo(k as i32) * alpha.sin() - geo(k as i32 + 1) * beta.sin()
}

pub fn build_stack(l: f64, alpha: f64) -> Result<BarrierStack> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("α must lie in (0, π/2), got {alpha}")));
    }
    let beta = 0.5 * alpha;
    let ratio = alpha.cos() / beta.cos();
    let mut stack = BarrierStack { l, alpha, beta, levels: vec![StackLevel { t: -beta.sin(), r: 1.0 }], margin: 0.0 };
    let t_inf = stack.t_limit();
    if !(t_inf > l) {
        return Err(Error::Domain(format!("offsets converge to {t_inf}, not beyond l = {l}")));
    }
    stack.margin = 0.5 * (t_inf - l);
    while stack.levels.last().map_or(true, |lv| lv.t <= l + stack.margin) {
        if stack.levels.len() > MAX_LEVELS {
            return Err(Error::Domain("stack did not pass l within the level guard".into()));
        }
        let prev = *stack.levels.last().unwrap();
        let k = stack.levels.len();
        let r = ratio.powi(k as i32);
        let t = prev.t + prev.r * alpha.sin() - r * beta.sin();
        let closed = closed_form_offset(alpha, k);
        if (t - closed).abs() > 1e-12 {
            return Err(Error::Check(format!("level {k}: recursion {t} vs closed form {closed}")));
        }
        stack.levels.push(StackLevel { t, r });
    }
    let t_k = stack.levels.last().unwrap().t;
    if !(t_k < l + 1.0) {
        return Err(Error::Check(format!("t_K = {t_k} does not stay below l + 1")));
    }
    Ok(stack)
}

/// `w_K(P)`: zero outside the unit disk, the running maximum of the hemisphere pieces inside.
pub fn eval_stack(stack: &BarrierStack, p: &ChartPoint) -> f64 {
    let r2: f64 = p.x.iter().map(|x| x * x).sum::<f64>() + p.y * p.y;
    stack.profile(r2.sqrt())
}

/// A stack moved to `x' = center`, dilated by `scale` and flowed by `shift`:
/// `shift + scale · w_K(((x' − center), y) / scale)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PositionedStack {
    pub stack: BarrierStack,
    pub center: Vec<f64>,
    pub scale: f64,
    pub shift: f64,
}

impl PositionedStack {
    fn radius(&self, x: &[f64], y: f64) -> f64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        (d2 + y * y).sqrt() / self.scale
    }

    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        self.shift + self.scale * self.stack.profile(self.radius(x, y))
    }

    /// Ideal boundary trace at `x'`.
    pub fn trace(&self, x: &[f64]) -> f64 {
        self.eval(x, 0.0)
    }

    /// Places the stack under boundary data `phi` around `center`: the largest dyadic
    /// scale `≤ max_scale` whose sampled trace stays `≤ phi`. `None` if no scale down
    /// to `min_scale` fits.
    pub fn fit_below(
        stack: &BarrierStack,
        center: &[f64],
        shift: f64,
        phi: &dyn Fn(&[f64]) -> f64,
        max_scale: f64,
        min_scale: f64,
    ) -> Option<Self> {
        let m = center.len();
        let per_axis: usize = match m {
            0 => 1,
            1 => 201,
            _ => 41,
        };
        let mut scale = max_scale;
        while scale >= min_scale {
            let cand = Self { stack: stack.clone(), center: center.to_vec(), scale, shift };
            let mut ok = true;
            let total = per_axis.pow(m as u32);
            for code in 0..total {
                let mut c = code;
                let mut x = center.to_vec();
                for xi in x.iter_mut() {
                    let i = c % per_axis;
                    c /= per_axis;
                    *xi += scale * (2.0 * i as f64 / (per_axis - 1).max(1) as f64 - 1.0);
                }
                if cand.trace(&x) > phi(&x) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Some(cand);
            }
            scale *= 0.5;
        }
        None
    }
}

/// The equidistant graph `c + slope·y` used as the global supersolution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SupersolutionPlane {
    pub c: f64,
    pub slope: f64,
    /// Whether the plane solves the equation exactly (`H ≥ 0`) or strictly dominates (`H < 0`).
    pub exact: bool,
}

impl SupersolutionPlane {
    pub fn eval(&self, y: f64) -> f64 {
        self.c + self.slope * y
    }
}

/// Builds `c + |a|·y` with `|a| = |H|/√(1 − H²)`. It is `≥ c` everywhere; for `H ≥ 0` it is
/// an exact solution and for `H < 0` a strict supersolution.
pub fn make_supersolution(c: f64, h: f64, conv: OrientationConvention) -> Result<SupersolutionPlane> {
    if !(h.abs() < 1.0) {
        return Err(Error::Domain(format!("no equidistant graph for |H| = {} ≥ 1", h.abs())));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("supersolution offset must be positive, got {c}")));
    }
    let a = conv.equidistant_slope(h);
    let slope = a.abs();
    let exact = (slope - a).abs() <= 1e-15 * slope.max(1.0);
    let plane = SupersolutionPlane { c, slope, exact };
    let f = ExactSolution::TiltedPlane { a: slope, b: c };
    for (x, y) in [(0.0, 0.1), (0.5, 0.7), (-1.3, 2.5)] {
        let z = ChartPoint { x: vec![x], y };
        let r = qh_pointwise(&f, &z, KillingKind::Parabolic, h, conv)?;
        let ok = if exact { r.abs() <= 1e-10 } else { conv.is_super_residual(r, 1e-10) };
        if !ok {
            return Err(Error::Check(format!("plane c + {slope}·y has residual {r} at ({x}, {y})")));
        }
    }
    Ok(plane)
}

/// Which side of the cap a graph point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CapSide {
    /// Strictly inside the dome over `q`; graphs of elements of `S_φ` never get here.
    Shielded,
    Outside,
}

/// CMC spherical cap over a round ideal sphere around `q`, shielding `q` from graphs
/// below the data.
///
/// The cap is the Euclidean sphere of radius `R = ρ/√(1 − H²)` centered at height
/// `y_c = −|H|·R` above the ideal point `q`; its mean curvature vector points away from `q`,
/// toward `Γ`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct UpperCap {
    /// Ideal center `(q_1, q')`.
    pub q: Vec<f64>,
    /// Radius of the ideal boundary sphere.
    pub rho: f64,
    pub h: f64,
    pub radius: f64,
    pub center_height: f64,
}

impl UpperCap {
    fn new(q: Vec<f64>, rho: f64, h: f64) -> Self {
        let radius = rho / (1.0 - h * h).sqrt();
        Self { q, rho, h, radius, center_height: -h.abs() * radius }
    }

    /// Upper bound on `u(z)` from the lower sheet of the cap, where the chart point sees it.
    pub fn bound(&self, z: &ChartPoint) -> Option<f64> {
        let d2: f64 = z.x.iter().zip(&self.q[1..]).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
            + (z.y - self.center_height).powi(2);
        let s2 = self.radius * self.radius - d2;
        (s2 > 0.0).then(|| self.q[0] - s2.sqrt())
    }

    pub fn side(&self, z: &ChartPoint, u: f64) -> CapSide {
        match self.bound(z) {
            Some(b) if u > b && u < 2.0 * self.q[0] - b => CapSide::Shielded,
            _ => CapSide::Outside,
        }
    }

    /// Lower sheet as a function on the chart, for curvature checks.
    pub fn lower_sheet(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        move |z: &[f64]| {
            let n = z.len();
            let p = ChartPoint { x: z[..n - 1].to_vec(), y: z[n - 1] };
            self.bound(&p).unwrap_or(f64::NAN)
        }
    }

    /// Points of the ideal boundary sphere, for disjointness checks.
    pub fn ideal_samples(&self, per_circle: usize) -> Vec<Vec<f64>> {
        sphere_samples(&self.q, self.rho, per_circle)
    }
}

fn sphere_samples(center: &[f64], rho: f64, per_circle: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match center.len() {
        1 => vec![vec![center[0] - rho], vec![center[0] + rho]],
        2 => (0..per_circle)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / per_circle as f64;
                vec![center[0] + rho * th.cos(), center[1] + rho * th.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            let rings = per_circle / 2;
            for i in 0..=rings {
                let ph = PI * i as f64 / rings as f64;
                for j in 0..per_circle {
                    let th = 2.0 * PI * j as f64 / per_circle as f64;
                    let mut p = center.to_vec();
                    p[0] += rho * ph.cos();
                    p[1] += rho * ph.sin() * th.cos();
                    p[2] += rho * ph.sin() * th.sin();
                    out.push(p);
                }
            }
            out
        }
    }
}

/// Builds an upper cap around an ideal point `q = (q_1, q')` lying beyond the data
/// graph (`q_1 > φ(q')`), with the largest ideal radius found whose sphere stays
/// strictly beyond the graph.
pub fn upper_cap_barrier(q: &IdealPoint, phi: &dyn Fn(&[f64]) -> f64, h: f64) -> Result<UpperCap> {
    if !(h.abs() < 1.0) {
        return Err(Error::Domain(format!("caps need |H| < 1, got {h}")));
    }
    let q = match q {
        IdealPoint::Finite(c) if !c.is_empty() => c.clone(),
        _ => return Err(Error::Domain("upper caps need a finite ideal point".into())),
    };
    let gap = q[0] - phi(&q[1..]);
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("ideal point is not beyond the data graph (gap {gap})")));
    }
    let beyond = |rho: f64| {
        sphere_samples(&q, rho, 256).iter().all(|p| p[0] > phi(&p[1..]))
    };
    let mut rho = gap;
    while rho > 1e-9 * gap {
        if beyond(rho) {
            return Ok(UpperCap::new(q, rho * (1.0 - 1e-9), h));
        }
        rho *= 0.9;
    }
    Err(Error::Domain("no round ideal sphere around q avoids the data graph".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{fix_orientation_sign, killing_graph_patch, numerical_mean_curvature, NormalOrientation};

    #[test]
    fn alpha_lands_at_midpoint() {
        for l in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let a = select_alpha(l).unwrap();
            assert!((g_alpha(a) - (l + 0.5)).abs() <= 1e-10);
        }
        assert!(select_alpha(0.0).is_err());
        assert!(select_alpha(-1.0).is_err());
    }

    #[test]
    fn g_blows_up_like_four_thirds_over_alpha() {
        for a in [1e-2, 1e-3, 1e-4] {
            assert!((g_alpha(a) * 3.0 * a / 4.0 - 1.0).abs() < 2.0 * a);
        }
    }

    #[test]
    fn stack_at_alpha_point_nine() {
        let s = build_stack(1.0, 0.90).unwrap();
        assert_eq!(s.levels[0].t, -(0.45f64).sin());
        assert!((s.levels[1].r - 0.6903347977316265).abs() < 1e-12);
        assert!((s.levels[1].t - 0.04808953150534817).abs() < 1e-12);
        assert!((s.t_limit() - 1.1249613226297974).abs() < 1e-12);
        assert_eq!(s.first_level_above(1.0), Some(7));
        assert_eq!(s.k(), 9);
    }

    #[test]
    fn pieces_agree_on_pasting_spheres() {
        let s = build_stack(1.0, select_alpha(1.0).unwrap()).unwrap();
        for k in 1..s.levels.len() {
            let (a, b) = (s.levels[k - 1], s.levels[k]);
            assert!((b.r * s.beta.cos() - a.r * s.alpha.cos()).abs() <= 1e-14);
            let r = a.r * s.alpha.cos();
            let va = a.t + (a.r * a.r - r * r).sqrt();
            let vb = b.t + (b.r * b.r - r * r).sqrt();
            assert!((va - vb).abs() <= 1e-9);
            for f in [0.5, 0.9, 0.99, 1.01, 1.1] {
                let rr = r * f;
                if rr > b.r {
                    continue;
                }
                let va = a.t + (a.r * a.r - rr * rr).sqrt();
                let vb = b.t + (b.r * b.r - rr * rr).sqrt();
                assert_eq!(vb > va, rr < r, "k={k} r={rr}");
            }
        }
    }

    #[test]
    fn stack_separates_on_the_axis() {
        let s = build_stack(1.0, select_alpha(1.0).unwrap()).unwrap();
        let top = eval_stack(&s, &ChartPoint { x: vec![0.0], y: 1e-12 });
        assert!(top > 1.0);
        assert_eq!(eval_stack(&s, &ChartPoint { x: vec![0.8], y: 0.7 }), 0.0);
    }

    #[test]
    fn fitted_stack_stays_below_data() {
        let s = build_stack(1.0, select_alpha(1.0).unwrap()).unwrap();
        let phi = |x: &[f64]| 0.2 + 0.6 / (1.0 + (-x[0] / 0.1).exp());
        let p = PositionedStack::fit_below(&s, &[0.5], 0.2, &phi, 1.0, 1e-4).unwrap();
        for i in 0..=400 {
            let x = -1.0 + 2.0 * i as f64 / 400.0;
            assert!(p.trace(&[x]) <= phi(&[x]) + 1e-12);
        }
        assert!(p.trace(&[0.5]) > 0.2);
    }

    #[test]
    fn supersolution_planes() {
        let conv = fix_orientation_sign().unwrap();
        let w = make_supersolution(1.0, 0.0, conv).unwrap();
        assert_eq!(w.slope, 0.0);
        let w = make_supersolution(1.0, 0.5, conv).unwrap();
        assert!((w.slope - 0.5 / 0.75f64.sqrt()).abs() < 1e-15 && w.exact);
        let w = make_supersolution(1.0, -0.5, conv).unwrap();
        assert!((w.slope - 0.5 / 0.75f64.sqrt()).abs() < 1e-15 && !w.exact);
        assert!(make_supersolution(1.0, 1.0, conv).is_err());
    }

    #[test]
    fn cap_has_the_requested_curvature() {
        let phi = |x: &[f64]| if x[0] < 0.0 { 0.8 } else { 0.5 };
        for h in [0.0, 0.5, -0.5] {
            let cap = upper_cap_barrier(&IdealPoint::Finite(vec![1.0, 1.0]), &phi, h).unwrap();
            assert!(cap.ideal_samples(512).iter().all(|p| p[0] > phi(&p[1..])));
            let sheet = cap.lower_sheet();
            let patch = killing_graph_patch(KillingKind::Parabolic, &sheet);
            let y_top = cap.center_height + cap.radius;
            for z in [[1.0, 0.5 * y_top], [1.0 + 0.2 * cap.rho, 0.3 * y_top]] {
                let mc = numerical_mean_curvature(&patch, &z, &NormalOrientation::AgainstField(KillingKind::Parabolic)).unwrap();
                assert!((mc - h.abs()).abs() < 1e-6, "H={h}: {mc}");
            }
        }
    }

    #[test]
    fn cap_rejects_points_on_the_data_side() {
        let phi = |_: &[f64]| 0.5;
        assert!(upper_cap_barrier(&IdealPoint::Finite(vec![0.3, 0.0]), &phi, 0.0).is_err());
    }
}
