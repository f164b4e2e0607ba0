use plateau_hyp::geometry::{hyperbolic_distance, Primitive};
use plateau_hyp::{AmbientPoint, ChartPoint, Isometry, KillingKind};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = AmbientPoint> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..4.0f64).prop_map(|(a, b, y)| AmbientPoint::new(vec![a, b, y]).unwrap())
}

fn primitive() -> impl Strategy<Value = Primitive> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Primitive::Translate(vec![a, b])),
        (0.2..5.0f64).prop_map(Primitive::Dilate),
        (0.0..std::f64::consts::TAU).prop_map(|t| Primitive::Rotate(vec![vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]])),
        (-1.0..1.0f64, -1.0..1.0f64, 0.3..3.0f64).prop_map(|(a, b, r)| Primitive::Invert { center: vec![a, b], radius: r }),
    ]
}

fn isometry() -> impl Strategy<Value = Isometry> {
    prop::collection::vec(primitive(), 1..5).prop_map(|steps| Isometry { steps })
}

/// Model metric `|v|² / y²` at a point.
fn metric(p: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let y = p[p.len() - 1];
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (y * y)
}

/// `∇̄_Z Z` from Christoffel symbols built by differencing the metric tensor, with the
/// derivative of `Z` taken by a spatial difference Jacobian.
fn covariant_self_derivative(kind: KillingKind, p: &[f64], h: f64) -> Vec<f64> {
    let d = p.len();
    let g = |q: &[f64], i: usize, j: usize| {
        let mut e_i = vec![0.0; d];
        let mut e_j = vec![0.0; d];
        e_i[i] = 1.0;
        e_j[j] = 1.0;
        metric(q, &e_i, &e_j)
    };
    let dg = |l: usize, i: usize, j: usize| {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[l] += h;
        b[l] -= h;
        (g(&a, i, j) - g(&b, i, j)) / (2.0 * h)
    };
    let field = |q: &[f64]| kind.field(&AmbientPoint::new(q.to_vec()).unwrap());
    let z = field(p);
    let mut out = vec![0.0; d];
    for k in 0..d {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        let mut dz = 0.0;
        for (i, zi) in z.iter().enumerate() {
            a[i] += h;
            b[i] -= h;
            dz += zi * (field(&a)[k] - field(&b)[k]) / (2.0 * h);
            a[i] = p[i];
            b[i] = p[i];
        }
        // The metric is diagonal, so g^{kk} is the only inverse entry.
        let ginv = 1.0 / g(p, k, k);
        let mut gamma = 0.0;
        for i in 0..d {
            for j in 0..d {
                gamma += 0.5 * ginv * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j)) * z[i] * z[j];
            }
        }
        out[k] = dz + gamma;
    }
    out
}

fn chart_components(kind: KillingKind, z: &ChartPoint, v: &[f64], h: f64) -> Vec<f64> {
    let c = z.coords();
    let n = c.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut a = c.clone();
            let mut b = c.clone();
            a[i] += h;
            b[i] -= h;
            let pa = kind.slice_map(&ChartPoint::from_coords(&a).unwrap()).into_coords();
            let pb = kind.slice_map(&ChartPoint::from_coords(&b).unwrap()).into_coords();
            pa.iter().zip(&pb).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect();
    // Two-column least squares by normal equations.
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (a11, a12, a22) = (dot(&cols[0], &cols[0]), dot(&cols[0], &cols[1]), dot(&cols[1], &cols[1]));
    let (b1, b2) = (dot(&cols[0], v), dot(&cols[1], v));
    let det = a11 * a22 - a12 * a12;
    vec![(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn isometries_preserve_distance(p in point(), q in point(), g in isometry()) {
        let d = hyperbolic_distance(&p, &q);
        let dg = hyperbolic_distance(&g.apply(&p), &g.apply(&q));
        prop_assert!((d - dg).abs() <= 1e-10 * d.max(1.0), "{d} vs {dg}");
    }

    #[test]
    fn flows_preserve_distance(p in point(), q in point(), s in -2.0..2.0f64) {
        for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
            let d = hyperbolic_distance(&p, &q);
            let ds = hyperbolic_distance(&kind.flow(s, &p), &kind.flow(s, &q));
            prop_assert!((d - ds).abs() <= 1e-10 * d.max(1.0));
        }
    }

    #[test]
    fn inverse_undoes_isometry(p in point(), g in isometry()) {
        let back = g.inverse().apply(&g.apply(&p));
        for (a, b) in back.coords().iter().zip(p.coords()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gamma_inverts_field_norm(x in -2.0..2.0f64, y in 0.05..3.0f64) {
        let z = ChartPoint::new(vec![x], y).unwrap();
        for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
            let p = kind.slice_map(&z);
            let v = kind.field(&p);
            let zz = metric(p.coords(), &v, &v);
            prop_assert!((kind.gamma(&z) * zz - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn orbits_follow_horocycles_and_rays(x in -2.0..2.0f64, y in 0.05..3.0f64, s in -2.0..2.0f64) {
        let z = ChartPoint::new(vec![x], y).unwrap();
        let p = KillingKind::Parabolic.slice_map(&z);
        prop_assert_eq!(KillingKind::Parabolic.flow(s, &p).height(), p.height());
        let q = KillingKind::Hyperbolic.slice_map(&z);
        let f = KillingKind::Hyperbolic.flow(s, &q);
        let (nq, nf) = (q.euclidean_norm(), f.euclidean_norm());
        for (a, b) in q.coords().iter().zip(f.coords()) {
            prop_assert!((a / nq - b / nf).abs() <= 1e-14);
        }
    }
}

#[test]
fn drift_matches_christoffel_oracle_with_second_order_refinement() {
    for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
        for (x, y) in [(0.0, 0.5), (0.3, 1.2), (-0.8, 0.25), (1.5, 2.0)] {
            let z = ChartPoint::new(vec![x], y).unwrap();
            let exact = kind.drift(&z);
            let p = kind.slice_map(&z);
            let mut errors = Vec::new();
            for h in [1e-2, 5e-3] {
                let amb = covariant_self_derivative(kind, p.coords(), h * p.height());
                let chart = chart_components(kind, &z, &amb, 1e-6);
                errors.push(chart.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
            let fine = covariant_self_derivative(kind, p.coords(), 1e-5 * p.height());
            let chart = chart_components(kind, &z, &fine, 1e-6);
            let err = chart.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-6 * (1.0 + exact.iter().fold(0.0f64, |m, v| m.max(v.abs()))), "{kind:?} {chart:?} vs {exact:?}");
            if errors[1] > 1e-10 {
                let ratio = errors[0] / errors[1];
                assert!(ratio > 3.5 && ratio < 4.5, "{kind:?} at ({x}, {y}): refinement ratio {ratio}");
            }
        }
    }
}
