//! The Killing-graph operator on closed-form graphs, checked against a parametric
//! mean-curvature computation.

use plateau_hyp::operator::{killing_graph_patch, numerical_mean_curvature, qh_pointwise, NormalOrientation};
use plateau_hyp::{fix_orientation_sign, ChartPoint, ExactSolution, KillingKind};

fn main() -> plateau_hyp::Result<()> {
    let conv = fix_orientation_sign()?;
    println!("orientation sign {}", conv.sign());
    let h = 0.4;
    let families = [
        (ExactSolution::Constant { c: 0.5 }, 0.0),
        (ExactSolution::Hemisphere { t: 0.1, r: 1.2 }, 0.0),
        (ExactSolution::TiltedPlane { a: conv.equidistant_slope(h), b: 0.3 }, h),
    ];
    let z = ChartPoint::new(vec![0.2], 0.45)?;
    for (family, hh) in families {
        let residual = qh_pointwise(&family, &z, KillingKind::Parabolic, hh, conv)?;
        let f = move |c: &[f64]| family.value(c).unwrap();
        let patch = killing_graph_patch(KillingKind::Parabolic, &f);
        let mc = numerical_mean_curvature(&patch, &z.coords(), &NormalOrientation::AgainstField(KillingKind::Parabolic))?;
        println!("{family:?}: Q_H residual {residual:.2e}, parametric H = {mc:.9} (target {hh})");
    }
    Ok(())
}
