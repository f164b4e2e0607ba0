//! Half-space isometries, Killing flows and the slice charts of both structures.

use plateau_hyp::geometry::{hyperbolic_distance, Primitive};
use plateau_hyp::{AmbientPoint, ChartPoint, Isometry, KillingKind};

fn main() -> plateau_hyp::Result<()> {
    let p = AmbientPoint::new(vec![0.3, -0.2, 0.7])?;
    let q = AmbientPoint::new(vec![-1.1, 0.4, 0.2])?;
    let g = Isometry::identity()
        .then(Primitive::Translate(vec![0.5, 1.0]))
        .then(Primitive::Dilate(2.5))
        .then(Primitive::Invert { center: vec![0.0, 0.0], radius: 1.3 });
    println!("d(p, q)       = {:.12}", hyperbolic_distance(&p, &q));
    println!("d(g p, g q)   = {:.12}", hyperbolic_distance(&g.apply(&p), &g.apply(&q)));

    for kind in [KillingKind::Parabolic, KillingKind::Hyperbolic] {
        let z = ChartPoint::new(vec![0.4], 0.6)?;
        let slice = kind.slice_map(&z);
        let moved = kind.flow(0.8, &slice);
        println!(
            "{kind:?}: slice point {:?}, γ = {:.6}, drift {:?}, flow keeps distance to p: {:.3e}",
            slice.coords(),
            kind.gamma(&z),
            kind.drift(&z),
            (hyperbolic_distance(&slice, &p) - hyperbolic_distance(&moved, &kind.flow(0.8, &p))).abs()
        );
    }
    Ok(())
}
