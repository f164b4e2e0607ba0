//! Stacked-hemisphere lower barrier and equidistant supersolution.

use plateau_hyp::barriers::{build_stack, g_alpha, make_supersolution, select_alpha};
use plateau_hyp::fix_orientation_sign;

fn main() -> plateau_hyp::Result<()> {
    let l = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let alpha = select_alpha(l)?;
    let stack = build_stack(l, alpha)?;
    println!("l = {l}: α = {alpha:.9}, g(α) = {:.9}, K = {}, t∞ = {:.6}", g_alpha(alpha), stack.k(), stack.t_limit());
    for (k, level) in stack.levels.iter().enumerate() {
        println!("  k = {k:2}  t = {:+.6}  R = {:.6}", level.t, level.r);
    }
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("  profile({r:.2}) = {:.6}", stack.profile(r));
    }
    let plane = make_supersolution(0.5, 0.3, fix_orientation_sign()?)?;
    println!("supersolution at H = 0.3: {plane:?}, value at y = 1: {:.6}", plane.eval(1.0));
    Ok(())
}
