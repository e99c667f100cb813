//! Fully closed-form bounds: straight-line regression and the normal model.

use mle_bounds::bounds_closed::{bound_normal, bound_straightline, NormSet};

fn main() -> mle_bounds::Result<()> {
    let norms = NormSet::ones();

    let x = [-3.0, -1.0, 1.0, 3.0];
    println!("straight line, x = {x:?}, unit norms:");
    println!("  bound = {:.12}", bound_straightline(4, &x, &norms)?);

    println!("normal, sigma2 = 1, unit norms:");
    for n in [100u64, 10_000, 1_000_000] {
        println!("  n = {n:>8}: bound = {:.12}", bound_normal(n, 1.0, &norms));
    }
    Ok(())
}
