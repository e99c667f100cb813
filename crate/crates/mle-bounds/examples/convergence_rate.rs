//! Empirical convergence rates of the closed-form normal bound.

use mle_bounds::bounds_closed::{bound_normal, NormSet};
use mle_bounds::harness::fit_rate;

fn main() -> mle_bounds::Result<()> {
    let norms = NormSet::ones();

    // fixed variance: the bound decays like 1/sqrt(n)
    let ns: Vec<f64> = (0..7).map(|k| 10.0_f64.powf(4.0 + k as f64 / 3.0)).collect();
    let vals: Vec<f64> = ns.iter().map(|&n| bound_normal(n as u64, 1.0, &norms)).collect();
    let fit = fit_rate(&ns, &vals)?;
    println!("sigma2 = 1       : slope = {:+.4} (expect -0.5)", fit.slope);

    // growing variance sigma2(n) = n^(1/4): the bound decays like n^(-1/4),
    // visible once omega-style corrections fade at large n
    let ns: Vec<f64> = (0..9).map(|k| 10.0_f64.powf(10.0 + 0.5 * k as f64)).collect();
    let vals: Vec<f64> =
        ns.iter().map(|&n| bound_normal(n as u64, n.powf(0.25), &norms)).collect();
    let fit = fit_rate(&ns, &vals)?;
    println!("sigma2 = n^(1/4) : slope = {:+.4} (expect -0.25)", fit.slope);
    Ok(())
}
