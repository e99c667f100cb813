//! Sample-size gate and error certificates for the Beta model, whose MLE has
//! no closed form.

use mle_bounds::implicit::{beta_distance_bound, beta_gate_n_min, certify_beta, BetaConstants};
use mle_bounds::bounds_closed::NormSet;

fn main() -> mle_bounds::Result<()> {
    let (alpha, beta) = (2.0, 3.0);
    let n_min = beta_gate_n_min(alpha, beta)?;
    println!("Beta({alpha}, {beta}): gate n_min = {n_min}");

    for n in [1_000u64, n_min - 1, n_min, 2 * n_min] {
        let c = BetaConstants::new(alpha, beta, n)?;
        println!("  n = {n:>10}: omega_B = {:+.6e}", c.omega_b);
    }

    let cert = certify_beta(alpha, beta, 2 * n_min)?;
    println!("certificate at n = 2 n_min:");
    println!("{}", serde_json::to_string_pretty(&cert).unwrap());

    let bound = beta_distance_bound(alpha, beta, 2 * n_min, &NormSet::ones(), "unit")?;
    println!("distance bound (unit norms) = {:.6e}", bound.total);
    Ok(())
}
