//! Digamma and polygamma evaluation with controlled truncation error.

use mle_bounds::specfun::{digamma, ln_gamma, polygamma, zeta3_upper, PolyGammaConfig};

fn main() -> mle_bounds::Result<()> {
    let cfg = PolyGammaConfig::default();
    println!("trigamma(1)    = {:.15}  (pi^2/6 = {:.15})", polygamma(1, 1.0, &cfg)?, std::f64::consts::PI.powi(2) / 6.0);
    println!("trigamma(1/2)  = {:.15}  (pi^2/2)", polygamma(1, 0.5, &cfg)?);
    println!("psi_3(1)       = {:.15}  (pi^4/15)", polygamma(3, 1.0, &cfg)?);
    println!("digamma(1)     = {:.15}  (-Euler-Mascheroni)", digamma(1.0)?);
    println!("digamma(2)     = {:.15}", digamma(2.0)?);
    println!("ln_gamma(5)    = {:.15}  (ln 24)", ln_gamma(5.0)?);
    println!("zeta(3) upper  = {}", zeta3_upper());

    // recurrence check psi_m(z+1) = psi_m(z) + (-1)^m m! z^-(m+1)
    for m in 1..=3u32 {
        let z = 2.5;
        let lhs = polygamma(m, z + 1.0, &cfg)?;
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = polygamma(m, z, &cfg)? + sign * fact * z.powi(-(m as i32 + 1));
        println!("recurrence m={m}: |lhs - rhs| = {:.3e}", (lhs - rhs).abs());
    }
    Ok(())
}
