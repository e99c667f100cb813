//! Large-sample Beta fits stream their sufficient statistics, so memory use
//! stays flat no matter how large the simulated sample is.

use mle_bounds::models::{BetaModel, ModelSpec};
use mle_bounds::rng::Rng;
use std::time::Instant;

fn main() -> mle_bounds::Result<()> {
    let model = BetaModel;
    let theta = [2.0, 3.0];
    for n in [100_000usize, 2_000_000, 20_000_000] {
        let start = Instant::now();
        let mut rng = Rng::substream(1, 0);
        let est = model.fit_simulated(&theta, n, &mut rng)?;
        let dt = start.elapsed().as_secs_f64();
        println!(
            "n = {n:>9}: alpha_hat = {:.5}, beta_hat = {:.5}  ({:.0} ns/obs)",
            est[0],
            est[1],
            dt * 1e9 / n as f64
        );
    }
    Ok(())
}
