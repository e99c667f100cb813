//! Monte Carlo dominance check: the closed-form bound must exceed the
//! estimated distance up to estimator noise.

use mle_bounds::bounds_closed::{bound_normal, bound_straightline};
use mle_bounds::harness::{check_dominance, estimate_distance};
use mle_bounds::models::{NormalModel, StraightLineModel};
use mle_bounds::testfun;

fn main() -> mle_bounds::Result<()> {
    let reps = 4_000;
    let seed = 20_240_901;
    for h_id in ["sine_sum", "cosine_sum"] {
        let h = testfun::by_id(2, h_id).unwrap();
        for n in [50usize, 200] {
            let model = NormalModel;
            let est = estimate_distance(&model, &[0.0, 1.0], n, &h, reps, seed)?;
            let bound = bound_normal(n as u64, 1.0, &h.norms());
            println!(
                "normal      n={n:>4} h={h_id:<10} est={:.4} (se {:.4})  bound={:>8.3}  dominated={}",
                est.value, est.stderr, bound, check_dominance(bound, &est, 3.0)
            );

            let line = StraightLineModel::new(vec![-3.0, -1.0, 1.0, 3.0], 1.0)?;
            let est = estimate_distance(&line, &[1.0, -0.5], n, &h, reps, seed)?;
            let bound = bound_straightline(n as u64, &line.covariates(n), &h.norms())?;
            println!(
                "straightline n={n:>4} h={h_id:<10} est={:.4} (se {:.4})  bound={:>8.3}  dominated={}",
                est.value, est.stderr, bound, check_dominance(bound, &est, 3.0)
            );
        }
    }
    Ok(())
}
