//! Monte Carlo verification: estimate the true smooth-test-function distance
//! and the estimator's mean squared error, test bound dominance, fit
//! empirical convergence rates, and check the conditional-expectation lemma
//! on finite distributions by exhaustive enumeration.
//!
//! Every estimate is bit-identical for a fixed `(seed, reps)` pair whatever
//! the worker count; see [`crate::mc`] for the determinism contract.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{mean_and_se, par_map_replicates, tree_sum};
use crate::models::ModelSpec;
use crate::rng::Rng;
use crate::testfun::{mse_value, TestFunction};

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: u64,
    pub seed: u64,
    /// Replicates whose MLE solve failed and was redrawn.
    pub rejected_replicates: u64,
}

/// Least-squares fit of log(value) against log(n).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub n_grid: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

const MAX_ATTEMPTS_PER_REPLICATE: u64 = 64;

fn replicate_rng(seed: u64, rep: u64, attempt: u64) -> Rng {
    Rng::substream(seed.wrapping_add(attempt.wrapping_mul(0xA5A5_5A5A_D00D_F00D)), rep)
}

/// Simulate and fit one replicate, redrawing (with fresh substreams) when the
/// solver rejects the sample. Returns the estimate and the number of redraws.
fn fit_replicate(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: usize,
    seed: u64,
    rep: u64,
) -> (Option<Vec<f64>>, u64) {
    for attempt in 0..MAX_ATTEMPTS_PER_REPLICATE {
        let mut rng = replicate_rng(seed, rep, attempt);
        if let Ok(est) = model.fit_simulated(theta0, n, &mut rng) {
            return (Some(est), attempt);
        }
    }
    (None, MAX_ATTEMPTS_PER_REPLICATE)
}

fn run_replicates(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: usize,
    reps: usize,
    seed: u64,
    per_replicate: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<McEstimate> {
    let outcomes = par_map_replicates(reps, |rep| {
        let (est, redraws) = fit_replicate(model, theta0, n, seed, rep);
        (est.map(|e| per_replicate(&e)), redraws)
    });
    let rejected: u64 = outcomes.iter().map(|(_, r)| r).sum();
    if rejected as usize > reps / 100 {
        return Err(Error::TooManyRejections { rejected: rejected as usize, reps });
    }
    // hard failures are impossible below the rejection budget, but stay safe
    let values: Vec<f64> = outcomes.iter().filter_map(|(v, _)| *v).collect();
    if values.len() != reps {
        return Err(Error::TooManyRejections { rejected: reps - values.len(), reps });
    }
    let (value, stderr) = mean_and_se(&values);
    Ok(McEstimate { value, stderr, reps: reps as u64, seed, rejected_replicates: rejected })
}

/// Estimate `| E h(W_n) - E h(Z) |` where
/// `W_n = sqrt(n) I_n^(1/2) (theta_hat - theta0)`.
pub fn estimate_distance(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: usize,
    h: &TestFunction,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    let root = model.fisher_bar(theta0, n)?.spd_sqrt()?;
    let scale = (n as f64).sqrt();
    let mut est = run_replicates(model, theta0, n, reps, seed, |theta_hat| {
        let delta: Vec<f64> = theta_hat.iter().zip(theta0).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = root.matvec(&delta).iter().map(|v| v * scale).collect();
        h.evaluate(&w)
    })?;
    est.value = (est.value - h.gaussian_mean).abs();
    Ok(est)
}

/// Estimate `E sum_j (theta_hat_j - theta0_j)^2`.
pub fn estimate_mse(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    run_replicates(model, theta0, n, reps, seed, |theta_hat| mse_value(theta_hat, theta0))
}

/// Does the bound dominate the estimate up to `k_se` standard errors?
/// The comparison is inclusive at equality.
pub fn check_dominance(bound: f64, est: &McEstimate, k_se: f64) -> bool {
    debug_assert!(k_se >= 0.0);
    est.value - k_se * est.stderr <= bound
}

/// Least-squares slope of log(value) on log(n).
pub fn fit_rate(n_grid: &[f64], values: &[f64]) -> Result<RateFit> {
    assert!(
        n_grid.len() == values.len() && n_grid.len() >= 3,
        "rate fit needs at least 3 grid points"
    );
    assert!(n_grid.windows(2).all(|w| w[0] < w[1]), "n grid must be strictly increasing");
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { index: i, value: v });
        }
    }
    let k = n_grid.len() as f64;
    let lx: Vec<f64> = n_grid.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mx = tree_sum(&lx) / k;
    let my = tree_sum(&ly) / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(RateFit { n_grid: n_grid.to_vec(), slope, intercept, residual_rms: (rss / k).sqrt() })
}

/// Exhaustive check of `E[f(M) | M_i < eps for all i] <= E[f(M)]` for a
/// finite distribution on positive vectors and a coordinatewise increasing,
/// nonnegative `f`. Returns whether the inequality holds (with a roundoff
/// allowance relative to the magnitudes involved).
pub fn lemma_conditional_check(
    atoms: &[(Vec<f64>, f64)],
    f: impl Fn(&[f64]) -> f64,
    eps: f64,
) -> Result<bool> {
    assert!(!atoms.is_empty() && eps > 0.0);
    let total: f64 = atoms.iter().map(|(_, p)| p).sum();
    assert!(total > 0.0, "pmf must carry positive mass");
    let mut uncond = 0.0;
    let mut cond = 0.0;
    let mut cond_mass = 0.0;
    for (m, p) in atoms {
        let v = f(m);
        uncond += p * v;
        if m.iter().all(|&mi| mi < eps) {
            cond += p * v;
            cond_mass += p;
        }
    }
    if cond_mass == 0.0 {
        return Err(Error::EmptyConditioningEvent);
    }
    let lhs = cond / cond_mass;
    let rhs = uncond / total;
    Ok(lhs <= rhs + 1e-12 * rhs.abs().max(1.0))
}

/// Random finite product law on positive d-vectors: independent marginals
/// with 2-4 atoms each, all combinations enumerated. Product laws are
/// positively associated, which is the class on which the conditional
/// expectation inequality is guaranteed; used by the lemma test suites.
pub fn random_product_pmf(d: usize, rng: &mut Rng) -> Vec<(Vec<f64>, f64)> {
    let marginals: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|_| {
            let k = 2 + (rng.next_u64() % 3) as usize;
            let raw: Vec<(f64, f64)> =
                (0..k).map(|_| (2.0 * rng.uniform(), rng.uniform() + 0.05)).collect();
            let total: f64 = raw.iter().map(|(_, p)| p).sum();
            raw.into_iter().map(|(x, p)| (x, p / total)).collect()
        })
        .collect();
    let mut atoms = vec![(Vec::new(), 1.0)];
    for marginal in &marginals {
        let mut next = Vec::with_capacity(atoms.len() * marginal.len());
        for (prefix, p) in &atoms {
            for (x, q) in marginal {
                let mut m = prefix.clone();
                m.push(*x);
                next.push((m, p * q));
            }
        }
        atoms = next;
    }
    atoms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BetaModel, NormalModel, StraightLineModel};

    #[test]
    fn dominance_examples() {
        let est = McEstimate { value: 0.2, stderr: 0.01, reps: 100, seed: 0, rejected_replicates: 0 };
        assert!(check_dominance(1.0, &est, 3.0));
        let est = McEstimate { value: 0.5, stderr: 0.01, reps: 100, seed: 0, rejected_replicates: 0 };
        assert!(!check_dominance(0.1, &est, 3.0));
        let est = McEstimate { value: 0.3, stderr: 0.05, reps: 100, seed: 0, rejected_replicates: 0 };
        assert!(check_dominance(0.3, &est, 0.0));
    }

    #[test]
    fn rate_fit_recovers_exact_slopes() {
        let ns: [f64; 4] = [100.0, 1000.0, 10000.0, 100000.0];
        let half: Vec<f64> = ns.iter().map(|n| 3.0 / n.sqrt()).collect();
        let fit = fit_rate(&ns, &half).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        let lin: Vec<f64> = ns.iter().map(|n| 7.0 / n).collect();
        assert!((fit_rate(&ns, &lin).unwrap().slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_rejects_nonpositive() {
        let ns: [f64; 3] = [10.0, 100.0, 1000.0];
        assert!(matches!(
            fit_rate(&ns, &[1.0, 0.0, 1.0]),
            Err(Error::NonPositiveValue { index: 1, .. })
        ));
    }

    #[test]
    fn estimates_are_deterministic() {
        let model = NormalModel;
        let h = crate::testfun::by_id(2, "sine_sum").unwrap();
        let a = estimate_distance(&model, &[0.0, 1.0], 50, &h, 400, 7).unwrap();
        let b = estimate_distance(&model, &[0.0, 1.0], 50, &h, 400, 7).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn normal_mse_estimate_matches_closed_form() {
        // E sum (theta_hat - theta0)^2 = 0.01 + (1/100)(2 - 1/100) at n = 100
        let model = NormalModel;
        let est = estimate_mse(&model, &[0.0, 1.0], 100, 20_000, 11).unwrap();
        assert!((est.value - 0.0299).abs() <= 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn noiseless_regression_mse_is_zero() {
        let model = StraightLineModel::new(vec![-3.0, -1.0, 1.0, 3.0], 0.0).unwrap();
        let est = estimate_mse(&model, &[1.0, 2.0], 40, 200, 3).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn straightline_w_paths_agree_replicatewise() {
        // The standardized MLE equals the standardized score exactly.
        let model = StraightLineModel::new(vec![-3.0, -1.0, 1.0, 3.0], 1.3).unwrap();
        let theta0 = [0.5, -0.25];
        let n = 48;
        let root = model.fisher_bar(&theta0, n).unwrap().spd_sqrt().unwrap();
        for rep in 0..200u64 {
            let mut rng = Rng::substream(99, rep);
            let data = model.sample(&theta0, n, &mut rng);
            let theta_hat = model.mle(&data).unwrap();
            let delta: Vec<f64> =
                theta_hat.iter().zip(&theta0).map(|(a, b)| a - b).collect();
            let w_mle: Vec<f64> =
                root.matvec(&delta).iter().map(|v| v * (n as f64).sqrt()).collect();
            let w_score = model.standardized_score(&theta0, &data).unwrap();
            for k in 0..2 {
                assert!(
                    (w_mle[k] - w_score[k]).abs() <= 1e-9,
                    "rep {rep}: {w_mle:?} vs {w_score:?}"
                );
            }
        }
    }

    #[test]
    fn beta_replicates_with_rejections_are_counted() {
        // tiny n makes occasional non-convergent samples plausible; the
        // counter must be stable across runs
        let model = BetaModel;
        let a = estimate_mse(&model, &[2.0, 3.0], 60, 500, 101).unwrap();
        let b = estimate_mse(&model, &[2.0, 3.0], 60, 500, 101).unwrap();
        assert_eq!(a.rejected_replicates, b.rejected_replicates);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn lemma_examples() {
        // four atoms on {0.5, 1.5}^2 with any masses; f = m1 + m2 increasing
        let atoms = vec![
            (vec![0.5, 0.5], 0.4),
            (vec![0.5, 1.5], 0.3),
            (vec![1.5, 0.5], 0.2),
            (vec![1.5, 1.5], 0.1),
        ];
        assert!(lemma_conditional_check(&atoms, |m| m[0] + m[1], 1.0).unwrap());
        // constant f: equality case
        assert!(lemma_conditional_check(&atoms, |_| 2.0, 1.0).unwrap());
        // empty event
        assert!(matches!(
            lemma_conditional_check(&atoms, |m| m[0], 0.25),
            Err(Error::EmptyConditioningEvent)
        ));
    }

    #[test]
    fn lemma_randomized_cases() {
        //  The inequality needs positively associated coordinates; product
        //  laws (independent coordinates) are the exhaustively checkable
        //  class, so the randomized cases are products of marginal pmfs.
        let mut rng = Rng::new(2024);
        let mut tested = 0;
        while tested < 300 {
            let d = 1 + (rng.next_u64() % 3) as usize;
            let atoms = random_product_pmf(d, &mut rng);
            // random increasing nonnegative step function: sum of indicator
            // products with positive weights
            let cuts: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..d).map(|_| 2.0 * rng.uniform()).collect())
                .collect();
            let ws: Vec<f64> = (0..3).map(|_| rng.uniform()).collect();
            let f = |m: &[f64]| -> f64 {
                cuts.iter()
                    .zip(&ws)
                    .map(|(c, w)| {
                        if m.iter().zip(c).all(|(a, b)| a >= b) {
                            *w
                        } else {
                            0.0
                        }
                    })
                    .sum()
            };
            let eps = 0.5 + 1.5 * rng.uniform();
            match lemma_conditional_check(&atoms, f, eps) {
                Ok(ok) => {
                    assert!(ok, "lemma violated");
                    tested += 1;
                }
                Err(Error::EmptyConditioningEvent) => {}
                Err(e) => panic!("unexpected {e:?}"),
            }
        }
    }

    // dependent coordinates genuinely break the inequality; pin one witness
    #[test]
    fn lemma_fails_without_association() {
        let atoms = vec![(vec![0.9, 0.9], 0.5), (vec![1.5, 0.05], 0.5)];
        let f = |m: &[f64]| if m[1] >= 0.5 { 1.0 } else { 0.0 };
        assert!(!lemma_conditional_check(&atoms, f, 1.0).unwrap());
    }
}
