//! General bound engine.
//!
//! The distance bound decomposes into four contributions:
//!
//! ```text
//! sup_1(h) K1/sqrt(n) + sup_2(h) K2/sqrt(n) + sup_3(h) K3/sqrt(n)
//!   + 2 sup(h) E[sum_j (theta_hat_j - theta0_j)^2] / eps^2
//! ```
//!
//! where `K2` collects variances of transformed squared scores, `K3` third
//! absolute moments of transformed score differences between independent
//! copies, `K1` couples MLE moments with Hessian fluctuations and
//! conditional third-derivative envelopes, and the tail term localizes the
//! Taylor expansion to the event `|Q| < eps` with `Q` the worst coordinate
//! error. Each term is evaluated in closed form when the model provides it
//! and by Monte Carlo otherwise; estimated terms carry standard errors, and
//! reports can be assembled conservatively as `value + 3 se` per term.

use serde::{Deserialize, Serialize};

use crate::bounds_closed::NormSet;
use crate::error::{Error, Result};
use crate::harness;
pub use crate::mc::McSettings;
use crate::mc::{batched_se, mean_and_se, par_map_replicates, tree_sum};
use crate::models::{worst_coordinate_error, ModelSpec};
use crate::rng::Rng;
use crate::symmat::SymMat;
use crate::testfun::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermMethod {
    Closed,
    MonteCarlo,
}

/// One bound term: a value, its standard error (zero for closed forms), and
/// how it was obtained.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TermEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: TermMethod,
}

impl TermEstimate {
    fn closed(value: f64) -> Self {
        TermEstimate { value, stderr: 0.0, method: TermMethod::Closed }
    }

    fn mc(value: f64, stderr: f64) -> Self {
        TermEstimate { value, stderr, method: TermMethod::MonteCarlo }
    }

    fn scaled(&self, c: f64) -> Self {
        TermEstimate { value: c * self.value, stderr: c * self.stderr, method: self.method }
    }
}

/// Full decomposition of an assembled bound. Serializes with a stable field
/// order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub model: String,
    pub n: u64,
    pub theta0: Vec<f64>,
    pub epsilon: f64,
    pub h_id: String,
    pub norms: NormSet,
    pub k1_contrib: TermEstimate,
    pub k2_contrib: TermEstimate,
    pub k3_contrib: TermEstimate,
    pub tail_contrib: TermEstimate,
    pub total: f64,
    /// Each term taken at `value + 3 stderr`.
    pub conservative_total: f64,
    pub reps: u64,
    pub seed: u64,
}

impl BoundReport {
    pub fn bound(&self, conservative: bool) -> f64 {
        if conservative {
            self.conservative_total
        } else {
            self.total
        }
    }
}

fn invsqrt_fisher(model: &dyn ModelSpec, theta0: &[f64], n: usize) -> Result<SymMat> {
    model.fisher_bar(theta0, n)?.spd_invsqrt()
}

/// Transformed score rows `S_j = sum_k R_jk * score_k(x)` for one
/// observation, with `R = I_n^(-1/2)`.
pub(crate) fn transformed_score(
    model: &dyn ModelSpec,
    root_inv: &SymMat,
    theta0: &[f64],
    obs: &[f64],
    buf: &mut [f64],
    out: &mut [f64],
) {
    model.score_per_obs(0, 1, obs, theta0, buf);
    let d = theta0.len();
    for j in 0..d {
        out[j] = (0..d).map(|k| root_inv.get(j, k) * buf[k]).sum();
    }
}

/// A variance estimate with the delta-method standard error of its square
/// root (these feed `sqrt(Var ...)` expressions throughout the bounds).
#[derive(Clone, Copy, Debug)]
pub(crate) struct RootVariance {
    pub sqrt_var: f64,
    pub se: f64,
}

/// Monte Carlo variances of products of transformed scores for one iid
/// observation: first the `d` squared rows `S_j^2`, then the cross products
/// `S_j S_k` for `k < j` in (k outer, j inner) order. Standard errors come
/// from fourth central moments; batching is too optimistic for these
/// heavy-tailed squares.
pub(crate) fn squared_score_root_variances(
    model: &dyn ModelSpec,
    theta0: &[f64],
    root_inv: &SymMat,
    mc: &McSettings,
) -> (Vec<RootVariance>, Vec<RootVariance>) {
    let d = model.dim_param();
    let rows: Vec<Vec<f64>> = par_map_replicates(mc.reps, |rep| {
        let mut rng = Rng::substream(mc.seed, rep);
        let data = model.sample(theta0, 1, &mut rng);
        let mut buf = vec![0.0; d];
        let mut s = vec![0.0; d];
        transformed_score(model, root_inv, theta0, data.obs(0), &mut buf, &mut s);
        let mut out = Vec::with_capacity(d + d * (d - 1) / 2);
        for j in 0..d {
            out.push(s[j] * s[j]);
        }
        for k in 0..d {
            for j in (k + 1)..d {
                out.push(s[j] * s[k]);
            }
        }
        out
    });
    let rf = mc.reps as f64;
    let column = |col: usize| -> RootVariance {
        let vals: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        let mean = tree_sum(&vals) / rf;
        let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = tree_sum(&sq) / (rf - 1.0);
        let m4: Vec<f64> = sq.iter().map(|v| v * v).collect();
        let m4 = tree_sum(&m4) / rf;
        let se_var = ((m4 - var * var).max(0.0) / rf).sqrt();
        RootVariance { sqrt_var: var.sqrt(), se: se_var / (2.0 * var.sqrt()) }
    };
    let row_vars: Vec<RootVariance> = (0..d).map(column).collect();
    let cross_vars: Vec<RootVariance> = (d..d + d * (d - 1) / 2).map(column).collect();
    (row_vars, cross_vars)
}

/// Monte Carlo mean of `(sum_m |S'_m - S_m|)^3` over independent pairs of
/// observations, with the standard error of the mean.
pub(crate) fn score_diff_cube_moment(
    model: &dyn ModelSpec,
    theta0: &[f64],
    root_inv: &SymMat,
    mc: &McSettings,
) -> (f64, f64) {
    let d = model.dim_param();
    let cubes: Vec<f64> = par_map_replicates(mc.reps, |rep| {
        let mut rng = Rng::substream(mc.seed, rep);
        let pair = model.sample(theta0, 2, &mut rng);
        let mut buf = vec![0.0; d];
        let mut s = vec![0.0; d];
        let mut s_copy = vec![0.0; d];
        transformed_score(model, root_inv, theta0, pair.obs(0), &mut buf, &mut s);
        transformed_score(model, root_inv, theta0, pair.obs(1), &mut buf, &mut s_copy);
        let sum_abs: f64 = (0..d).map(|m| (s_copy[m] - s[m]).abs()).sum();
        sum_abs.powi(3)
    });
    mean_and_se(&cubes)
}

/// Monte Carlo variances of the per-observation Hessian entries, packed
/// `k*d + i` (zero exactly when the model's Hessian is non-random).
pub(crate) fn hessian_entry_variances(
    model: &dyn ModelSpec,
    theta0: &[f64],
    mc: &McSettings,
) -> Vec<f64> {
    let d = model.dim_param();
    let rows: Vec<Vec<f64>> = par_map_replicates(mc.reps, |rep| {
        let mut rng = Rng::substream(mc.seed, rep);
        let data = model.sample(theta0, 1, &mut rng);
        let h = model.hessian_per_obs(0, 1, data.obs(0), theta0);
        let mut out = Vec::with_capacity(d * d);
        for k in 0..d {
            for i in 0..d {
                out.push(h.get(k, i));
            }
        }
        out
    });
    let rf = mc.reps as f64;
    (0..d * d)
        .map(|col| {
            let vals: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            // non-random Hessian entries must report exactly zero variance
            if vals.iter().all(|&x| x == vals[0]) {
                return 0.0;
            }
            let mean = tree_sum(&vals) / rf;
            let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
            tree_sum(&sq) / (rf - 1.0)
        })
        .collect()
}

/// Squared-score variance term, as a unit-norm contribution `K2 / sqrt(n)`
/// (multiply by `sup_2(h)` for the bound summand).
pub fn k2_term(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: u64,
    mc: &McSettings,
) -> Result<TermEstimate> {
    if let Some(k2) = model.k2_closed(theta0, n) {
        return Ok(TermEstimate::closed(k2 / (n as f64).sqrt()));
    }
    if !model.is_iid() {
        return Err(Error::Domain(format!(
            "Monte Carlo squared-score term requires iid observations (model `{}`)",
            model.id()
        )));
    }
    let root_inv = invsqrt_fisher(model, theta0, n as usize)?;
    let (rows, cross) = squared_score_root_variances(model, theta0, &root_inv, mc);
    // iid: sum_i Var = n Var_1, and the 1/sqrt(n) prefactor cancels it
    let mut value = 0.0;
    let mut se = 0.0;
    for rv in &rows {
        value += 0.25 * rv.sqrt_var;
        se += 0.25 * rv.se;
    }
    for rv in &cross {
        value += 0.5 * rv.sqrt_var;
        se += 0.5 * rv.se;
    }
    let rn = (n as f64).sqrt();
    Ok(TermEstimate::mc(value / rn, se / rn))
}

/// Third-absolute-moment term, as a unit-norm contribution `K3 / sqrt(n)`.
pub fn k3_term(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: u64,
    mc: &McSettings,
) -> Result<TermEstimate> {
    if let Some(k3) = model.k3_closed(theta0, n) {
        return Ok(TermEstimate::closed(k3 / (n as f64).sqrt()));
    }
    if !model.is_iid() {
        return Err(Error::Domain(format!(
            "Monte Carlo third-moment term requires iid observations (model `{}`)",
            model.id()
        )));
    }
    let root_inv = invsqrt_fisher(model, theta0, n as usize)?;
    let (mean, se) = score_diff_cube_moment(model, theta0, &root_inv, mc);
    let rn = (n as f64).sqrt();
    Ok(TermEstimate::mc(mean / (12.0 * rn), se / (12.0 * rn)))
}

/// Per-replicate statistics feeding the linearization term.
struct K1Replicate {
    /// (theta_hat_j - theta0_j)^2
    errsq: Vec<f64>,
    /// (sum_i hessian_i[k][j] + n I_n[k][j])^2, packed k*d+j
    hess_fluct_sq: Vec<f64>,
    /// envelope values squared, packed k*d*d + j*d + v; None outside the
    /// conditioning event |Q| < eps
    env_sq: Option<Vec<f64>>,
}

/// Linearization and conditional-envelope term, as a unit-norm contribution
/// `K1 / sqrt(n)`. Conditional envelope moments use rejection conditioning:
/// only replicates with `|Q| < eps` contribute, and fewer than
/// `mc.min_kept` such replicates is an error.
pub fn k1_term(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: u64,
    eps: f64,
    mc: &McSettings,
) -> Result<TermEstimate> {
    if model.exact_score_coupling() {
        return Ok(TermEstimate::closed(0.0));
    }
    if let Some(k1) = model.k1_closed(theta0, n, eps) {
        return Ok(TermEstimate::closed(k1 / (n as f64).sqrt()));
    }
    let d = model.dim_param();
    let nu = n as usize;
    let fisher = model.fisher_bar(theta0, nu)?;
    let root_inv = fisher.spd_invsqrt()?;

    let reps = par_map_replicates(mc.reps, |rep| -> Result<K1Replicate> {
        let mut rng = Rng::substream(mc.seed, rep);
        let data = model.sample(theta0, nu, &mut rng);
        let theta_hat = model.mle(&data)?;
        let errsq: Vec<f64> = theta_hat
            .iter()
            .zip(theta0)
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        let mut hess_sum = SymMat::zeros(d);
        for i in 0..nu {
            let h = model.hessian_per_obs(i, nu, data.obs(i), theta0);
            for k in 0..d {
                for j in k..d {
                    hess_sum.add_to(k, j, h.get(k, j));
                }
            }
        }
        let mut hess_fluct_sq = vec![0.0; d * d];
        for k in 0..d {
            for j in 0..d {
                let a = hess_sum.get(k, j) + n as f64 * fisher.get(k, j);
                hess_fluct_sq[k * d + j] = a * a;
            }
        }
        let q = worst_coordinate_error(&theta_hat, theta0);
        let env_sq = if q.abs() < eps {
            Some(
                model
                    .envelope_values(theta0, eps, &data)
                    .into_iter()
                    .map(|m| m * m)
                    .collect(),
            )
        } else {
            None
        };
        Ok(K1Replicate { errsq, hess_fluct_sq, env_sq })
    });
    let reps: Vec<K1Replicate> = reps.into_iter().collect::<Result<_>>()?;

    let kept = reps.iter().filter(|r| r.env_sq.is_some()).count();
    if kept < mc.min_kept {
        return Err(Error::ConditioningStarved { kept, min_kept: mc.min_kept });
    }

    let col_weight: Vec<f64> = (0..d)
        .map(|k| (0..d).map(|l| root_inv.get(l, k).abs()).sum())
        .collect();
    let stat = |lo: usize, hi: usize| -> Option<f64> {
        let slice = &reps[lo..hi];
        let m = slice.len() as f64;
        if slice.len() < 2 {
            return None;
        }
        let kept_here = slice.iter().filter(|r| r.env_sq.is_some()).count();
        if kept_here == 0 {
            return None;
        }
        let mean_err: Vec<f64> = (0..d)
            .map(|j| slice.iter().map(|r| r.errsq[j]).sum::<f64>() / m)
            .collect();
        let mean_fluct: Vec<f64> = (0..d * d)
            .map(|i| slice.iter().map(|r| r.hess_fluct_sq[i]).sum::<f64>() / m)
            .collect();
        let mean_env: Vec<f64> = (0..d * d * d)
            .map(|i| {
                slice
                    .iter()
                    .filter_map(|r| r.env_sq.as_ref().map(|e| e[i]))
                    .sum::<f64>()
                    / kept_here as f64
            })
            .collect();
        let mut q1 = 0.0;
        for k in 0..d {
            for j in 0..d {
                q1 += col_weight[k] * (mean_err[j] * mean_fluct[k * d + j]).sqrt();
            }
        }
        let mut q2 = 0.0;
        for k in 0..d {
            for j in 0..d {
                for v in 0..d {
                    let mixed = slice
                        .iter()
                        .map(|r| r.errsq[j] * r.errsq[v])
                        .sum::<f64>()
                        / m;
                    // stored envelopes are per-observation; the whole-likelihood
                    // envelope of the full likelihood is n times larger
                    q2 += col_weight[k]
                        * mixed.sqrt()
                        * n as f64
                        * mean_env[k * d * d + j * d + v].sqrt();
                }
            }
        }
        Some(q1 + 0.5 * q2)
    };
    let value = stat(0, mc.reps).expect("min_kept > 0");
    let se = batched_se(mc.reps, mc.batches, stat);
    let rn = (n as f64).sqrt();
    Ok(TermEstimate::mc(value / rn, se / rn))
}

/// Localization tail `2 sup(h) mse / eps^2`.
pub fn tail_term(mse: f64, eps: f64, sup_h: f64) -> f64 {
    debug_assert!(mse >= 0.0 && eps > 0.0);
    2.0 * sup_h * mse / (eps * eps)
}

/// Assemble the full bound for a model, sample size, localization radius and
/// test function. `eps_override` falls back to the model's preferred radius.
pub fn assemble(
    model: &dyn ModelSpec,
    theta0: &[f64],
    n: u64,
    eps_override: Option<f64>,
    h: &TestFunction,
    mc: &McSettings,
) -> Result<BoundReport> {
    let eps = match eps_override.or_else(|| model.default_epsilon(theta0)) {
        Some(e) if e > 0.0 => e,
        _ => {
            return Err(Error::Domain(format!(
                "model `{}` needs an explicit localization radius",
                model.id()
            )))
        }
    };
    let norms = h.norms();
    // decouple the term estimators' random streams
    let salted = |k: u64| McSettings { seed: mc.seed.wrapping_add(k), ..*mc };

    let k2_unit = k2_term(model, theta0, n, &salted(1))?;
    let k3_unit = k3_term(model, theta0, n, &salted(2))?;
    let (k1_unit, tail_unit) = if model.exact_score_coupling() {
        (TermEstimate::closed(0.0), TermEstimate::closed(0.0))
    } else {
        let k1 = k1_term(model, theta0, n, eps, &salted(3))?;
        let tail = match model.mse_closed(theta0, n) {
            Some(mse) => TermEstimate::closed(tail_term(mse, eps, 1.0)),
            None => {
                let est = harness::estimate_mse(
                    model,
                    theta0,
                    n as usize,
                    mc.reps,
                    mc.seed.wrapping_add(4),
                )?;
                TermEstimate::mc(
                    tail_term(est.value, eps, 1.0),
                    tail_term(est.stderr, eps, 1.0),
                )
            }
        };
        (k1, tail)
    };

    let k1_contrib = k1_unit.scaled(norms.sup_1);
    let k2_contrib = k2_unit.scaled(norms.sup_2);
    let k3_contrib = k3_unit.scaled(norms.sup_3);
    let tail_contrib = tail_unit.scaled(norms.sup_h);
    let total =
        k1_contrib.value + k2_contrib.value + k3_contrib.value + tail_contrib.value;
    let conservative_total = [k1_contrib, k2_contrib, k3_contrib, tail_contrib]
        .iter()
        .map(|t| t.value + 3.0 * t.stderr)
        .sum();
    Ok(BoundReport {
        model: model.id().to_string(),
        n,
        theta0: theta0.to_vec(),
        epsilon: eps,
        h_id: h.id.clone(),
        norms,
        k1_contrib,
        k2_contrib,
        k3_contrib,
        tail_contrib,
        total,
        conservative_total,
        reps: mc.reps as u64,
        seed: mc.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds_closed::bound_straightline;
    use crate::models::{BetaModel, NormalModel, StraightLineModel};
    use crate::testfun::by_id;

    const SL_BASE: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

    #[test]
    fn straightline_k2_reference() {
        let m = StraightLineModel::new(SL_BASE.to_vec(), 1.0).unwrap();
        let k2 = k2_term(&m, &[0.0, 0.0], 4, &McSettings::default()).unwrap();
        assert!((k2.value - 0.756_714_714_343_346_06).abs() < 1e-12, "{}", k2.value);
        assert_eq!(k2.method, TermMethod::Closed);
    }

    #[test]
    fn straightline_k3_reference() {
        let m = StraightLineModel::new(SL_BASE.to_vec(), 1.0).unwrap();
        let k3 = k3_term(&m, &[0.0, 0.0], 4, &McSettings::default()).unwrap();
        assert!((k3.value - 1.694_222_252_951_201_5).abs() < 1e-12, "{}", k3.value);
    }

    #[test]
    fn straightline_assemble_matches_closed_display() {
        let m = StraightLineModel::new(SL_BASE.to_vec(), 1.0).unwrap();
        let h = by_id(2, "sine_sum").unwrap();
        let mc = McSettings::new(100, 5);
        for n in [4u64, 8, 40, 200] {
            let report = assemble(&m, &[1.0, -2.0], n, None, &h, &mc).unwrap();
            let x = m.covariates(n as usize);
            let closed = bound_straightline(n, &x, &h.norms()).unwrap();
            assert!((report.total - closed).abs() <= 1e-9, "n={n}");
            assert_eq!(report.k1_contrib.value, 0.0);
            assert_eq!(report.tail_contrib.value, 0.0);
        }
    }

    #[test]
    fn normal_closed_terms_respect_rounded_constants() {
        let m = NormalModel;
        let theta = [0.0, 1.0];
        let mc = McSettings::default();
        for n in [50u64, 500, 10_000] {
            let rn = (n as f64).sqrt();
            let k2 = k2_term(&m, &theta, n, &mc).unwrap();
            assert!((k2.value - 2.407_001_726_036_654 / rn).abs() < 1e-12);
            assert!(k2.value <= 2.5 / rn);
            let k3 = k3_term(&m, &theta, n, &mc).unwrap();
            assert!((k3.value - 18.397_519_948_012_899 / rn).abs() < 1e-12);
            assert!(k3.value <= 19.0 / rn);
            // first linearization quantity is below 4 sqrt 2
            let eps = 0.5;
            let k1 = k1_term(&m, &theta, n, eps, &mc).unwrap();
            assert!(k1.value > 0.0);
            let q1 = 2.0_f64.sqrt() + 3.0 * (2.0_f64 - 1.0 / n as f64).sqrt();
            assert!(q1 <= 4.0 * 2.0_f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn normal_k1_envelope_quantity_reference() {
        // frozen high-precision evaluation at sigma2 = 1, n = 100, eps = 1/2
        let m = NormalModel;
        let k1 = k1_term(&m, &[0.0, 1.0], 100, 0.5, &McSettings::default()).unwrap();
        let q1 = 5.646_234_356_272_860_4;
        let q2 = 1_482.663_083_497_528_3;
        assert!(((k1.value * 10.0) - (q1 + q2)).abs() < 1e-9, "{}", k1.value);
    }

    #[test]
    fn k_term_contributions_scale_like_inverse_root_n() {
        // log-log slope of each unit-norm contribution over n = 1e2..1e5
        let m = NormalModel;
        let theta = [0.0, 1.0];
        let mc = McSettings::default();
        let ns: Vec<f64> = (0..7).map(|k| 10.0_f64.powf(2.0 + 0.5 * k as f64)).collect();
        for term in ["k1", "k2", "k3"] {
            let vals: Vec<f64> = ns
                .iter()
                .map(|&n| match term {
                    "k1" => k1_term(&m, &theta, n as u64, 0.5, &mc).unwrap().value,
                    "k2" => k2_term(&m, &theta, n as u64, &mc).unwrap().value,
                    _ => k3_term(&m, &theta, n as u64, &mc).unwrap().value,
                })
                .collect();
            let fit = crate::harness::fit_rate(&ns, &vals).unwrap();
            assert!(
                fit.slope > -0.55 && fit.slope < -0.45,
                "{term} slope {}",
                fit.slope
            );
        }
    }

    #[test]
    fn normal_engine_terms_never_exceed_rounded_closed_form() {
        // the engine's exact-path terms sit below the rounded-up
        // closed-form constants, term by term
        let m = NormalModel;
        let h = by_id(2, "cosine_sum").unwrap();
        let mc = McSettings::new(200, 2);
        for (theta, n) in [([0.0, 1.0], 50u64), ([2.0, 0.6], 400)] {
            let report = assemble(&m, &theta, n, None, &h, &mc).unwrap();
            let rounded =
                crate::bounds_closed::bound_normal_terms(n, theta[1], &h.norms());
            let slack = 1e-12;
            assert!(report.k1_contrib.value <= rounded.k1 + slack);
            assert!(report.k2_contrib.value <= rounded.k2 + slack);
            assert!(report.k3_contrib.value <= rounded.k3 + slack);
            assert!(report.tail_contrib.value <= rounded.tail + slack);
            assert!(report.total <= rounded.total() + slack);
        }
    }

    #[test]
    fn normal_k2_halves_when_n_quadruples() {
        let m = NormalModel;
        let mc = McSettings::default();
        let a = k2_term(&m, &[0.0, 1.0], 100, &mc).unwrap().value;
        let b = k2_term(&m, &[0.0, 1.0], 400, &mc).unwrap().value;
        assert!((a - 2.0 * b).abs() < 1e-14);
    }

    #[test]
    fn tail_term_examples() {
        assert_eq!(tail_term(0.0, 0.5, 1.0), 0.0);
        let a = tail_term(0.12, 0.5, 2.0);
        let b = tail_term(0.12, 1.0, 2.0);
        assert!((a - 4.0 * b).abs() < 1e-15);
        // normal closed form: 2 sup_h mse / eps^2 <= 8 sup_h (1 + 2 s2)/(n s2)
        let m = NormalModel;
        let (s2, n) = (1.0, 100u64);
        let mse = m.mse_closed(&[0.0, s2], n).unwrap();
        let t = tail_term(mse, s2 / 2.0, 1.0);
        assert!(t <= 8.0 * (1.0 + 2.0 * s2) / (n as f64 * s2) + 1e-15);
    }

    #[test]
    fn zero_norms_zero_total() {
        let m = NormalModel;
        let mut h = by_id(2, "sine_sum").unwrap();
        h.sup_h = 0.0;
        h.sup_1 = 0.0;
        h.sup_2 = 0.0;
        h.sup_3 = 0.0;
        let report = assemble(&m, &[0.0, 1.0], 100, None, &h, &McSettings::new(500, 1)).unwrap();
        assert_eq!(report.total, 0.0);
    }

    #[test]
    fn k3_estimator_is_symmetric_under_copy_swap() {
        // the per-pair statistic only involves |s' - s|, so swapping the
        // copies changes nothing
        let m = BetaModel;
        let theta = [2.0, 3.0];
        let root_inv = m.fisher_bar(&theta, 1).unwrap().spd_invsqrt().unwrap();
        let mut rng = Rng::new(1);
        for _ in 0..100 {
            let x = [rng.beta(2.0, 3.0)];
            let y = [rng.beta(2.0, 3.0)];
            let mut buf = [0.0; 2];
            let mut sx = [0.0; 2];
            let mut sy = [0.0; 2];
            transformed_score(&m, &root_inv, &theta, &x, &mut buf, &mut sx);
            transformed_score(&m, &root_inv, &theta, &y, &mut buf, &mut sy);
            let f = |a: &[f64], b: &[f64]| {
                ((a[0] - b[0]).abs() + (a[1] - b[1]).abs()).powi(3)
            };
            assert_eq!(f(&sx, &sy).to_bits(), f(&sy, &sx).to_bits());
        }
    }

    #[test]
    fn beta_k1_hessian_part_vanishes() {
        // deterministic Hessian: Var(d2 l + n I) = 0, and constant envelopes
        // make the conditional moment the constant itself
        let m = BetaModel;
        let theta = [2.0, 3.0];
        let mc = McSettings { reps: 400, seed: 3, min_kept: 50, batches: 10 };
        let k1 = k1_term(&m, &theta, 400, 1.0, &mc).unwrap();
        // with Q1 = 0 the value is (n/2) sum_kjv w_k sqrt(mixed) M_kjv / sqrt n
        assert!(k1.value.is_finite() && k1.value > 0.0);
        let env = m.envelope_constants(&theta, 1.0).unwrap();
        assert!(env.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn conditioning_starved_is_reported() {
        let m = BetaModel;
        // eps tiny enough that almost no replicate satisfies |Q| < eps
        let mc = McSettings { reps: 300, seed: 9, min_kept: 200, batches: 10 };
        let res = k1_term(&m, &[2.0, 3.0], 50, 1e-6, &mc);
        assert!(matches!(res, Err(Error::ConditioningStarved { .. })));
    }

    #[test]
    fn normal_mc_k2_matches_closed_within_4se() {
        // force the Monte Carlo path through a wrapper model lacking hooks
        struct NoHooks(NormalModel);
        impl ModelSpec for NoHooks {
            fn id(&self) -> &'static str {
                "normal_mc"
            }
            fn dim_param(&self) -> usize {
                2
            }
            fn dim_obs(&self) -> usize {
                1
            }
            fn is_iid(&self) -> bool {
                true
            }
            fn sample(&self, t: &[f64], n: usize, r: &mut Rng) -> crate::models::Dataset {
                self.0.sample(t, n, r)
            }
            fn score_per_obs(&self, i: usize, n: usize, o: &[f64], t: &[f64], out: &mut [f64]) {
                self.0.score_per_obs(i, n, o, t, out)
            }
            fn hessian_per_obs(&self, i: usize, n: usize, o: &[f64], t: &[f64]) -> SymMat {
                self.0.hessian_per_obs(i, n, o, t)
            }
            fn fisher_per_obs(&self, i: usize, n: usize, t: &[f64]) -> Result<SymMat> {
                self.0.fisher_per_obs(i, n, t)
            }
            fn mle(&self, d: &crate::models::Dataset) -> Result<Vec<f64>> {
                self.0.mle(d)
            }
            fn default_epsilon(&self, t: &[f64]) -> Option<f64> {
                self.0.default_epsilon(t)
            }
            fn envelope_values(
                &self,
                t: &[f64],
                e: f64,
                d: &crate::models::Dataset,
            ) -> Vec<f64> {
                self.0.envelope_values(t, e, d)
            }
        }
        let m = NoHooks(NormalModel);
        let mc = McSettings::new(20_000, 21);
        let n = 50;
        let est = k2_term(&m, &[0.0, 1.0], n, &mc).unwrap();
        let closed = 2.407_001_726_036_654 / (n as f64).sqrt();
        // exact sampling SD of the statistic, from fourth central moments of
        // the squared transformed scores: mu4(Z^2) = 60, mu4((Z^2-1)^2/2) =
        // 71484 (E(Z^4-2Z^2-1)^4 = 1143744), mu4(Z(Z^2-1)/sqrt2) = 1797
        let rf = mc.reps as f64;
        let sd = 0.25 * (56.0_f64 / rf).sqrt() / (2.0 * 2.0_f64.sqrt())
            + 0.25 * (71_288.0_f64 / rf).sqrt() / (2.0 * 14.0_f64.sqrt())
            + 0.5 * (1_772.0_f64 / rf).sqrt() / (2.0 * 5.0_f64.sqrt());
        let sd = sd / (n as f64).sqrt();
        assert!(
            (est.value - closed).abs() <= 4.0 * sd,
            "est {} +- {} vs {closed}",
            est.value,
            sd
        );
        // the empirical delta-method stderr should be the right order
        assert!(est.stderr > 0.2 * sd && est.stderr < 3.0 * sd);
        let est3 = k3_term(&m, &[0.0, 1.0], n, &mc).unwrap();
        // exact pair-statistic mean is below the closed majorant
        assert!(est3.value <= 18.397_519_948_012_899 / (n as f64).sqrt() + 4.0 * est3.stderr);
    }
}
