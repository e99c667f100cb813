//! Beta model with both shape parameters unknown, `theta = (alpha, beta)`.
//!
//! No closed-form MLE exists. The solver runs damped Newton iterations on the
//! two-dimensional stationarity system, which depends on the data only
//! through the sufficient statistics `mean log x` and `mean log(1-x)`; the
//! same system is solved whether the sample is materialized or streamed.

use crate::error::{Error, Result};
use crate::models::{Dataset, ModelSpec};
use crate::rng::Rng;
use crate::specfun::{digamma, ln_gamma, trigamma, zeta3_upper};
use crate::symmat::SymMat;

#[derive(Clone, Copy, Debug, Default)]
pub struct BetaModel;

/// Fisher information determinant
/// `psi1(a) psi1(b) - psi1(a+b) (psi1(a) + psi1(b))`.
pub fn delta_i(alpha: f64, beta: f64) -> Result<f64> {
    let pa = trigamma(alpha)?;
    let pb = trigamma(beta)?;
    let ps = trigamma(alpha + beta)?;
    Ok(pa * pb - ps * (pa + pb))
}

/// Expected Fisher information for one observation:
/// `[[psi1(a) - psi1(a+b), -psi1(a+b)], [-psi1(a+b), psi1(b) - psi1(a+b)]]`.
pub fn beta_fisher(alpha: f64, beta: f64) -> Result<SymMat> {
    let di = delta_i(alpha, beta)?;
    if di <= 0.0 {
        return Err(Error::NonPdFisher { delta_i: di });
    }
    let pa = trigamma(alpha)?;
    let pb = trigamma(beta)?;
    let ps = trigamma(alpha + beta)?;
    let mut m = SymMat::zeros(2);
    m.set(0, 0, pa - ps);
    m.set(0, 1, -ps);
    m.set(1, 1, pb - ps);
    Ok(m)
}

/// Sufficient statistics of a Beta sample. The moment accumulators back the
/// method-of-moments Newton start.
#[derive(Clone, Copy, Debug)]
pub struct BetaSuffStats {
    pub n: usize,
    /// mean log x
    pub t1: f64,
    /// mean log(1-x)
    pub t2: f64,
    pub mean: f64,
    pub var: f64,
}

impl BetaSuffStats {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut acc = StreamingStats::new();
        for &x in values {
            acc.push(x)?;
        }
        acc.finish(n)
    }
}

/// Kahan-compensated accumulators; at n ~ 1e8 plain summation noise would be
/// visible next to the estimator's own fluctuations.
struct StreamingStats {
    s: [f64; 4],
    c: [f64; 4],
}

impl StreamingStats {
    fn new() -> Self {
        StreamingStats { s: [0.0; 4], c: [0.0; 4] }
    }

    #[inline]
    fn add(&mut self, k: usize, v: f64) {
        let y = v - self.c[k];
        let t = self.s[k] + y;
        self.c[k] = (t - self.s[k]) - y;
        self.s[k] = t;
    }

    #[inline]
    fn push(&mut self, x: f64) -> Result<()> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::NonInterior(format!("x = {x}")));
        }
        self.add(0, x.ln());
        self.add(1, (1.0 - x).ln());
        self.add(2, x);
        self.add(3, x * x);
        Ok(())
    }

    fn finish(&self, n: usize) -> Result<BetaSuffStats> {
        if n < 2 {
            return Err(Error::DegenerateSample);
        }
        let nf = n as f64;
        let mean = self.s[2] / nf;
        let var = (self.s[3] / nf - mean * mean).max(0.0);
        Ok(BetaSuffStats { n, t1: self.s[0] / nf, t2: self.s[1] / nf, mean, var })
    }
}

/// Per-observation log-likelihood at the sufficient statistics.
fn mean_loglik(alpha: f64, beta: f64, stats: &BetaSuffStats) -> f64 {
    let ln_b = ln_gamma(alpha).unwrap() + ln_gamma(beta).unwrap()
        - ln_gamma(alpha + beta).unwrap();
    (alpha - 1.0) * stats.t1 + (beta - 1.0) * stats.t2 - ln_b
}

/// Newton solve of the stationarity system
/// `psi(a+b) - psi(a) + t1 = 0`, `psi(a+b) - psi(b) + t2 = 0`.
///
/// Starts from the method-of-moments point and halves steps that leave the
/// positive quadrant or decrease the log-likelihood. Convergence is declared
/// when both per-observation score components are below `tol`.
pub fn beta_mle_from_stats(stats: &BetaSuffStats, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    // method-of-moments start
    let (m, v) = (stats.mean, stats.var);
    let (mut a, mut b) = if v > 0.0 && v < m * (1.0 - m) {
        let c = m * (1.0 - m) / v - 1.0;
        (m * c, (1.0 - m) * c)
    } else {
        (1.0, 1.0)
    };
    a = a.clamp(1e-3, 1e6);
    b = b.clamp(1e-3, 1e6);

    let mut merit = mean_loglik(a, b, stats);
    for _ in 0..max_iter {
        let g1 = digamma(a + b)? - digamma(a)? + stats.t1;
        let g2 = digamma(a + b)? - digamma(b)? + stats.t2;
        if g1.abs() <= tol && g2.abs() <= tol {
            return Ok(vec![a, b]);
        }
        let ps = trigamma(a + b)?;
        let h11 = ps - trigamma(a)?;
        let h22 = ps - trigamma(b)?;
        let det = h11 * h22 - ps * ps;
        if det == 0.0 {
            return Err(Error::NoConvergence { max_iter });
        }
        // solve H d = -g for the 2x2 system
        let d1 = -(h22 * g1 - ps * g2) / det;
        let d2 = -(h11 * g2 - ps * g1) / det;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (a + step * d1, b + step * d2);
            if na > 0.0 && nb > 0.0 {
                let nm = mean_loglik(na, nb, stats);
                // absolute slack: near the optimum genuine merit gains fall
                // below the evaluation noise of the log-likelihood
                if nm >= merit - 1e-12 {
                    a = na;
                    b = nb;
                    merit = nm;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { max_iter });
        }
    }
    let g1 = digamma(a + b)? - digamma(a)? + stats.t1;
    let g2 = digamma(a + b)? - digamma(b)? + stats.t2;
    if g1.abs() <= tol && g2.abs() <= tol {
        Ok(vec![a, b])
    } else {
        Err(Error::NoConvergence { max_iter })
    }
}

pub const BETA_MLE_TOL: f64 = 1e-10;
pub const BETA_MLE_MAX_ITER: usize = 200;

/// MLE of both shape parameters; all observations must lie strictly inside
/// (0, 1) and `n >= 2`.
pub fn beta_mle(values: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let stats = BetaSuffStats::from_slice(values)?;
    beta_mle_from_stats(&stats, tol, max_iter)
}

impl ModelSpec for BetaModel {
    fn id(&self) -> &'static str {
        "beta"
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

    fn sample(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Dataset {
        let values = (0..n).map(|_| rng.beta(theta[0], theta[1])).collect();
        Dataset { t: 1, values, seed: 0 }
    }

    fn score_per_obs(&self, _i: usize, _n: usize, obs: &[f64], theta: &[f64], out: &mut [f64]) {
        let (a, b) = (theta[0], theta[1]);
        let ps = digamma(a + b).unwrap();
        out[0] = ps - digamma(a).unwrap() + obs[0].ln();
        out[1] = ps - digamma(b).unwrap() + (1.0 - obs[0]).ln();
    }

    /// Deterministic: the Hessian of the Beta log-density does not involve
    /// the observation.
    fn hessian_per_obs(&self, _i: usize, _n: usize, _obs: &[f64], theta: &[f64]) -> SymMat {
        let (a, b) = (theta[0], theta[1]);
        let ps = trigamma(a + b).unwrap();
        let mut h = SymMat::zeros(2);
        h.set(0, 0, ps - trigamma(a).unwrap());
        h.set(0, 1, ps);
        h.set(1, 1, ps - trigamma(b).unwrap());
        h
    }

    fn fisher_per_obs(&self, _i: usize, _n: usize, theta: &[f64]) -> Result<SymMat> {
        beta_fisher(theta[0], theta[1])
    }

    fn mle(&self, data: &Dataset) -> Result<Vec<f64>> {
        beta_mle(&data.values, BETA_MLE_TOL, BETA_MLE_MAX_ITER)
    }

    fn fit_simulated(&self, theta0: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        let mut acc = StreamingStats::new();
        for _ in 0..n {
            acc.push(rng.beta(theta0[0], theta0[1]))?;
        }
        beta_mle_from_stats(&acc.finish(n)?, BETA_MLE_TOL, BETA_MLE_MAX_ITER)
    }

    fn support_radius(&self) -> Option<f64> {
        // observations live in (0, 1)
        Some(1.0)
    }

    fn default_epsilon(&self, theta0: &[f64]) -> Option<f64> {
        Some(theta0[0].min(theta0[1]) / 2.0)
    }

    fn envelope_values(&self, theta0: &[f64], eps: f64, _data: &Dataset) -> Vec<f64> {
        self.envelope_constants(theta0, eps)
            .expect("beta envelopes are constant")
    }

    /// Constant envelopes of the third log-density derivatives on the
    /// eps-ball around (alpha, beta):
    /// M_111 = 6 b/(a-e)^4 + b pi^4/15, M_222 with the roles swapped, and
    /// every mixed entry 2/(a+b-2e)^3 + 2 * zeta3_upper.
    fn envelope_constants(&self, theta0: &[f64], eps: f64) -> Option<Vec<f64>> {
        let (a, b) = (theta0[0], theta0[1]);
        assert!(
            eps > 0.0 && eps < a.min(b),
            "beta envelopes need 0 < eps < min(alpha, beta)"
        );
        let pi4_15 = std::f64::consts::PI.powi(4) / 15.0;
        let m111 = 6.0 * b / (a - eps).powi(4) + b * pi4_15;
        let m222 = 6.0 * a / (b - eps).powi(4) + a * pi4_15;
        let cross = 2.0 / (a + b - 2.0 * eps).powi(3) + 2.0 * zeta3_upper();
        let mut out = vec![0.0; 8];
        for k in 0..2 {
            for j in 0..2 {
                for v in 0..2 {
                    let ones = 3 - (k + j + v);
                    out[k * 4 + j * 2 + v] = match ones {
                        3 => m111,
                        0 => m222,
                        _ => cross,
                    };
                }
            }
        }
        Some(out)
    }
}
