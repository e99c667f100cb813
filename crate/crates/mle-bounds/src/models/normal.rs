//! Normal model with unknown mean and variance, `theta = (mu, sigma2)`.
//!
//! Everything the bound engine needs is available in closed form for this
//! model; the expressions are exact moment computations except where noted.

use crate::error::{Error, Result};
use crate::models::{Dataset, ModelSpec};
use crate::rng::Rng;
use crate::symmat::SymMat;

#[derive(Clone, Copy, Debug, Default)]
pub struct NormalModel;

/// Closed-form MLE `(xbar, (1/n) sum (x_i - xbar)^2)` with a degeneracy flag
/// for samples whose every observation is identical.
pub fn normal_mle(data: &[f64]) -> ((f64, f64), bool) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let s2 = ss / n;
    ((mean, s2), s2 == 0.0)
}

impl NormalModel {
    /// E (sigma2_hat - sigma2)^2 = sigma2^2 (2 - 1/n) / n.
    pub fn var_s2hat(sigma2: f64, n: u64) -> f64 {
        let n = n as f64;
        sigma2 * sigma2 * (2.0 - 1.0 / n) / n
    }

    /// E (xbar - mu)^4 = 3 sigma2^2 / n^2.
    pub fn mean_fourth(sigma2: f64, n: u64) -> f64 {
        let n = n as f64;
        3.0 * sigma2 * sigma2 / (n * n)
    }

    /// E (xbar - mu)^2 (sigma2_hat - sigma2)^2 = sigma2^3 (2 - 1/n) / n^2.
    pub fn mixed_fourth(sigma2: f64, n: u64) -> f64 {
        let n = n as f64;
        sigma2.powi(3) * (2.0 - 1.0 / n) / (n * n)
    }

    /// E (sigma2_hat - sigma2)^4 = sigma2^4 (12 + 4/n - 15/n^2) / n^2.
    pub fn s2_fourth(sigma2: f64, n: u64) -> f64 {
        let n = n as f64;
        sigma2.powi(4) * (12.0 + 4.0 / n - 15.0 / (n * n)) / (n * n)
    }
}

impl ModelSpec for NormalModel {
    fn id(&self) -> &'static str {
        "normal"
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
        let (mu, s) = (theta[0], theta[1].sqrt());
        let values = (0..n).map(|_| mu + s * rng.normal()).collect();
        Dataset { t: 1, values, seed: 0 }
    }

    fn score_per_obs(&self, _i: usize, _n: usize, obs: &[f64], theta: &[f64], out: &mut [f64]) {
        let (mu, s2) = (theta[0], theta[1]);
        let c = obs[0] - mu;
        out[0] = c / s2;
        out[1] = -0.5 / s2 + c * c / (2.0 * s2 * s2);
    }

    fn hessian_per_obs(&self, _i: usize, _n: usize, obs: &[f64], theta: &[f64]) -> SymMat {
        let (mu, s2) = (theta[0], theta[1]);
        let c = obs[0] - mu;
        let mut h = SymMat::zeros(2);
        h.set(0, 0, -1.0 / s2);
        h.set(0, 1, -c / (s2 * s2));
        h.set(1, 1, 0.5 / (s2 * s2) - c * c / s2.powi(3));
        h
    }

    fn fisher_per_obs(&self, _i: usize, _n: usize, theta: &[f64]) -> Result<SymMat> {
        let s2 = theta[1];
        if !(s2 > 0.0) {
            return Err(Error::NotPd(format!("sigma2 = {s2}")));
        }
        Ok(SymMat::diag(&[1.0 / s2, 0.5 / (s2 * s2)]))
    }

    fn mle(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n() < 2 {
            return Err(Error::DegenerateSample);
        }
        let ((mu, s2), degenerate) = normal_mle(&data.values);
        if degenerate {
            return Err(Error::DegenerateSample);
        }
        Ok(vec![mu, s2])
    }

    fn fit_simulated(&self, theta0: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        // streaming Welford accumulation
        let (mu, s) = (theta0[0], theta0[1].sqrt());
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for k in 0..n {
            let x = mu + s * rng.normal();
            let d = x - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (x - mean);
        }
        let s2 = m2 / n as f64;
        if s2 == 0.0 {
            return Err(Error::DegenerateSample);
        }
        Ok(vec![mean, s2])
    }

    fn default_epsilon(&self, theta0: &[f64]) -> Option<f64> {
        Some(theta0[1] / 2.0)
    }

    /// Per-observation envelopes of the third log-likelihood derivatives in
    /// the eps-ball, as functions of the whole sample:
    /// M_111 = 0, M_112 = 1/(s2-eps)^2,
    /// M_122 = 2(|xbar-mu|+eps)/(s2-eps)^3,
    /// M_222 = 1/(s2-eps)^3 + 9(s2_hat + (xbar-mu)^2 + eps^2)/(s2-eps)^4.
    fn envelope_values(&self, theta0: &[f64], eps: f64, data: &Dataset) -> Vec<f64> {
        let (mu, s2) = (theta0[0], theta0[1]);
        assert!(eps > 0.0 && eps < s2, "envelope needs 0 < eps < sigma2");
        let ((xbar, s2_hat), _) = normal_mle(&data.values);
        let g = s2 - eps;
        let m112 = 1.0 / (g * g);
        let m122 = 2.0 * ((xbar - mu).abs() + eps) / g.powi(3);
        let m222 = 1.0 / g.powi(3)
            + 9.0 * (s2_hat + (xbar - mu) * (xbar - mu) + eps * eps) / g.powi(4);
        let mut out = vec![0.0; 8];
        for k in 0..2 {
            for j in 0..2 {
                for v in 0..2 {
                    let ones = 3 - (k + j + v);
                    out[k * 4 + j * 2 + v] = match ones {
                        3 => 0.0,
                        2 => m112,
                        1 => m122,
                        _ => m222,
                    };
                }
            }
        }
        out
    }

    /// Exact linearization factor plus the certified envelope factor at
    /// localization radius `eps`; contribution to the bound is
    /// `sup_1(h) * K1 / sqrt(n)`.
    ///
    /// The first quantity is the exact moment combination
    /// `sqrt(2) + 3 sqrt(2 - 1/n)` (bounded by 4 sqrt 2). The second is the
    /// conditional-envelope majorant
    /// `s2^2/(s2-e)^2 [sqrt 2 + sqrt(3/2) + 8 sqrt2 s (s2/n + e^2)^(1/2)/(s2-e)]
    ///  + 4 s2^3/(s2-e)^3 [1 + 162((e + e^2 + s2)^2 + 3 s2^2/n^2)/(s2-e)^2]^(1/2)`.
    fn k1_closed(&self, theta0: &[f64], n: u64, eps: f64) -> Option<f64> {
        let s2 = theta0[1];
        if !(eps > 0.0 && eps < s2) {
            return None;
        }
        let nf = n as f64;
        let q1 = 2.0_f64.sqrt() + 3.0 * (2.0 - 1.0 / nf).sqrt();
        let g = s2 - eps;
        let s = s2.sqrt();
        let q2a = s2 * s2 / (g * g)
            * (2.0_f64.sqrt()
                + 1.5_f64.sqrt()
                + 8.0 * 2.0_f64.sqrt() * s / g * (s2 / nf + eps * eps).sqrt());
        let q2b = 4.0 * s2.powi(3) / g.powi(3)
            * (1.0
                + 162.0 / (g * g)
                    * ((eps + eps * eps + s2).powi(2) + 3.0 * s2 * s2 / (nf * nf)))
            .sqrt();
        Some(q1 + q2a + q2b)
    }

    /// Exact: (sqrt 2 + sqrt 14)/4 from the per-coordinate squared scores
    /// plus sqrt 5 / 2 from the cross product; free of mu, sigma2 and n.
    fn k2_closed(&self, _theta0: &[f64], _n: u64) -> Option<f64> {
        Some((2.0_f64.sqrt() + 14.0_f64.sqrt()) / 4.0 + 5.0_f64.sqrt() / 2.0)
    }

    /// Third-moment majorant (8/3)(E|Z|^3 + E Z^6 / (2 sqrt 2)) with
    /// E|Z|^3 = 2 sqrt2/sqrt pi and E Z^6 = 15; bounded by 19.
    fn k3_closed(&self, _theta0: &[f64], _n: u64) -> Option<f64> {
        let e_abs3 = 2.0 * 2.0_f64.sqrt() / std::f64::consts::PI.sqrt();
        Some(8.0 / 3.0 * (e_abs3 + 15.0 / (2.0 * 2.0_f64.sqrt())))
    }

    /// E (xbar-mu)^2 + E (s2_hat - s2)^2 = s2/n + s2^2 (2 - 1/n)/n.
    fn mse_closed(&self, theta0: &[f64], n: u64) -> Option<f64> {
        let s2 = theta0[1];
        let nf = n as f64;
        Some(s2 / nf + s2 * s2 * (2.0 - 1.0 / nf) / nf)
    }
}
