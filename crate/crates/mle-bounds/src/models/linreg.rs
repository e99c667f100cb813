//! Straight-line regression `Y_i = b1 + b2 (x_i - xbar) + e_i` with known
//! noise variance, plus the general least-squares solver.
//!
//! The covariate pattern is a base vector tiled to the requested sample size
//! and centered on the sample mean, so the design Gram matrix is diagonal.
//! Observations are independent but not identically distributed; the
//! standardized MLE coincides with the standardized score exactly, so the
//! linearization and tail terms of the general bound vanish.

use crate::error::{Error, Result};
use crate::models::{Dataset, ModelSpec};
use crate::rng::Rng;
use crate::symmat::SymMat;

#[derive(Clone, Debug)]
pub struct StraightLineModel {
    base_x: Vec<f64>,
    pub sigma2: f64,
}

impl StraightLineModel {
    pub fn new(base_x: Vec<f64>, sigma2: f64) -> Result<Self> {
        if base_x.is_empty() || base_x.iter().all(|&v| v == base_x[0]) {
            return Err(Error::DegenerateDesign);
        }
        if sigma2 < 0.0 {
            return Err(Error::Domain(format!("sigma2 must be >= 0, got {sigma2}")));
        }
        Ok(StraightLineModel { base_x, sigma2 })
    }

    /// Tiled covariates for sample size `n`, centered on their own mean.
    pub fn covariates(&self, n: usize) -> Vec<f64> {
        let mut x: Vec<f64> = (0..n).map(|i| self.base_x[i % self.base_x.len()]).collect();
        // centering twice leaves the residual mean at roundoff level
        for _ in 0..2 {
            let mean = x.iter().sum::<f64>() / n as f64;
            for v in x.iter_mut() {
                *v -= mean;
            }
        }
        x
    }

    /// Columns of c = X (X'X)^(-1/2) for the centered design:
    /// c_i1 = 1/sqrt n, c_i2 = (x_i - xbar)/sqrt SS.
    fn unit_columns(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let x = self.covariates(n);
        let ss: f64 = x.iter().map(|v| v * v).sum();
        let c1 = vec![1.0 / (n as f64).sqrt(); n];
        let c2 = x.iter().map(|v| v / ss.sqrt()).collect();
        (c1, c2)
    }

    pub fn score_with_covariate(&self, xi: f64, y: f64, theta: &[f64], out: &mut [f64]) {
        let resid = y - theta[0] - theta[1] * xi;
        out[0] = resid / self.sigma2;
        out[1] = xi * resid / self.sigma2;
    }

    /// Standardized score path `n^(-1/2) [I_n]^(-1/2) grad l(theta0)`, which
    /// equals the standardized MLE path for this model.
    pub fn standardized_score(&self, theta0: &[f64], data: &Dataset) -> Result<Vec<f64>> {
        let n = data.n();
        let x = self.covariates(n);
        let mut grad = [0.0, 0.0];
        let mut sc = [0.0, 0.0];
        for (i, &xi) in x.iter().enumerate() {
            self.score_with_covariate(xi, data.values[i], theta0, &mut sc);
            grad[0] += sc[0];
            grad[1] += sc[1];
        }
        let root_inv = self.fisher_bar(theta0, n)?.spd_invsqrt()?;
        let w = root_inv.matvec(&grad);
        let scale = 1.0 / (n as f64).sqrt();
        Ok(w.iter().map(|v| v * scale).collect())
    }
}

/// Least-squares / maximum-likelihood fit `(X'X)^-1 X'Y` for a general design
/// matrix (row-major, n x d).
pub fn linreg_mle(design: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = design.len();
    assert!(n >= 1 && n == y.len());
    let d = design[0].len();
    let xtx = SymMat::from_fn(d, |a, b| (0..n).map(|i| design[i][a] * design[i][b]).sum());
    let xty: Vec<f64> = (0..d)
        .map(|a| (0..n).map(|i| design[i][a] * y[i]).sum())
        .collect();
    let inv = xtx
        .spd_inverse()
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(inv.matvec(&xty))
}

impl ModelSpec for StraightLineModel {
    fn id(&self) -> &'static str {
        "straight_line"
    }

    fn dim_param(&self) -> usize {
        2
    }

    fn dim_obs(&self) -> usize {
        1
    }

    fn is_iid(&self) -> bool {
        false
    }

    fn sample(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Dataset {
        let x = self.covariates(n);
        let s = self.sigma2.sqrt();
        let values = x
            .iter()
            .map(|&xi| theta[0] + theta[1] * xi + s * rng.normal())
            .collect();
        Dataset { t: 1, values, seed: 0 }
    }

    fn score_per_obs(&self, i: usize, n: usize, obs: &[f64], theta: &[f64], out: &mut [f64]) {
        let xi = self.covariates(n)[i];
        self.score_with_covariate(xi, obs[0], theta, out);
    }

    fn hessian_per_obs(&self, i: usize, n: usize, _obs: &[f64], _theta: &[f64]) -> SymMat {
        let xi = self.covariates(n)[i];
        let mut h = SymMat::zeros(2);
        h.set(0, 0, -1.0 / self.sigma2);
        h.set(0, 1, -xi / self.sigma2);
        h.set(1, 1, -xi * xi / self.sigma2);
        h
    }

    fn fisher_per_obs(&self, i: usize, n: usize, _theta: &[f64]) -> Result<SymMat> {
        if !(self.sigma2 > 0.0) {
            return Err(Error::NotPd(format!("sigma2 = {}", self.sigma2)));
        }
        let xi = self.covariates(n)[i];
        let mut m = SymMat::zeros(2);
        m.set(0, 0, 1.0 / self.sigma2);
        m.set(0, 1, xi / self.sigma2);
        m.set(1, 1, xi * xi / self.sigma2);
        Ok(m)
    }

    fn fisher_bar(&self, _theta: &[f64], n: usize) -> Result<SymMat> {
        if !(self.sigma2 > 0.0) {
            return Err(Error::NotPd(format!("sigma2 = {}", self.sigma2)));
        }
        let x = self.covariates(n);
        let sx: f64 = x.iter().sum();
        let ss: f64 = x.iter().map(|v| v * v).sum();
        let mut m = SymMat::zeros(2);
        let c = 1.0 / (n as f64 * self.sigma2);
        m.set(0, 0, n as f64 * c);
        m.set(0, 1, sx * c);
        m.set(1, 1, ss * c);
        Ok(m)
    }

    fn mle(&self, data: &Dataset) -> Result<Vec<f64>> {
        let n = data.n();
        let x = self.covariates(n);
        let ss: f64 = x.iter().map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(Error::DegenerateDesign);
        }
        let ybar = data.values.iter().sum::<f64>() / n as f64;
        let sxy: f64 = x.iter().zip(&data.values).map(|(a, b)| a * b).sum();
        Ok(vec![ybar, sxy / ss])
    }

    fn fit_simulated(&self, theta0: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        let x = self.covariates(n);
        let ss: f64 = x.iter().map(|v| v * v).sum();
        let s = self.sigma2.sqrt();
        let mut sy = 0.0;
        let mut sxy = 0.0;
        for &xi in &x {
            let y = theta0[0] + theta0[1] * xi + s * rng.normal();
            sy += y;
            sxy += xi * y;
        }
        Ok(vec![sy / n as f64, sxy / ss])
    }

    fn default_epsilon(&self, _theta0: &[f64]) -> Option<f64> {
        // unused: coupling is exact, so no localization is ever applied
        Some(1.0)
    }

    fn envelope_values(&self, _theta0: &[f64], _eps: f64, _data: &Dataset) -> Vec<f64> {
        vec![0.0; 8]
    }

    fn envelope_constants(&self, _theta0: &[f64], _eps: f64) -> Option<Vec<f64>> {
        Some(vec![0.0; 8])
    }

    fn exact_score_coupling(&self) -> bool {
        true
    }

    fn k1_closed(&self, _theta0: &[f64], _n: u64, _eps: f64) -> Option<f64> {
        // second derivatives are non-random and third derivatives vanish
        Some(0.0)
    }

    /// With c = X (X'X)^(-1/2), the squared-score part contributes
    /// (1/4) sum_j sqrt(2 sum_i c_ij^4) and the cross part
    /// (1/2) sqrt(2 sum_i c_i1^2 c_i2^2), both exact (Var Z^2 = 2).
    fn k2_closed(&self, _theta0: &[f64], n: u64) -> Option<f64> {
        let (c1, c2) = self.unit_columns(n as usize);
        let nf = n as f64;
        let s4_1: f64 = c1.iter().map(|v| v.powi(4)).sum();
        let s4_2: f64 = c2.iter().map(|v| v.powi(4)).sum();
        let s22: f64 = c1.iter().zip(&c2).map(|(a, b)| (a * b) * (a * b)).sum();
        let first = 0.25 * ((2.0 * s4_1).sqrt() + (2.0 * s4_2).sqrt());
        let cross = 0.5 * (2.0 * s22).sqrt();
        Some(nf.sqrt() * (first + cross))
    }

    /// Third-moment majorant using E|Y' - Y|^3 = 8 sigma^3 / sqrt(pi) and the
    /// split (|a|+|b|)^3 <= 4(|a|^3+|b|^3); the contribution reduces to
    /// (8/(3 sqrt pi)) (1/sqrt n + sum |x_i - xbar|^3 / SS^(3/2)).
    fn k3_closed(&self, _theta0: &[f64], n: u64) -> Option<f64> {
        let (c1, c2) = self.unit_columns(n as usize);
        let nf = n as f64;
        let sum_abs3: f64 = c1
            .iter()
            .zip(&c2)
            .map(|(a, b)| a.abs().powi(3) + b.abs().powi(3))
            .sum();
        let e_abs3 = 8.0 / std::f64::consts::PI.sqrt();
        Some(nf.sqrt() * 4.0 / 12.0 * e_abs3 * sum_abs3)
    }

    /// sigma2 * tr((X'X)^-1) = sigma2 (1/n + 1/SS).
    fn mse_closed(&self, _theta0: &[f64], n: u64) -> Option<f64> {
        let x = self.covariates(n as usize);
        let ss: f64 = x.iter().map(|v| v * v).sum();
        Some(self.sigma2 * (1.0 / n as f64 + 1.0 / ss))
    }
}
