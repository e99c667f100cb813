//! Model abstraction and the three built-in models: normal with unknown mean
//! and variance, straight-line regression, and Beta with both shapes unknown.
//!
//! A [`ModelSpec`] supplies everything the bound engine and the Monte Carlo
//! harness need: sampling, per-observation scores and Hessians, Fisher
//! information, third-derivative envelopes, and an MLE solver. Closed-form
//! hooks let a model replace Monte Carlo estimation of individual bound
//! terms with its exact expressions.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::symmat::SymMat;

mod beta;
mod linreg;
mod normal;

pub use beta::{beta_fisher, beta_mle, beta_mle_from_stats, delta_i, BetaModel, BetaSuffStats};
pub use linreg::{linreg_mle, StraightLineModel};
pub use normal::{normal_mle, NormalModel};

/// A simulated or imported sample: `n` observations in `R^t`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub t: usize,
    pub values: Vec<f64>,
    /// Provenance seed (0 for imported data).
    pub seed: u64,
}

impl Dataset {
    pub fn from_values(t: usize, values: Vec<f64>, seed: u64) -> Self {
        assert!(t >= 1 && values.len() % t == 0);
        Dataset { t, values, seed }
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.t
    }

    pub fn obs(&self, i: usize) -> &[f64] {
        &self.values[i * self.t..(i + 1) * self.t]
    }

    /// Plain CSV export: header row with column names, one observation per
    /// row, 17 significant digits.
    pub fn to_csv(&self, mut w: impl Write) -> Result<()> {
        let header: Vec<String> = (1..=self.t).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n() {
            let row: Vec<String> = self.obs(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Plain CSV import; the header row fixes the observation dimension.
    pub fn from_csv(r: impl BufRead) -> Result<Dataset> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig {
                line: 1,
                field: "header".into(),
                message: "empty CSV".into(),
            })?;
        let header = header?;
        let t = header.split(',').count();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != t {
                return Err(Error::InvalidConfig {
                    line: idx + 1,
                    field: format!("row with {} fields", fields.len()),
                    message: format!("expected {t} fields"),
                });
            }
            for (j, f) in fields.iter().enumerate() {
                let v: f64 = f.trim().parse().map_err(|_| Error::InvalidConfig {
                    line: idx + 1,
                    field: format!("column {}", j + 1),
                    message: format!("cannot parse `{f}` as a number"),
                })?;
                values.push(v);
            }
        }
        Ok(Dataset { t, values, seed: 0 })
    }
}

/// Capability contract for a statistical model with parameter `theta` in an
/// open subset of `R^d` and observations in `R^t`.
///
/// Third-derivative envelopes are per-observation normalized: the envelope
/// `M[k][j][v]` dominates `(1/n) |d^3 l / d theta_k d theta_j d theta_v|` in
/// an `eps`-neighborhood of `theta0` (the full-likelihood envelope is `n`
/// times the stored value).
pub trait ModelSpec: Sync {
    fn id(&self) -> &'static str;
    fn dim_param(&self) -> usize;
    fn dim_obs(&self) -> usize;
    /// Identically distributed observations?
    fn is_iid(&self) -> bool;

    fn sample(&self, theta: &[f64], n: usize, rng: &mut Rng) -> Dataset;

    /// Gradient of `log f_i(obs | theta)` into `out`. Non-identically
    /// distributed models may need the sample size `n` to resolve the
    /// distribution of observation `i` (tiled regression designs do).
    fn score_per_obs(&self, i: usize, n: usize, obs: &[f64], theta: &[f64], out: &mut [f64]);

    /// Hessian of `log f_i(obs | theta)`.
    fn hessian_per_obs(&self, i: usize, n: usize, obs: &[f64], theta: &[f64]) -> SymMat;

    /// Expected Fisher information of observation `i`.
    fn fisher_per_obs(&self, i: usize, n: usize, theta: &[f64]) -> Result<SymMat>;

    /// Average Fisher information over `n` observations.
    fn fisher_bar(&self, theta: &[f64], n: usize) -> Result<SymMat> {
        let d = self.dim_param();
        let mut acc = SymMat::zeros(d);
        if self.is_iid() {
            return self.fisher_per_obs(0, n, theta);
        }
        for i in 0..n {
            let fi = self.fisher_per_obs(i, n, theta)?;
            for r in 0..d {
                for c in r..d {
                    acc.add_to(r, c, fi.get(r, c));
                }
            }
        }
        acc.scale(1.0 / n as f64);
        Ok(acc)
    }

    fn mle(&self, data: &Dataset) -> Result<Vec<f64>>;

    /// Simulate `n` observations at `theta0` and fit, without materializing
    /// the sample. Models override this with streaming accumulators so the
    /// harness stays O(1) in memory at large `n`.
    fn fit_simulated(&self, theta0: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        let data = self.sample(theta0, n, rng);
        self.mle(&data)
    }

    /// Radius of the bounded observation support, when one exists.
    fn support_radius(&self) -> Option<f64> {
        None
    }

    /// Model's preferred localization radius for the bound.
    fn default_epsilon(&self, theta0: &[f64]) -> Option<f64>;

    /// Per-observation third-derivative envelopes evaluated on a dataset,
    /// packed as `d^3` values indexed `[k*d*d + j*d + v]`.
    fn envelope_values(&self, theta0: &[f64], eps: f64, data: &Dataset) -> Vec<f64>;

    /// Constant envelopes, for models whose third derivatives admit
    /// data-free bounds near `theta0`.
    fn envelope_constants(&self, theta0: &[f64], eps: f64) -> Option<Vec<f64>> {
        let _ = (theta0, eps);
        None
    }

    /// True when the standardized MLE coincides with the standardized score
    /// exactly (linear models), killing the linearization and tail terms.
    fn exact_score_coupling(&self) -> bool {
        false
    }

    /// Closed-form unit-norm term factors; `None` means estimate by Monte
    /// Carlo. Conventions: the bound contribution of term `Ki` is
    /// `sup_i(h) * Ki / sqrt(n)`, and `mse_closed` is `E sum_j (theta_hat_j
    /// - theta0_j)^2`.
    fn k1_closed(&self, theta0: &[f64], n: u64, eps: f64) -> Option<f64> {
        let _ = (theta0, n, eps);
        None
    }
    fn k2_closed(&self, theta0: &[f64], n: u64) -> Option<f64> {
        let _ = (theta0, n);
        None
    }
    fn k3_closed(&self, theta0: &[f64], n: u64) -> Option<f64> {
        let _ = (theta0, n);
        None
    }
    fn mse_closed(&self, theta0: &[f64], n: u64) -> Option<f64> {
        let _ = (theta0, n);
        None
    }
}

/// Index of the largest-magnitude MLE coordinate error; ties broken by the
/// smallest index.
pub fn argmax_abs_error(theta_hat: &[f64], theta0: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (j, (a, b)) in theta_hat.iter().zip(theta0).enumerate() {
        let v = (a - b).abs();
        if v > best_val {
            best_val = v;
            best = j;
        }
    }
    best
}

/// The signed worst-coordinate error `theta_hat_(m) - theta0_(m)`.
pub fn worst_coordinate_error(theta_hat: &[f64], theta0: &[f64]) -> f64 {
    let m = argmax_abs_error(theta_hat, theta0);
    theta_hat[m] - theta0[m]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_csv_round_trip() {
        let data = Dataset::from_values(2, vec![0.5, -1.25, 3.0, 4.5e-7], 9);
        let mut buf = Vec::new();
        data.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2\n"));
        let back = Dataset::from_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.t, 2);
        assert_eq!(back.values, data.values);
    }

    #[test]
    fn dataset_csv_bad_field_reports_location() {
        let text = "x1\n1.0\noops\n";
        let err = Dataset::from_csv(std::io::Cursor::new(text)).unwrap_err();
        match err {
            Error::InvalidConfig { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn worst_coordinate_ties_break_low() {
        assert_eq!(argmax_abs_error(&[1.5, 1.5], &[1.0, 1.0]), 0);
        assert_eq!(argmax_abs_error(&[1.0, 2.0], &[1.0, 1.0]), 1);
        assert_eq!(worst_coordinate_error(&[1.0, 0.0], &[1.0, 1.0]), -1.0);
    }
}
