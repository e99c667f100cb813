//! Fully closed-form distance bounds for the two models where every term is
//! available analytically: straight-line regression and the normal model
//! with unknown mean and variance.
//!
//! The constants are hard-coded exactly as derived; where a constant arises
//! from a moment computation, the comment states the moment identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Test-function derivative sup-norms entering every bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSet {
    pub sup_h: f64,
    pub sup_1: f64,
    pub sup_2: f64,
    pub sup_3: f64,
}

impl NormSet {
    pub fn ones() -> Self {
        NormSet { sup_h: 1.0, sup_1: 1.0, sup_2: 1.0, sup_3: 1.0 }
    }

    pub fn zeros() -> Self {
        NormSet { sup_h: 0.0, sup_1: 0.0, sup_2: 0.0, sup_3: 0.0 }
    }
}

/// Four-way split of a closed-form bound, matching the general engine's
/// decomposition (linearization, squared-score, third-moment, tail).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClosedTerms {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub tail: f64,
}

impl ClosedTerms {
    pub fn total(&self) -> f64 {
        self.k1 + self.k2 + self.k3 + self.tail
    }
}

/// Distance bound for the straight-line model with intercept and slope:
///
/// ```text
/// (sup_2/4) (sqrt(2/n) + sqrt(2 sum xt^4)/sum xt^2)  +  sup_2/sqrt(2n)
///   + (8 sup_3 / (3 sqrt pi)) (1/sqrt n + sum |xt|^3 / (sum xt^2)^(3/2))
/// ```
///
/// with `xt_i = x_i - xbar`. The display does not involve the noise variance,
/// and every summand is invariant under rescaling of the covariates. The
/// linearization and tail terms vanish: the standardized estimator coincides
/// with the standardized score.
pub fn bound_straightline_terms(n: u64, x: &[f64], norms: &NormSet) -> Result<ClosedTerms> {
    assert_eq!(n as usize, x.len(), "covariate vector must have length n");
    if x.is_empty() || x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateDesign);
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let mut ss2 = 0.0;
    let mut ss3 = 0.0;
    let mut ss4 = 0.0;
    for &v in x {
        let c = v - xbar;
        ss2 += c * c;
        ss3 += c.abs().powi(3);
        ss4 += c.powi(4);
    }
    let term_sq = norms.sup_2 / 4.0 * ((2.0 / nf).sqrt() + (2.0 * ss4).sqrt() / ss2);
    let term_cross = norms.sup_2 / (2.0 * nf).sqrt();
    // E|Y' - Y|^3 = 8 sigma^3/sqrt(pi) for the difference of independent
    // normals, combined with (|a|+|b|)^3 <= 4(|a|^3+|b|^3)
    let term_third = 8.0 * norms.sup_3 / (3.0 * std::f64::consts::PI.sqrt())
        * (1.0 / nf.sqrt() + ss3 / ss2.powf(1.5));
    Ok(ClosedTerms { k1: 0.0, k2: term_sq + term_cross, k3: term_third, tail: 0.0 })
}

/// Total of [`bound_straightline_terms`].
pub fn bound_straightline(n: u64, x: &[f64], norms: &NormSet) -> Result<f64> {
    Ok(bound_straightline_terms(n, x, norms)?.total())
}

/// Distance bound for i.i.d. normal observations with both mean and variance
/// unknown:
///
/// ```text
/// (5/2) sup_2/sqrt n + 19 sup_3/sqrt n + 8 sup_h (1 + 2 s2)/(n s2)
///   + 4 sqrt2 sup_1/sqrt n
///   + (4 sup_1/sqrt n) [sqrt2 + sqrt(3/2) + 16 sqrt2 sqrt(1/n + s2/4)]
///   + (32 sup_1/sqrt n) [1 + 648 ((3/2 + s2/4)^2 + 3/n^2)]^(1/2)
/// ```
///
/// The mean never appears: the bound is translation invariant.
pub fn bound_normal_terms(n: u64, sigma2: f64, norms: &NormSet) -> ClosedTerms {
    assert!(n >= 1 && sigma2 > 0.0);
    let nf = n as f64;
    let rn = nf.sqrt();
    let s2 = sigma2;
    let sqrt2 = 2.0_f64.sqrt();
    let t_sq = 2.5 * norms.sup_2 / rn;
    let t_third = 19.0 * norms.sup_3 / rn;
    let t_tail = 8.0 * norms.sup_h * (1.0 + 2.0 * s2) / (nf * s2);
    let t_lin = 4.0 * sqrt2 * norms.sup_1 / rn;
    let t_env_a = 4.0 * norms.sup_1 / rn
        * (sqrt2 + 1.5_f64.sqrt() + 16.0 * sqrt2 * (1.0 / nf + s2 / 4.0).sqrt());
    let t_env_b = 32.0 * norms.sup_1 / rn
        * (1.0 + 648.0 * ((1.5 + s2 / 4.0).powi(2) + 3.0 / (nf * nf))).sqrt();
    ClosedTerms { k1: t_lin + t_env_a + t_env_b, k2: t_sq, k3: t_third, tail: t_tail }
}

/// Total of [`bound_normal_terms`].
pub fn bound_normal(n: u64, sigma2: f64, norms: &NormSet) -> f64 {
    bound_normal_terms(n, sigma2, norms).total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straightline_reference_value() {
        let x = [-3.0, -1.0, 1.0, 3.0];
        let b = bound_straightline(4, &x, &NormSet::ones()).unwrap();
        assert!((b - 2.450_936_967_294_547_5).abs() < 1e-12, "b = {b}");
    }

    #[test]
    fn straightline_zero_norms() {
        let x = [-3.0, -1.0, 1.0, 3.0];
        let b = bound_straightline(4, &x, &NormSet::zeros()).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn straightline_scale_invariance() {
        let x = [-3.0, -1.0, 1.0, 3.0];
        let scaled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = bound_straightline(4, &x, &NormSet::ones()).unwrap();
        let b = bound_straightline(4, &scaled, &NormSet::ones()).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn straightline_degenerate_design() {
        assert!(matches!(
            bound_straightline(3, &[1.0, 1.0, 1.0], &NormSet::ones()),
            Err(Error::DegenerateDesign)
        ));
    }

    #[test]
    fn normal_reference_value() {
        let b = bound_normal(10_000, 1.0, &NormSet::ones());
        assert!((b - 15.091_029_700_091_121).abs() < 1e-11, "b = {b}");
    }

    #[test]
    fn normal_monotone_decreasing_in_n() {
        let norms = NormSet::ones();
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let b = bound_normal(1 << k, 2.5, &norms);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn normal_rate_with_growing_variance() {
        // sigma2(n) = n^(1/4) decays like n^(-1/4); on a high-n grid the
        // fitted slope sits in the stated window
        let ns: Vec<f64> = (0..9).map(|k| 10.0_f64.powf(10.0 + 0.5 * k as f64)).collect();
        let vals: Vec<f64> = ns
            .iter()
            .map(|&n| bound_normal(n as u64, n.powf(0.25), &NormSet::ones()))
            .collect();
        let slope = slope_of(&ns, &vals);
        assert!(slope > -0.28 && slope < -0.22, "slope {slope}");
    }

    #[test]
    fn normal_half_rate_at_fixed_variance() {
        let ns: Vec<f64> = (0..7).map(|k| 10.0_f64.powf(4.0 + k as f64 / 3.0)).collect();
        let vals: Vec<f64> =
            ns.iter().map(|&n| bound_normal(n as u64, 1.0, &NormSet::ones())).collect();
        let slope = slope_of(&ns, &vals);
        assert!(slope > -0.52 && slope < -0.48, "slope {slope}");
    }

    fn slope_of(ns: &[f64], vals: &[f64]) -> f64 {
        let k = ns.len() as f64;
        let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / k;
        let my = ly.iter().sum::<f64>() / k;
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    }
}
