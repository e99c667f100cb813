//! Catalog of smooth test functions with certified derivative sup-norms.
//!
//! Every catalog member is three times differentiable with bounded
//! derivatives. The stored norms are
//! `sup_h = sup |h|`, `sup_1 = sup_i |d h / dx_i|`,
//! `sup_2 = sup_ij |d^2 h / dx_i dx_j|`, `sup_3 = sup_ijk |d^3 h|`,
//! and `gaussian_mean = E h(Z)` for a standard d-variate normal Z, closed
//! form for all members so that distance estimation carries no extra Monte
//! Carlo noise.

use serde::{Deserialize, Serialize};

use crate::bounds_closed::NormSet;
use crate::symmat::SymMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFunctionKind {
    /// h(x) = sum_i sin(x_i)
    SineSum,
    /// h(x) = sum_i cos(x_i)
    CosineSum,
    /// h(x) = sum_i (1 - exp(-x_i^2 / 2))
    DampedQuadratic,
}

/// A smooth test function together with certified sup-norms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    pub id: String,
    pub dim: usize,
    pub kind: TestFunctionKind,
    pub sup_h: f64,
    pub sup_1: f64,
    pub sup_2: f64,
    pub sup_3: f64,
    /// E h(Z), exact.
    pub gaussian_mean: f64,
}

/// sup |d^3/du^3 (1 - e^(-u^2/2))| = sqrt(6) sqrt(3 - sqrt 6) e^((sqrt 6 - 3)/2),
/// attained at u^2 = 3 - sqrt 6.
pub fn damped_quadratic_third_norm() -> f64 {
    let s6 = 6.0_f64.sqrt();
    s6 * (3.0 - s6).sqrt() * ((s6 - 3.0) / 2.0).exp()
}

impl TestFunction {
    fn new(kind: TestFunctionKind, dim: usize) -> Self {
        let d = dim as f64;
        match kind {
            TestFunctionKind::SineSum => TestFunction {
                id: "sine_sum".into(),
                dim,
                kind,
                sup_h: d,
                sup_1: 1.0,
                sup_2: 1.0,
                sup_3: 1.0,
                // odd function of a symmetric law
                gaussian_mean: 0.0,
            },
            TestFunctionKind::CosineSum => TestFunction {
                id: "cosine_sum".into(),
                dim,
                kind,
                sup_h: d,
                sup_1: 1.0,
                sup_2: 1.0,
                sup_3: 1.0,
                // E cos(Z) = e^(-1/2)
                gaussian_mean: d * (-0.5_f64).exp(),
            },
            TestFunctionKind::DampedQuadratic => TestFunction {
                id: "damped_quadratic".into(),
                dim,
                kind,
                sup_h: d,
                // sup |u e^(-u^2/2)| at u = 1
                sup_1: (-0.5_f64).exp(),
                // sup |(1 - u^2) e^(-u^2/2)| at u = 0
                sup_2: 1.0,
                sup_3: damped_quadratic_third_norm(),
                // E(1 - e^(-Z^2/2)) = 1 - 1/sqrt 2
                gaussian_mean: d * (1.0 - std::f64::consts::FRAC_1_SQRT_2),
            },
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.kind {
            TestFunctionKind::SineSum => x.iter().map(|v| v.sin()).sum(),
            TestFunctionKind::CosineSum => x.iter().map(|v| v.cos()).sum(),
            TestFunctionKind::DampedQuadratic => {
                x.iter().map(|v| 1.0 - (-0.5 * v * v).exp()).sum()
            }
        }
    }

    pub fn norms(&self) -> NormSet {
        NormSet {
            sup_h: self.sup_h,
            sup_1: self.sup_1,
            sup_2: self.sup_2,
            sup_3: self.sup_3,
        }
    }
}

/// The full catalog in dimension `d`.
pub fn catalog(dim: usize) -> Vec<TestFunction> {
    assert!(dim >= 1);
    vec![
        TestFunction::new(TestFunctionKind::SineSum, dim),
        TestFunction::new(TestFunctionKind::CosineSum, dim),
        TestFunction::new(TestFunctionKind::DampedQuadratic, dim),
    ]
}

/// Catalog lookup by id.
pub fn by_id(dim: usize, id: &str) -> Option<TestFunction> {
    catalog(dim).into_iter().find(|t| t.id == id)
}

/// The quadratic test function h(x) = x' F x used by the mean-squared-error
/// certificate, where F is the inverse Fisher information for one
/// observation. Its sup-norms depend on the support radius `s` and the
/// largest inverse-Fisher entry `m_env`, and its third derivatives vanish.
#[derive(Clone, Debug)]
pub struct MseTestFunction {
    pub dim: usize,
    pub fisher_inverse: SymMat,
    pub s: f64,
    pub m_env: f64,
}

impl MseTestFunction {
    pub fn new(fisher_inverse: SymMat, s: f64) -> Self {
        let m_env = fisher_inverse.max_abs_entry();
        MseTestFunction { dim: fisher_inverse.dim(), fisher_inverse, s, m_env }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.fisher_inverse.quad_form(x)
    }

    pub fn norms(&self) -> NormSet {
        let d = self.dim as f64;
        NormSet {
            sup_h: d * d * self.s * self.s * self.m_env,
            sup_1: 2.0 * d * self.m_env * self.s,
            sup_2: 2.0 * self.m_env,
            sup_3: 0.0,
        }
    }
}

/// Squared parameter-estimation error `sum_j (theta_hat_j - theta0_j)^2`.
///
/// Satisfies the scaling identity
/// `h_mse( sqrt(n) I^(1/2) (theta_hat - theta0) ) = n * mse_value(...)`
/// when `h_mse` is the quadratic form with matrix `I^(-1)`.
pub fn mse_value(theta_hat: &[f64], theta0: &[f64]) -> f64 {
    debug_assert_eq!(theta_hat.len(), theta0.len());
    theta_hat
        .iter()
        .zip(theta0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}
