//! Explicit finite-sample bounds on the distance between the law of a vector
//! maximum likelihood estimator and the multivariate normal, together with a
//! Monte Carlo harness that verifies the bounds empirically.
//!
//! The distance is measured over smooth test functions: for a model with true
//! parameter `theta0`, average Fisher information `I_n`, and MLE `theta_hat`,
//! the quantity of interest is
//!
//! ```text
//! | E h( sqrt(n) * I_n^(1/2) * (theta_hat - theta0) ) - E h(Z) |,   Z ~ N(0, I)
//! ```
//!
//! for three-times differentiable `h` with bounded derivatives. The crate
//! provides:
//!
//! - [`specfun`]: digamma/polygamma with controlled truncation error;
//! - [`symmat`]: small symmetric matrix algebra (Jacobi eigendecomposition,
//!   matrix powers +-1/2);
//! - [`testfun`]: a catalog of smooth test functions with certified
//!   derivative sup-norms;
//! - [`models`]: normal, straight-line regression, and Beta models with
//!   scores, Hessians, Fisher information, envelopes, and MLE solvers;
//! - [`bounds_general`]: the general bound engine (closed forms where the
//!   model provides them, Monte Carlo otherwise);
//! - [`bounds_closed`]: fully closed-form bounds for straight-line
//!   regression and the normal model;
//! - [`implicit`]: mean-squared-error certificates and distance bounds for
//!   models whose MLE has no closed form, specialized to the Beta family;
//! - [`harness`]: reproducible Monte Carlo estimation of the true distance
//!   and dominance checks;
//! - [`report`]: experiment configuration, CSV/JSON reporting, and the
//!   entry points behind the `mle-bounds` command-line tool.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod bounds_closed;
pub mod bounds_general;
pub mod error;
pub mod mc;
pub mod harness;
pub mod implicit;
pub mod models;
pub mod report;
pub mod rng;
pub mod specfun;
pub mod symmat;
pub mod testfun;

pub use error::{Error, Result};
