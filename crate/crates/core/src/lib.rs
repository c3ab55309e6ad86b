//! Two-step non-Gaussian quasi-maximum-likelihood estimation for GARCH(p,q).
//!
//! The crate is `no_std` (it needs `alloc`) and carries every numerical piece:
//!
//! - [`volatility`]: the re-parameterized GARCH recursion `x_t = σ v_t ε_t`,
//!   `v_t² = 1 + Σ a_i x²_{t-i} + Σ b_j v²_{t-j}`, its γ-gradient and simulation.
//! - [`likelihoods`]: standardized quasi-likelihood families (Gaussian, Student t,
//!   generalized Gaussian), innovation distributions and their `h = x f'/f` machinery.
//! - [`eta`]: the scale-correction parameter η_f in population and sample form.
//! - [`estimators`]: Gaussian QMLE, the two-step non-Gaussian QMLE, the oracle
//!   estimator with known η_f and the MLE.
//! - [`asymptotics`]: the joint asymptotic covariance of the three estimators.
//! - [`selection`]: data-driven choice of the quasi-likelihood and aggregation
//!   with the Gaussian QMLE.
//! - [`montecarlo`]: the deterministic, per-replication half of the simulation
//!   harness (the parallel driver lives in the `ngqmle` crate).
//!
//! Lower-level building blocks ([`quadrature`], [`root`], [`optimize`],
//! [`linalg`]) are public because the tests and the companion crate use them.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod eta;
pub mod likelihoods;
pub mod linalg;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod root;
pub mod selection;
pub mod stats;
pub mod volatility;

pub use error::{Error, Result};
