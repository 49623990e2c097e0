//! Simulation and numerical validation for the bivariate Brownian risk model
//! with tax.
//!
//! Each coordinate of the risk process is a γ-reflected Brownian motion
//!
//! ```text
//! X_i(t) = B_i(t) - c_i t - γ_i inf_{s <= t} (B_i(s) - c_i s)
//! ```
//!
//! driven by independent Brownian motions `B_1`, `B_2`. The crate estimates
//! the simultaneous ruin probability `P(∃ t ∈ [0, T]: X_1(t) > u, X_2(t) > a u)`
//! by Monte Carlo, evaluates the exact one-dimensional formulas and the
//! large-`u` approximations, and estimates the asymptotic constant `C(a)` for
//! `a > 0`.
//!
//! Module map:
//!
//! - [`model`]: parameters, horizon normalization and the `a <= 1` canonical form.
//! - [`paths`]: grid Brownian paths, running infima, reflection, bridge minima.
//! - [`closedform`]: Gaussian helpers, 1D ruin formulas, asymptotic approximants.
//! - [`constant`]: staircase integral and Monte Carlo estimation of `C(a)`.
//! - [`mc`]: crude and exponentially tilted ruin estimators.

pub mod closedform;
pub mod constant;
pub mod error;
pub mod mc;
pub mod model;
pub mod paths;

mod reduce;

pub use error::{Result, RuinError};
pub use model::{canonicalize, normalize_horizon, Branch, CanonicalProblem, ModelParams};
