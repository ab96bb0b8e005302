//! Exact and approximate distribution of the centered coupon-collector
//! waiting time.
//!
//! A collector samples with replacement from `n` equally likely coupons and
//! stops once `n - m` distinct coupons have been seen. The centered waiting
//! time (number of superfluous draws) equals in distribution a sum of
//! independent shifted geometric variables with success probabilities `i/n`,
//! `i = m+1..=n`. This crate computes its exact PMF (rational or float),
//! the Poisson approximation with mean `λ_n = Σ (1 - i/n)`, the first-order
//! correction driven by `λ_{n,2} = Σ (1 - i/n)²`, and numerically certifies
//! the inequalities behind the expansion.
//!
//! Modules:
//! - [`model`]: problem instances and the exact moment sums `λ_{n,j}`
//! - [`combinatorics`]: composition enumeration and the sums `S_k`, `S_{k,l}`, `R_{k,l}`
//! - [`exact`]: exact PMF via geometric-convolution DP and via composition sums
//! - [`expansion`]: order-0 / order-1 approximations and the product-vs-exponential gap
//! - [`simulate`]: seeded Monte Carlo oracle
//! - [`diagnostics`]: schedules, error-scaling studies, inequality certification
//! - [`output`]: CSV/JSON records for the CLI

pub mod combinatorics;
pub mod diagnostics;
pub mod exact;
pub mod expansion;
pub mod model;
pub mod output;
pub mod simulate;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance n={n}, m={m}: require n >= 1 and 0 <= m <= n-1")]
    InvalidInstance { n: u64, m: u64 },

    #[error("moment order j must be >= 1")]
    ZeroMomentOrder,

    #[error("enumeration would visit {required} compositions, above the cap {cap}; use the DP path")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("integer overflow while accumulating composition sums")]
    Overflow,

    #[error("rational DP exceeded the {budget}-bit size budget; use float mode")]
    BitBudget { budget: u64 },

    #[error("schedule requires n - m_n >= 2: n={n} is too small for lambda={lambda}")]
    ScheduleTooSmall { n: u64, lambda: f64 },

    #[error("schedule requires a nonempty, strictly increasing n list")]
    BadSchedule,
}
