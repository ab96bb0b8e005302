//! Order-0 Poisson approximation, the first-order correction, and the
//! product-vs-exponential gap.
//!
//! With `λ_n = Σ(1-i/n)` and `λ_{n,2} = Σ(1-i/n)²`, the corrected point
//! probability is
//!
//! ```text
//! P(W̃ = k) ≈ e^{-λ_n}·λ_n^k/k! + e^{-λ_n}·(λ_n^{k-2}/(k-2)! - λ_n^k/k!)·λ_{n,2}/2
//! ```
//!
//! with the convention `λ^{k-2}/(k-2)! = 0` for `k < 2`, which reproduces the
//! dedicated `k = 0` and `k = 1` forms. Moments are always taken from the
//! exact rationals and converted to float once.

use statrs::function::gamma::ln_gamma;

use crate::model::CollectorInstance;

/// Order-0 and order-1 approximations at one support point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxResult {
    pub k: u64,
    pub order0: f64,
    pub order1: f64,
    /// exact reference value, when the caller has one
    pub exact: Option<f64>,
}

/// Poisson point probability `e^{-λ}·λ^k/k!`, via log-gamma so large `k`
/// cannot overflow the intermediate terms.
pub fn poisson_order0(lambda: f64, k: u64) -> f64 {
    assert!(lambda >= 0.0, "Poisson mean must be nonnegative");
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

/// First-order corrected approximation of `P(W̃ = k)`.
pub fn poisson_order1(instance: &CollectorInstance, k: u64) -> ApproxResult {
    let lambda = instance.lambda1_f64();
    let lambda2 = instance.lambda2_f64();
    let order0 = poisson_order0(lambda, k);
    let shifted = if k >= 2 {
        poisson_order0(lambda, k - 2)
    } else {
        0.0
    };
    let order1 = order0 + (shifted - order0) * lambda2 / 2.0;
    ApproxResult {
        k,
        order0,
        order1,
        exact: None,
    }
}

/// The gap `e^{-λ_n} - ∏ i/n`, its leading term `e^{-λ_n}·λ_{n,2}/2`, and
/// the residual (the remainder after removing the leading term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductGap {
    pub gap: f64,
    pub leading: f64,
    pub residual: f64,
}

pub fn product_exponential_gap(instance: &CollectorInstance) -> ProductGap {
    let n = instance.n() as f64;
    let mut product = 1.0;
    for i in instance.m() + 1..=instance.n() {
        product *= i as f64 / n;
    }
    let exp_term = (-instance.lambda1_f64()).exp();
    let gap = exp_term - product;
    let leading = exp_term * instance.lambda2_f64() / 2.0;
    ProductGap {
        gap,
        leading,
        residual: gap - leading,
    }
}

/// Whether the instance is past the threshold `√(2λ_n/n) < 1/2` that the
/// residual and moment-tail bounds require.
pub fn past_threshold(instance: &CollectorInstance) -> bool {
    (2.0 * instance.lambda1_f64() / instance.n() as f64).sqrt() < 0.5
}

/// Bound on the product-gap residual: `e^{-λ_n}·4λ_n²(λ_n+1)/n`.
/// Valid past the threshold.
pub fn residual_bound(instance: &CollectorInstance) -> f64 {
    let lambda = instance.lambda1_f64();
    (-lambda).exp() * 4.0 * lambda * lambda * (lambda + 1.0) / instance.n() as f64
}

/// `Σ_{j≥j0} λ_{n,j}/j`, summed until terms are machine-negligible.
pub fn moment_tail_sum(instance: &CollectorInstance, j0: u32) -> f64 {
    let n = instance.n() as f64;
    let q: Vec<f64> = (instance.m() + 1..instance.n())
        .map(|i| 1.0 - i as f64 / n)
        .collect();
    let mut powers: Vec<f64> = q.iter().map(|&x| x.powi(j0 as i32)).collect();
    let mut total = 0.0;
    let mut j = j0;
    loop {
        let lambda_j: f64 = powers.iter().sum();
        let term = lambda_j / j as f64;
        total += term;
        if term < 1e-18 * (1.0 + total) || j > 100_000 {
            break;
        }
        for (p, &base) in powers.iter_mut().zip(&q) {
            *p *= base;
        }
        j += 1;
    }
    total
}

/// Bound on the moment tail: `2λ_n·(2λ_n/n)^{(j0-1)/2}`. Valid past the
/// threshold.
pub fn moment_tail_bound(instance: &CollectorInstance, j0: u32) -> f64 {
    let lambda = instance.lambda1_f64();
    2.0 * lambda * (2.0 * lambda / instance.n() as f64).powf((j0 as f64 - 1.0) / 2.0)
}
