//! Exact PMF of the centered waiting time at scale.
//!
//! The waiting time equals in distribution the sum of independent shifted
//! geometric variables with success probabilities `i/n`, so its PMF up to a
//! truncation point `K` follows from iterated truncated convolution:
//! `g(k) = p_i·f(k) + q_i·g(k-1)` with `p_i = i/n`, `q_i = 1 - i/n`. The
//! `i = n` factor is the convolution identity (point mass at 0) and is
//! skipped. Cost is `O((n-m)·K)`.
//!
//! The composition-sum route (probability of `k` superfluous draws equals
//! `(∏ i/n)·S_k`) is the small-instance oracle for the DP.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics;
use crate::model::{rat, to_f64, CollectorInstance};
use crate::Error;

/// Numeric representation of a PMF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    Rational,
    Float,
    /// log-space floats, for parameter ranges where linear space underflows
    LogFloat,
}

#[derive(Debug, Clone)]
enum PmfValues {
    Rational(Vec<BigRational>),
    Float(Vec<f64>),
    LogFloat(Vec<f64>),
}

/// Finite-support probability vector with explicit tail accounting.
#[derive(Debug, Clone)]
pub struct Pmf {
    /// support starts here; 0 for the centered waiting time
    pub offset: i64,
    values: PmfValues,
}

impl Pmf {
    pub fn mode(&self) -> NumericMode {
        match self.values {
            PmfValues::Rational(_) => NumericMode::Rational,
            PmfValues::Float(_) => NumericMode::Float,
            PmfValues::LogFloat(_) => NumericMode::LogFloat,
        }
    }

    /// Number of stored support points (`K + 1`).
    pub fn len(&self) -> usize {
        match &self.values {
            PmfValues::Rational(v) => v.len(),
            PmfValues::Float(v) | PmfValues::LogFloat(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `P(W̃ = offset + k)` as a float, in any mode.
    pub fn prob(&self, k: usize) -> f64 {
        match &self.values {
            PmfValues::Rational(v) => to_f64(&v[k]),
            PmfValues::Float(v) => v[k],
            PmfValues::LogFloat(v) => v[k].exp(),
        }
    }

    /// Exact probability, available in rational mode only.
    pub fn prob_rational(&self, k: usize) -> Option<&BigRational> {
        match &self.values {
            PmfValues::Rational(v) => Some(&v[k]),
            _ => None,
        }
    }

    /// Unaccounted mass beyond the truncation point, `1 - Σ probs`.
    pub fn tail_mass(&self) -> f64 {
        match &self.values {
            PmfValues::Rational(_) => to_f64(&self.tail_mass_rational().unwrap()),
            PmfValues::Float(v) => 1.0 - v.iter().sum::<f64>(),
            PmfValues::LogFloat(v) => 1.0 - v.iter().map(|lp| lp.exp()).sum::<f64>(),
        }
    }

    pub fn tail_mass_rational(&self) -> Option<BigRational> {
        match &self.values {
            PmfValues::Rational(v) => {
                Some(BigRational::one() - v.iter().fold(BigRational::zero(), |a, b| a + b))
            }
            _ => None,
        }
    }
}

/// Default ceiling on rational DP entry size, in bits of the denominator.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

/// Exact PMF of the centered waiting time for `k = 0..=kmax` by
/// geometric-convolution DP, with the default rational bit budget.
pub fn exact_pmf_dp(
    instance: &CollectorInstance,
    kmax: usize,
    mode: NumericMode,
) -> Result<Pmf, Error> {
    exact_pmf_dp_with_budget(instance, kmax, mode, DEFAULT_BIT_BUDGET)
}

/// DP with an explicit bit budget for rational mode.
pub fn exact_pmf_dp_with_budget(
    instance: &CollectorInstance,
    kmax: usize,
    mode: NumericMode,
    bit_budget: u64,
) -> Result<Pmf, Error> {
    let values = match mode {
        NumericMode::Rational => PmfValues::Rational(dp_rational(instance, kmax, bit_budget)?),
        NumericMode::Float => PmfValues::Float(dp_float(instance, kmax)),
        NumericMode::LogFloat => PmfValues::LogFloat(dp_log(instance, kmax)),
    };
    Ok(Pmf { offset: 0, values })
}

fn dp_rational(
    instance: &CollectorInstance,
    kmax: usize,
    bit_budget: u64,
) -> Result<Vec<BigRational>, Error> {
    let n = instance.n();
    let mut f = vec![BigRational::zero(); kmax + 1];
    f[0] = BigRational::one();
    for i in instance.m() + 1..n {
        let p = rat(i, n);
        let q = rat(n - i, n);
        let mut g = vec![BigRational::zero(); kmax + 1];
        for k in 0..=kmax {
            let mut v = &p * &f[k];
            if k > 0 {
                v += &q * &g[k - 1];
            }
            g[k] = v;
        }
        f = g;
        if f[0].denom().bits() > bit_budget {
            return Err(Error::BitBudget { budget: bit_budget });
        }
    }
    Ok(f)
}

fn dp_float(instance: &CollectorInstance, kmax: usize) -> Vec<f64> {
    let n = instance.n() as f64;
    let mut f = vec![0.0; kmax + 1];
    f[0] = 1.0;
    for i in instance.m() + 1..instance.n() {
        let p = i as f64 / n;
        let q = 1.0 - p;
        let mut g = vec![0.0; kmax + 1];
        for k in 0..=kmax {
            g[k] = p * f[k] + if k > 0 { q * g[k - 1] } else { 0.0 };
        }
        f = g;
    }
    f
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn dp_log(instance: &CollectorInstance, kmax: usize) -> Vec<f64> {
    let n = instance.n() as f64;
    let mut f = vec![f64::NEG_INFINITY; kmax + 1];
    f[0] = 0.0;
    for i in instance.m() + 1..instance.n() {
        let lp = (i as f64 / n).ln();
        let lq = (1.0 - i as f64 / n).ln();
        let mut g = vec![f64::NEG_INFINITY; kmax + 1];
        for k in 0..=kmax {
            let conv = lp + f[k];
            g[k] = if k > 0 {
                log_add_exp(conv, lq + g[k - 1])
            } else {
                conv
            };
        }
        f = g;
    }
    f
}

/// Exact PMF through the composition sums: `P(W̃=k) = (∏ i/n)·S_k`.
pub fn exact_pmf_composition(
    instance: &CollectorInstance,
    kmax: usize,
    cap: u128,
) -> Result<Pmf, Error> {
    let n = instance.n();
    let mut prefix = BigRational::one();
    for i in instance.m() + 1..=n {
        prefix *= rat(i, n);
    }
    let mut probs = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let s = combinatorics::sum_s(instance, k as u32, cap)?;
        probs.push(&prefix * s.total);
    }
    Ok(Pmf {
        offset: 0,
        values: PmfValues::Rational(probs),
    })
}

/// Truncation point for which the order-0 Poisson tail beyond it is
/// negligible (< 1e-10): roughly `λ + 10√λ + 20`.
pub fn default_truncation(lambda: f64) -> usize {
    (lambda + 10.0 * lambda.sqrt() + 20.0).ceil() as usize
}
