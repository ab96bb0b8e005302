//! Schedules `n → m_n`, error-scaling studies, and the inequality
//! certification suite.
//!
//! A schedule realizes the limit regime `(n-m_n)/√n → √(2λ)` with
//! `m_n → ∞` through the rounding rule `m_n = n - round(√(2λn))`. The paper
//! trail only fixes the limit condition, not a concrete rule; this one is an
//! admissible choice and is recorded as such in report metadata.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::combinatorics::{r_split, sum_s};
use crate::exact::{exact_pmf_dp, NumericMode, Pmf};
use crate::expansion::{
    moment_tail_bound, moment_tail_sum, past_threshold, poisson_order0, poisson_order1,
    product_exponential_gap, residual_bound,
};
use crate::model::{rat, rational_pow, to_f64, CollectorInstance, MomentVector};
use crate::Error;

/// Human-readable statement of the schedule rule, for report metadata.
pub const SCHEDULE_RULE: &str = "m_n = n - round(sqrt(2*lambda*n)), clamped to [0, n-1]";

/// A target limit constant together with the instances realizing it.
#[derive(Debug, Clone)]
pub struct ScheduleSpec {
    pub lambda_target: f64,
    pub instances: Vec<CollectorInstance>,
}

/// Build the schedule for an increasing `n` grid.
///
/// Rejects grids where the rounding rule would leave fewer than 2 coupons to
/// collect (the expansion is vacuous there) or force `m_n < 0`.
pub fn build_schedule(lambda_target: f64, n_values: &[u64]) -> Result<ScheduleSpec, Error> {
    if !(lambda_target > 0.0) || n_values.is_empty() {
        return Err(Error::BadSchedule);
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadSchedule);
    }
    let mut instances = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let r = (2.0 * lambda_target * n as f64).sqrt().round() as u64;
        if r < 2 || r > n {
            return Err(Error::ScheduleTooSmall {
                n,
                lambda: lambda_target,
            });
        }
        instances.push(CollectorInstance::new(n, n - r)?);
    }
    Ok(ScheduleSpec {
        lambda_target,
        instances,
    })
}

/// Per-`n` row of an error-scaling study.
#[derive(Debug, Clone, Copy)]
pub struct ScalingRow {
    pub n: u64,
    pub m: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `max_{k<=K} |exact - order0|`
    pub e0: f64,
    /// `max_{k<=K} |exact - order1|`
    pub e1: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// least-squares slope of `log e0` vs `log n`; `None` below 3 rows
    pub slope0: Option<f64>,
    pub slope1: Option<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Sup-norm approximation errors over `k <= kmax` for every schedule point,
/// plus fitted log-log slopes when at least 3 points are available.
pub fn scaling_study(spec: &ScheduleSpec, kmax: usize) -> Result<ScalingReport, Error> {
    let mut rows = Vec::with_capacity(spec.instances.len());
    for instance in &spec.instances {
        let pmf = exact_pmf_dp(instance, kmax, NumericMode::Float)?;
        let mut e0 = 0.0f64;
        let mut e1 = 0.0f64;
        for k in 0..=kmax {
            let a = poisson_order1(instance, k as u64);
            e0 = e0.max((pmf.prob(k) - a.order0).abs());
            e1 = e1.max((pmf.prob(k) - a.order1).abs());
        }
        rows.push(ScalingRow {
            n: instance.n(),
            m: instance.m(),
            lambda1: instance.lambda1_f64(),
            lambda2: instance.lambda2_f64(),
            e0,
            e1,
        });
    }
    let (slope0, slope1) = if rows.len() >= 3 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y0: Vec<f64> = rows.iter().map(|r| r.e0.ln()).collect();
        let y1: Vec<f64> = rows.iter().map(|r| r.e1.ln()).collect();
        (Some(fit_slope(&xs, &y0)), Some(fit_slope(&xs, &y1)))
    } else {
        (None, None)
    };
    Ok(ScalingReport {
        rows,
        slope0,
        slope1,
    })
}

/// Outcome of one certified inequality.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the bound holds
    pub margin: f64,
    pub holds: bool,
    /// enumeration cap or threshold condition prevented evaluation
    pub skipped: bool,
}

impl BoundCheck {
    fn of(name: String, lhs: f64, rhs: f64, holds: bool) -> Self {
        Self {
            name,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds,
            skipped: false,
        }
    }

    fn skipped(name: String) -> Self {
        Self {
            name,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            holds: true,
            skipped: true,
        }
    }
}

/// Float comparison for bounds whose right side carries square roots.
const FLOAT_RTOL: f64 = 1e-9;

fn holds_float(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + FLOAT_RTOL * rhs.abs().max(1.0e-300)
}

fn factorial_f64(x: u32) -> f64 {
    (1..=x).map(|v| v as f64).product()
}

fn min_one(x: BigRational) -> BigRational {
    if x > BigRational::one() {
        BigRational::one()
    } else {
        x
    }
}

/// Evaluate every certified inequality on one instance, exact-rational
/// wherever both sides are rational, float with relative tolerance where
/// roots appear. Enumeration-backed checks are marked skipped past the cap.
pub fn certify_bounds(
    instance: &CollectorInstance,
    k_max: u32,
    cap: u128,
) -> Result<Vec<BoundCheck>, Error> {
    let mut checks = Vec::new();
    let n = instance.n();
    let nf = n as f64;
    let moments = MomentVector::new(*instance, 12)?;
    let lambda = instance.lambda_closed_form();
    let lambda_f = to_f64(&lambda);
    let two_lambda_over_n = rat(2, n) * &lambda;

    // λ_{n,j} <= λ_n (2λ_n/n)^{(j-1)/2}; squared to stay rational
    for j in 2..=12u32 {
        let lhs_sq = rational_pow(moments.value(j), 2);
        let rhs_sq = rational_pow(&lambda, 2) * rational_pow(&two_lambda_over_n, j - 1);
        let rhs_f = lambda_f * (2.0 * lambda_f / nf).powf((j as f64 - 1.0) / 2.0);
        checks.push(BoundCheck::of(
            format!("moment_decay j={j}"),
            moments.float(j),
            rhs_f,
            lhs_sq <= rhs_sq,
        ));
    }

    // (n-m-1)/√n <= √(2λ_n); squared to stay rational
    {
        let lhs_sq = BigRational::from(BigInt::from(n - instance.m() - 1)
            * BigInt::from(n - instance.m() - 1));
        // (n-m-1)²/n <= 2λ_n, cleared of the denominator
        let rhs_sq = &two_lambda_over_n * BigRational::from(BigInt::from(n) * BigInt::from(n));
        let holds = lhs_sq <= rhs_sq;
        checks.push(BoundCheck::of(
            "sqrt_scale".into(),
            (n - instance.m() - 1) as f64 / nf.sqrt(),
            (2.0 * lambda_f).sqrt(),
            holds,
        ));
    }

    for k in 1..=k_max {
        // The composition-sum analysis assumes n - m > k; past that the
        // remainder bounds carry no content, so the rows are marked skipped
        // rather than failed.
        if u64::from(k) >= instance.r() {
            checks.push(BoundCheck::skipped(format!("composition_sums k={k}")));
            continue;
        }
        let decomposition = match sum_s(instance, k, cap) {
            Ok(d) => d,
            Err(Error::EnumerationCap { .. }) => {
                checks.push(BoundCheck::skipped(format!("composition_sums k={k}")));
                continue;
            }
            Err(e) => return Err(e),
        };

        // S_{k,l} <= ((k-1)!/(l!(l-1)!))·(2λ)^{(k+l)/2}·n^{-(k-l)/2}
        for l in 1..=k {
            let lhs = to_f64(&decomposition.per_l[(l - 1) as usize]);
            let rhs = factorial_f64(k - 1) / (factorial_f64(l) * factorial_f64(l - 1))
                * (2.0 * lambda_f).powf((k + l) as f64 / 2.0)
                * nf.powf(-((k - l) as f64) / 2.0);
            checks.push(BoundCheck::of(
                format!("skl_upper k={k} l={l}"),
                lhs,
                rhs,
                holds_float(lhs, rhs),
            ));
        }

        // Σ_{l<=l'} S_{k,l} <= k!·min{1,(2λ)^k}·n^{-(k-l')/2}.
        // The aggregate bound controls the remainder orders, which only
        // exist from k = 2 on; at k = 1 the sum is λ_n itself and the
        // right side caps at 1.
        if k >= 2 {
            let min_term = 1.0f64.min((2.0 * lambda_f).powi(k as i32));
            let mut prefix = 0.0f64;
            for l in 1..=k {
                prefix += to_f64(&decomposition.per_l[(l - 1) as usize]);
                let rhs = factorial_f64(k) * min_term * nf.powf(-((k - l) as f64) / 2.0);
                checks.push(BoundCheck::of(
                    format!("skl_prefix k={k} l'={l}"),
                    prefix,
                    rhs,
                    holds_float(prefix, rhs),
                ));
            }
        }

        // Σ_{l<=k-2} R_{k,l} <= k!·min{1,(2λ)^k}/n, exact
        {
            let mut low = BigRational::from(BigInt::from(0));
            for l in 1..k.max(2) - 1 {
                low += &decomposition.remainders[(l - 1) as usize];
            }
            let kfact = BigRational::from(BigInt::from((1..=k as u64).product::<u64>()));
            let min_rat = min_one(rational_pow(&(rat(2, 1) * &lambda), k));
            let rhs = &kfact * &min_rat / rat(n, 1);
            checks.push(BoundCheck::of(
                format!("remainder_low_orders k={k}"),
                to_f64(&low),
                to_f64(&rhs),
                low <= rhs,
            ));
        }

        if k >= 2 {
            let (r1, r2) = match r_split(instance, k, cap) {
                Ok(v) => v,
                Err(Error::EnumerationCap { .. }) => {
                    checks.push(BoundCheck::skipped(format!("remainder_split k={k}")));
                    continue;
                }
                Err(e) => return Err(e),
            };

            // first split piece <= λ^{3/2}·(k-2)!·min{1,(2λ)^{k-2}}/(√2·n)
            let min_term2 = 1.0f64.min((2.0 * lambda_f).powi(k as i32 - 2));
            let rhs1 = lambda_f.powf(1.5) * factorial_f64(k - 2) * min_term2
                / (2.0f64.sqrt() * nf);
            let r1f = to_f64(&r1);
            checks.push(BoundCheck::of(
                format!("remainder_split_first k={k}"),
                r1f,
                rhs1,
                r1 >= BigRational::from(BigInt::from(0)) && holds_float(r1f, rhs1),
            ));

            // second split piece <= 2^{k-2}·λ^k/((k-2)!·n), exact
            let rhs2 = rational_pow(&rat(2, 1), k - 2) * rational_pow(&lambda, k)
                / (BigRational::from(BigInt::from((1..=(k - 2).max(1) as u64).product::<u64>()))
                    * rat(n, 1));
            checks.push(BoundCheck::of(
                format!("remainder_split_second k={k}"),
                to_f64(&r2),
                to_f64(&rhs2),
                r2 >= BigRational::from(BigInt::from(0)) && r2 <= rhs2,
            ));

            // split total identity:
            // R_{k,k-1} = (λ_{n,2}/2)·λ^{k-2}/(k-2)! - first - second
            let r_top = decomposition.remainders[(k - 2) as usize].clone();
            let fact = BigRational::from(BigInt::from((1..=(k - 2).max(1) as u64).product::<u64>()));
            let main = rat(1, 2) * moments.value(2) * rational_pow(&lambda, k - 2) / &fact;
            let reassembled = &main - &r1 - &r2;
            checks.push(BoundCheck::of(
                format!("remainder_split_total k={k}"),
                to_f64(&r_top),
                to_f64(&reassembled),
                r_top == reassembled,
            ));

            // |S_k - λ^k/k! - (λ_{n,2}/2)·λ^{k-2}/(k-2)!| <= sum of remainder bounds
            let kfact = BigRational::from(BigInt::from((1..=k as u64).product::<u64>()));
            let first_order =
                rational_pow(&lambda, k) / &kfact + rat(1, 2) * moments.value(2) * rational_pow(&lambda, k - 2) / &fact;
            let residual = (&decomposition.total - first_order).abs();
            let min_rat = min_one(rational_pow(&(rat(2, 1) * &lambda), k));
            let b_low = to_f64(&(&kfact * &min_rat / rat(n, 1)));
            let rhs = b_low + rhs1 + to_f64(&rhs2);
            let lhs_f = to_f64(&residual);
            checks.push(BoundCheck::of(
                format!("first_order_residual k={k}"),
                lhs_f,
                rhs,
                holds_float(lhs_f, rhs),
            ));
        }
    }

    // the tail and residual bounds need √(2λ_n/n) < 1/2
    if past_threshold(instance) {
        for j0 in [2u32, 3] {
            let lhs = moment_tail_sum(instance, j0);
            let rhs = moment_tail_bound(instance, j0);
            checks.push(BoundCheck::of(
                format!("moment_tail j0={j0}"),
                lhs,
                rhs,
                holds_float(lhs, rhs),
            ));
        }
        let gap = product_exponential_gap(instance);
        let rhs = residual_bound(instance);
        let lhs = gap.residual.abs();
        checks.push(BoundCheck::of(
            "product_residual".into(),
            lhs,
            rhs,
            holds_float(lhs, rhs),
        ));
    } else {
        checks.push(BoundCheck::skipped("moment_tail j0=2".into()));
        checks.push(BoundCheck::skipped("moment_tail j0=3".into()));
        checks.push(BoundCheck::skipped("product_residual".into()));
    }

    Ok(checks)
}

/// Total variation distance between a truncated PMF and the Poisson law with
/// the given mean, lumping both tails into one bucket.
pub fn tv_to_poisson(pmf: &Pmf, lambda: f64) -> f64 {
    let mut l1 = 0.0;
    let mut poisson_mass = 0.0;
    for k in 0..pmf.len() {
        let q = poisson_order0(lambda, k as u64);
        poisson_mass += q;
        l1 += (pmf.prob(k) - q).abs();
    }
    l1 += (pmf.tail_mass() - (1.0 - poisson_mass)).abs();
    l1 / 2.0
}
