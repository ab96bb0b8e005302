//! Integer compositions, the index sets `I_k` / `I_{k,l}`, and the sums
//! `S_k`, `S_{k,l}`, `R_{k,l}` by explicit enumeration.
//!
//! Compositions are indexed by the coupon indices `i = m+1..=n-1` (length
//! `n-m-1`); the degenerate `i = n` factor has failure probability 0 and
//! never appears. Everything is accumulated in exact integer arithmetic over
//! the common denominator `k!·n^k`, which keeps identity checks bit-exact.
//!
//! Enumeration is the small-instance oracle: it refuses to walk more than a
//! configurable number of compositions (`|I_k| = C(k+parts-1, k)`); past the
//! cap the convolution DP in [`crate::exact`] is the scalable path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::model::{rational_pow, CollectorInstance};
use crate::Error;

/// Default enumeration cap, in number of compositions visited.
pub const DEFAULT_CAP: u128 = 10_000_000;

/// Enumeration cap, honoring the `COUPON_POISSON_CAP` override.
pub fn cap_from_env() -> u128 {
    std::env::var("COUPON_POISSON_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

/// A vector `k̲` of nonnegative parts summing to `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub parts: Vec<u32>,
}

impl Composition {
    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.parts.iter().filter(|&&p| p > 0).count()
    }
}

/// `C(n, k)` saturating at `cap + 1`, so cap comparisons never overflow.
fn binomial_capped(n: u128, k: u128, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return cap.saturating_add(1),
        };
        if acc > cap {
            return cap.saturating_add(1);
        }
    }
    acc
}

/// `|I_{k,l}| = C(parts, l)·C(k-1, k-l)`: compositions of `k` into `parts`
/// slots with exactly `l` nonzero entries. Returns 0 when `l > parts`.
pub fn index_set_cardinality(k: u32, l: u32, parts: usize) -> u128 {
    if l == 0 {
        return if k == 0 { 1 } else { 0 };
    }
    if l as usize > parts || l > k {
        return 0;
    }
    num_integer::binomial(parts as u128, l as u128)
        * num_integer::binomial((k - 1) as u128, (k - l) as u128)
}

/// Streams every composition of `k` into `parts` nonnegative slots in
/// lexicographic order, optionally restricted to exactly `exactly_nonzero`
/// nonzero slots and/or a forced-zero slot.
///
/// Refuses when `|I_k|` exceeds `cap`.
pub fn enumerate_compositions(
    k: u32,
    parts: usize,
    exactly_nonzero: Option<u32>,
    forced_zero_index: Option<usize>,
    cap: u128,
) -> Result<CompositionIter, Error> {
    let required = binomial_capped((k as u128) + (parts as u128).saturating_sub(1), k as u128, cap);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    let first = if parts == 0 {
        if k == 0 {
            Some(vec![])
        } else {
            None
        }
    } else {
        let mut v = vec![0u32; parts];
        v[parts - 1] = k;
        Some(v)
    };
    Ok(CompositionIter {
        next: first,
        exactly_nonzero,
        forced_zero_index,
    })
}

#[derive(Debug)]
pub struct CompositionIter {
    next: Option<Vec<u32>>,
    exactly_nonzero: Option<u32>,
    forced_zero_index: Option<usize>,
}

impl CompositionIter {
    fn admits(&self, parts: &[u32]) -> bool {
        if let Some(l) = self.exactly_nonzero {
            if parts.iter().filter(|&&p| p > 0).count() != l as usize {
                return false;
            }
        }
        if let Some(j) = self.forced_zero_index {
            if parts[j] != 0 {
                return false;
            }
        }
        true
    }
}

/// Lexicographic successor: bump the rightmost bumpable slot, push the
/// remainder of its suffix all the way right.
fn lex_successor(parts: &mut [u32]) -> bool {
    let len = parts.len();
    if len < 2 {
        return false;
    }
    let mut suffix: u32 = parts[len - 1];
    for i in (0..len - 1).rev() {
        if suffix > 0 {
            parts[i] += 1;
            for p in parts[i + 1..].iter_mut() {
                *p = 0;
            }
            parts[len - 1] = suffix - 1;
            return true;
        }
        suffix += parts[i];
    }
    false
}

impl Iterator for CompositionIter {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        loop {
            let current = self.next.take()?;
            let mut succ = current.clone();
            if lex_successor(&mut succ) {
                self.next = Some(succ);
            }
            if self.admits(&current) {
                return Some(Composition { parts: current });
            }
        }
    }
}

/// Per-composition weight applied on top of the probability product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// plain product
    One,
    /// `1/∏ k_i!`
    InvFactorial,
    /// `1 - 1/∏ k_i!`, the remainder weight
    OneMinusInvFactorial,
}

/// `S_k` together with its per-`l` decomposition and remainders:
/// `S_k = Σ_l S_{k,l}` and `R_{k,l} = Σ_{I_{k,l}} (1 - 1/∏k_i!)·∏(1-i/n)^{k_i}`.
#[derive(Debug, Clone)]
pub struct SumDecomposition {
    pub k: u32,
    /// `S_{k,l}` at index `l-1`, `l = 1..=k`.
    pub per_l: Vec<BigRational>,
    /// `R_{k,l}` at index `l-1`, `l = 1..=k`.
    pub remainders: Vec<BigRational>,
    /// `S_k = Σ_l S_{k,l}`.
    pub total: BigRational,
}

fn factorial_u128(x: u32) -> u128 {
    (1..=x as u128).product()
}

struct SumAccumulator<'a> {
    /// numerators `n - i` for slots `i = m+1..=n-1`
    fail_num: &'a [u64],
    kfact: u128,
    s_num: Vec<u128>,
    r_num: Vec<u128>,
}

impl SumAccumulator<'_> {
    /// Depth-first walk over all compositions, carrying the running product
    /// `∏ (n-i)^{k_i}` and `∏ k_i!`.
    fn walk(
        &mut self,
        pos: usize,
        rem: u32,
        nonzero: usize,
        prod: u128,
        factprod: u128,
    ) -> Result<(), Error> {
        if pos + 1 == self.fail_num.len() {
            let v = rem;
            let prod = apply_power(prod, self.fail_num[pos], v)?;
            let factprod = factprod * factorial_u128(v);
            let nonzero = nonzero + usize::from(v > 0);
            return self.record(nonzero, prod, factprod);
        }
        for v in 0..=rem {
            let prod = apply_power(prod, self.fail_num[pos], v)?;
            self.walk(
                pos + 1,
                rem - v,
                nonzero + usize::from(v > 0),
                prod,
                factprod * factorial_u128(v),
            )?;
        }
        Ok(())
    }

    fn record(&mut self, nonzero: usize, prod: u128, factprod: u128) -> Result<(), Error> {
        if nonzero == 0 {
            // only the k = 0 empty composition; handled by the caller
            return Ok(());
        }
        let l = nonzero - 1;
        let s_term = self.kfact.checked_mul(prod).ok_or(Error::Overflow)?;
        self.s_num[l] = self.s_num[l].checked_add(s_term).ok_or(Error::Overflow)?;
        let r_weight = self.kfact - self.kfact / factprod;
        let r_term = r_weight.checked_mul(prod).ok_or(Error::Overflow)?;
        self.r_num[l] = self.r_num[l].checked_add(r_term).ok_or(Error::Overflow)?;
        Ok(())
    }
}

fn apply_power(prod: u128, base: u64, exp: u32) -> Result<u128, Error> {
    let mut acc = prod;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

fn fail_numerators(instance: &CollectorInstance) -> Vec<u64> {
    (instance.m() + 1..instance.n())
        .map(|i| instance.n() - i)
        .collect()
}

fn check_cap(k: u32, parts: usize, cap: u128) -> Result<(), Error> {
    let required = binomial_capped((k as u128) + (parts as u128).saturating_sub(1), k as u128, cap);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(())
}

/// `S_k` with its full `(S_{k,l}, R_{k,l})` decomposition by enumeration.
pub fn sum_s(instance: &CollectorInstance, k: u32, cap: u128) -> Result<SumDecomposition, Error> {
    let fail_num = fail_numerators(instance);
    if k == 0 {
        // empty sum over the empty composition: equals 1 by definition
        return Ok(SumDecomposition {
            k,
            per_l: vec![],
            remainders: vec![],
            total: BigRational::one(),
        });
    }
    if fail_num.is_empty() {
        return Ok(SumDecomposition {
            k,
            per_l: vec![BigRational::zero(); k as usize],
            remainders: vec![BigRational::zero(); k as usize],
            total: BigRational::zero(),
        });
    }
    check_cap(k, fail_num.len(), cap)?;

    let kfact = factorial_u128(k);
    let mut acc = SumAccumulator {
        fail_num: &fail_num,
        kfact,
        s_num: vec![0u128; k as usize],
        r_num: vec![0u128; k as usize],
    };
    acc.walk(0, k, 0, 1, 1)?;

    let den = BigInt::from(kfact) * BigInt::from(instance.n()).pow(k);
    let per_l: Vec<BigRational> = acc
        .s_num
        .iter()
        .map(|&num| BigRational::new(BigInt::from(num), den.clone()))
        .collect();
    let remainders: Vec<BigRational> = acc
        .r_num
        .iter()
        .map(|&num| BigRational::new(BigInt::from(num), den.clone()))
        .collect();
    let total = per_l.iter().fold(BigRational::zero(), |a, b| a + b);
    Ok(SumDecomposition {
        k,
        per_l,
        remainders,
        total,
    })
}

/// `Σ w(k̲)·∏(1-i/n)^{k_i}` over the selected composition set, with `w`
/// given by `weight`. The workhorse behind the identity and remainder checks.
pub fn weighted_composition_sum(
    instance: &CollectorInstance,
    k: u32,
    exactly_nonzero: Option<u32>,
    forced_zero_index: Option<usize>,
    weight: Weight,
    cap: u128,
) -> Result<BigRational, Error> {
    let fail_num = fail_numerators(instance);
    if k == 0 {
        let admit = exactly_nonzero.unwrap_or(0) == 0;
        let w = match weight {
            Weight::One | Weight::InvFactorial => BigRational::one(),
            Weight::OneMinusInvFactorial => BigRational::zero(),
        };
        return Ok(if admit { w } else { BigRational::zero() });
    }
    if fail_num.is_empty() {
        return Ok(BigRational::zero());
    }
    check_cap(k, fail_num.len(), cap)?;

    let kfact = factorial_u128(k);
    let mut num: u128 = 0;
    walk_filtered(
        &fail_num,
        kfact,
        exactly_nonzero,
        forced_zero_index,
        weight,
        0,
        k,
        0,
        1,
        1,
        &mut num,
    )?;
    let den = BigInt::from(kfact) * BigInt::from(instance.n()).pow(k);
    Ok(BigRational::new(BigInt::from(num), den))
}

#[allow(clippy::too_many_arguments)]
fn walk_filtered(
    fail_num: &[u64],
    kfact: u128,
    exactly_nonzero: Option<u32>,
    forced_zero_index: Option<usize>,
    weight: Weight,
    pos: usize,
    rem: u32,
    nonzero: u32,
    prod: u128,
    factprod: u128,
    out: &mut u128,
) -> Result<(), Error> {
    if pos == fail_num.len() {
        if rem != 0 {
            return Ok(());
        }
        if let Some(l) = exactly_nonzero {
            if nonzero != l {
                return Ok(());
            }
        }
        let scaled = match weight {
            Weight::One => kfact,
            Weight::InvFactorial => kfact / factprod,
            Weight::OneMinusInvFactorial => kfact - kfact / factprod,
        };
        let term = scaled.checked_mul(prod).ok_or(Error::Overflow)?;
        *out = out.checked_add(term).ok_or(Error::Overflow)?;
        return Ok(());
    }
    let max_v = if forced_zero_index == Some(pos) { 0 } else { rem };
    for v in 0..=max_v {
        let nz = nonzero + u32::from(v > 0);
        if let Some(l) = exactly_nonzero {
            if nz > l {
                break;
            }
        }
        let prod = apply_power(prod, fail_num[pos], v)?;
        walk_filtered(
            fail_num,
            kfact,
            exactly_nonzero,
            forced_zero_index,
            weight,
            pos + 1,
            rem - v,
            nz,
            prod,
            factprod * factorial_u128(v),
            out,
        )?;
    }
    Ok(())
}

/// Both sides of the multinomial identity for `S_{k,k}`:
/// `S_{k,k} = λ_n^k/k! - Σ_{l<k} Σ_{I_{k,l}} (1/∏k_i!)·∏(1-i/n)^{k_i}`.
///
/// The multinomial expansion of `λ_n^k` runs over all `n-m` indices including
/// `i = n`, whose factor is 0, so restricting to `i <= n-1` is exact.
pub fn s_kk_identity_check(
    instance: &CollectorInstance,
    k: u32,
    cap: u128,
) -> Result<(BigRational, BigRational), Error> {
    let lhs = weighted_composition_sum(instance, k, Some(k), None, Weight::One, cap)?;
    let lambda = instance.lambda_closed_form();
    let kfact = BigRational::from(BigInt::from(factorial_u128(k)));
    let mut rhs = rational_pow(&lambda, k) / kfact;
    for l in 1..k {
        rhs -= weighted_composition_sum(instance, k, Some(l), None, Weight::InvFactorial, cap)?;
    }
    Ok((lhs, rhs))
}

/// The two enumerated pieces of the `R_{k,k-1}` split:
///
/// * first piece: `(λ_{n,2}/2)·Σ_{l=1}^{k-3} Σ_{I_{k-2,l}} (1/∏k_i!)·∏(1-i/n)^{k_i}`
/// * second piece: `(1/2)·Σ_j (1-j/n)²·(T - T_j)` with `T` the all-0/1 sum
///   over `I_{k-2,k-2}` and `T_j` the same restricted to `k_j = 0`
///
/// They satisfy `R_{k,k-1} = (λ_{n,2}/2)·λ_n^{k-2}/(k-2)! - first - second`.
pub fn r_split(
    instance: &CollectorInstance,
    k: u32,
    cap: u128,
) -> Result<(BigRational, BigRational), Error> {
    assert!(k >= 2, "the remainder split needs k >= 2");
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lambda2 = instance.lambda2_closed_form();

    let mut low_order = BigRational::zero();
    for l in 1..=k.saturating_sub(3) {
        low_order +=
            weighted_composition_sum(instance, k - 2, Some(l), None, Weight::InvFactorial, cap)?;
    }
    let first = &half * lambda2 * low_order;

    let t_full = weighted_composition_sum(instance, k - 2, Some(k - 2), None, Weight::One, cap)?;
    let parts = (instance.n() - instance.m() - 1) as usize;
    let mut second = BigRational::zero();
    for (idx, i) in (instance.m() + 1..instance.n()).enumerate() {
        debug_assert!(idx < parts);
        let t_without = weighted_composition_sum(
            instance,
            k - 2,
            Some(k - 2),
            Some(idx),
            Weight::One,
            cap,
        )?;
        let q_sq = rational_pow(&crate::model::rat(instance.n() - i, instance.n()), 2);
        second += q_sq * (&t_full - t_without);
    }
    second *= half;
    Ok((first, second))
}
