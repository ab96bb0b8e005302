//! Problem instances and the moment sums `λ_{n,j}` everything else consumes.
//!
//! All quantities here are rational in `1/n`, so the primary representation
//! is exact ([`num_rational::BigRational`]); float views are derived from the
//! rationals, never accumulated independently.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::Error;

/// The pair `(n, m)`: `n` coupon types, stop when `n - m` distinct ones
/// have been collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CollectorInstance {
    n: u64,
    m: u64,
}

/// One geometric factor of the waiting-time sum: index `i` with success
/// probability `i/n`. The index `i = n` is degenerate (zero failures almost
/// surely).
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricTerm {
    pub index: u64,
    pub success_prob: BigRational,
    pub failure_prob: BigRational,
}

impl CollectorInstance {
    pub fn new(n: u64, m: u64) -> Result<Self, Error> {
        if n == 0 || m >= n {
            return Err(Error::InvalidInstance { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Number of distinct coupons still to collect, `r = n - m >= 1`.
    pub fn r(&self) -> u64 {
        self.n - self.m
    }

    /// The geometric factors for `i = m+1..=n`.
    pub fn geometric_terms(&self) -> impl Iterator<Item = GeometricTerm> + '_ {
        let n = self.n;
        (self.m + 1..=n).map(move |i| GeometricTerm {
            index: i,
            success_prob: rat(i, n),
            failure_prob: rat(n - i, n),
        })
    }

    /// `λ_{n,j} = Σ_{i=m+1}^{n} (1 - i/n)^j` as an exact rational.
    ///
    /// Rejects `j = 0`; the moment family starts at `j = 1`.
    pub fn lambda_moment(&self, j: u32) -> Result<BigRational, Error> {
        if j == 0 {
            return Err(Error::ZeroMomentOrder);
        }
        let mut num = BigInt::zero();
        for i in self.m + 1..=self.n {
            num += BigInt::from(self.n - i).pow(j);
        }
        Ok(BigRational::new(num, BigInt::from(self.n).pow(j)))
    }

    /// Closed form `λ_{n,1} = (n-m)(n-m-1)/(2n)`.
    pub fn lambda_closed_form(&self) -> BigRational {
        let r = BigInt::from(self.r());
        BigRational::new(&r * (&r - 1), 2 * BigInt::from(self.n))
    }

    /// Closed form `λ_{n,2} = (n-m)(n-m-1)(n-m-1/2)/(3n²)`, written with
    /// integer entries as `(n-m)(n-m-1)(2(n-m)-1)/(6n²)`.
    pub fn lambda2_closed_form(&self) -> BigRational {
        let r = BigInt::from(self.r());
        let num = &r * (&r - 1) * (2 * &r - 1);
        BigRational::new(num, 6 * BigInt::from(self.n).pow(2u32))
    }

    /// Float view of `λ_{n,1}`.
    pub fn lambda1_f64(&self) -> f64 {
        to_f64(&self.lambda_closed_form())
    }

    /// Float view of `λ_{n,2}`.
    pub fn lambda2_f64(&self) -> f64 {
        to_f64(&self.lambda2_closed_form())
    }

    /// Exact mean of the waiting-time sum, `Σ_{i=m+1}^{n} (n-i)/i`.
    pub fn mean_exact(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for i in self.m + 1..=self.n {
            acc += rat(self.n - i, i);
        }
        acc
    }
}

/// The moments `λ_{n,1..=J}` of one instance, exact with float views.
#[derive(Debug, Clone)]
pub struct MomentVector {
    pub instance: CollectorInstance,
    values: Vec<BigRational>,
}

/// Default maximum moment order; tail-sum work only needs small `j`.
pub const DEFAULT_MOMENT_ORDER: u32 = 12;

impl MomentVector {
    pub fn new(instance: CollectorInstance, max_order: u32) -> Result<Self, Error> {
        let values = (1..=max_order)
            .map(|j| instance.lambda_moment(j))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { instance, values })
    }

    pub fn max_order(&self) -> u32 {
        self.values.len() as u32
    }

    /// `λ_{n,j}`, 1-based in `j`.
    pub fn value(&self, j: u32) -> &BigRational {
        &self.values[(j - 1) as usize]
    }

    pub fn float(&self, j: u32) -> f64 {
        to_f64(self.value(j))
    }
}

/// Exact rational `num/den` from unsigned integers.
pub fn rat(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Float view of an exact rational.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

/// `x^k` for exact rationals.
pub fn rational_pow(x: &BigRational, k: u32) -> BigRational {
    if k == 0 {
        BigRational::one()
    } else {
        Pow::pow(x.clone(), k as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u64, m: u64) -> CollectorInstance {
        CollectorInstance::new(n, m).unwrap()
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(CollectorInstance::new(0, 0).is_err());
        assert!(CollectorInstance::new(10, 10).is_err());
        assert!(CollectorInstance::new(10, 12).is_err());
        assert!(CollectorInstance::new(1, 0).is_ok());
    }

    #[test]
    fn lambda_moment_examples() {
        // n=10, m=5: 0.4 + 0.3 + 0.2 + 0.1 + 0 = 1
        assert_eq!(inst(10, 5).lambda_moment(1).unwrap(), rat(1, 1));
        // squares: 0.16 + 0.09 + 0.04 + 0.01 = 0.3
        assert_eq!(inst(10, 5).lambda_moment(2).unwrap(), rat(3, 10));
        // degenerate collector needing a single coupon: empty of mass
        assert_eq!(inst(7, 6).lambda_moment(1).unwrap(), BigRational::zero());
        assert_eq!(inst(200, 199).lambda_moment(5).unwrap(), BigRational::zero());
    }

    #[test]
    fn lambda_moment_rejects_zero_order() {
        assert!(matches!(
            inst(10, 5).lambda_moment(0),
            Err(Error::ZeroMomentOrder)
        ));
    }

    #[test]
    fn closed_forms_match_examples() {
        assert_eq!(inst(10, 5).lambda_closed_form(), rat(1, 1));
        assert_eq!(inst(7, 6).lambda_closed_form(), BigRational::zero());
        assert_eq!(inst(100, 80).lambda_closed_form(), rat(19, 10));

        assert_eq!(inst(10, 5).lambda2_closed_form(), rat(3, 10));
        assert_eq!(inst(7, 6).lambda2_closed_form(), BigRational::zero());
        assert_eq!(inst(100, 80).lambda2_closed_form(), rat(247, 1000));
    }

    #[test]
    fn closed_forms_equal_direct_sums_exhaustively() {
        for n in 1..=200u64 {
            for m in 0..n {
                let c = inst(n, m);
                assert_eq!(c.lambda_closed_form(), c.lambda_moment(1).unwrap());
                assert_eq!(c.lambda2_closed_form(), c.lambda_moment(2).unwrap());
            }
        }
    }

    #[test]
    fn moments_weakly_decrease_and_are_nonnegative() {
        for &(n, m) in &[(10u64, 5u64), (30, 20), (60, 48), (200, 171), (5, 0)] {
            let mv = MomentVector::new(inst(n, m), 12).unwrap();
            for j in 1..=12 {
                assert!(*mv.value(j) >= BigRational::zero());
                if j > 1 {
                    assert!(mv.value(j) <= mv.value(j - 1), "n={n} m={m} j={j}");
                }
            }
        }
    }

    #[test]
    fn sqrt_comparison_holds_squared() {
        // (n-m-1)/sqrt(n) <= sqrt(2 λ_n), compared as (n-m-1)² <= 2 λ_n n.
        for n in 1..=120u64 {
            for m in 0..n {
                let c = inst(n, m);
                let lhs = BigInt::from(n - m - 1).pow(2u32);
                let two_lam_n = c.lambda_closed_form() * BigRational::from(BigInt::from(2 * n));
                assert!(BigRational::from(lhs) <= two_lam_n, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn moment_decay_bound_holds_squared() {
        // λ_{n,j} <= λ_n (2λ_n/n)^{(j-1)/2}, squared to stay rational.
        for &(n, m) in &[(20u64, 10u64), (60, 45), (200, 172), (200, 140), (50, 49)] {
            let c = inst(n, m);
            let lam = c.lambda_closed_form();
            let ratio = rat(2, n) * &lam;
            for j in 2..=12u32 {
                let lhs = rational_pow(&c.lambda_moment(j).unwrap(), 2);
                let rhs = rational_pow(&lam, 2) * rational_pow(&ratio, j - 1);
                assert!(lhs <= rhs, "n={n} m={m} j={j}");
            }
        }
    }

    #[test]
    fn geometric_terms_cover_range() {
        let c = inst(10, 5);
        let terms: Vec<_> = c.geometric_terms().collect();
        assert_eq!(terms.len(), 5);
        assert_eq!(terms[0].index, 6);
        assert_eq!(terms[0].failure_prob, rat(4, 10));
        let last = terms.last().unwrap();
        assert_eq!(last.index, 10);
        assert_eq!(last.success_prob, rat(1, 1));
        assert!(last.failure_prob.is_zero());
    }

    #[test]
    fn mean_matches_harmonic_form() {
        // n=10, m=5: 4/6 + 3/7 + 2/8 + 1/9 + 0
        let want = rat(4, 6) + rat(3, 7) + rat(2, 8) + rat(1, 9);
        assert_eq!(inst(10, 5).mean_exact(), want);
    }
}
