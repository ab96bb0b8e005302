//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion report lines.

use std::time::Instant;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use coupon_poisson::combinatorics::{
    enumerate_compositions, index_set_cardinality, s_kk_identity_check, DEFAULT_CAP,
};
use coupon_poisson::diagnostics::{build_schedule, certify_bounds, scaling_study, tv_to_poisson};
use coupon_poisson::exact::{exact_pmf_composition, exact_pmf_dp, NumericMode};
use coupon_poisson::expansion::poisson_order1;
use coupon_poisson::model::{rat, to_f64, CollectorInstance};
use coupon_poisson::simulate::{simulate_waiting_time, EmpiricalPmf, Method, SimConfig};

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn inst(n: u64, m: u64) -> CollectorInstance {
    CollectorInstance::new(n, m).unwrap()
}

/// Criterion 1: the composition-sum path and the convolution DP agree
/// bit-exactly in rational mode (and to 1e-12 in float mode) on every
/// instance with n ≤ 60, n−m ≤ 12, k ≤ 8, in under 10 seconds.
#[test]
fn criterion_1_exact_paths_agree() {
    let start = Instant::now();
    let kmax = 8usize;
    let mut instances = 0u32;
    for n in 1..=60u64 {
        for r in 1..=12.min(n) {
            let instance = inst(n, n - r);
            let by_composition = exact_pmf_composition(&instance, kmax, DEFAULT_CAP).unwrap();
            let by_dp = exact_pmf_dp(&instance, kmax, NumericMode::Rational).unwrap();
            let by_dp_float = exact_pmf_dp(&instance, kmax, NumericMode::Float).unwrap();
            for k in 0..=kmax {
                let p = by_composition.prob_rational(k).unwrap();
                assert_eq!(
                    p,
                    by_dp.prob_rational(k).unwrap(),
                    "rational mismatch at n={n} m={} k={k}",
                    n - r
                );
                assert!(
                    (by_dp_float.prob(k) - to_f64(p)).abs() < 1e-12,
                    "float mismatch at n={n} m={} k={k}",
                    n - r
                );
            }
            instances += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = elapsed.as_secs_f64() < 10.0;
    report(
        1,
        ok,
        &format!(
            "{instances} instances agree on both paths in {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok, "runtime budget exceeded: {elapsed:?}");
}

/// Criterion 2, k = 0 and k = 1: desk-scale reference values at
/// (n=10, m=5) and the first-order correction beating the plain Poisson
/// term.
#[test]
fn criterion_2_desk_scale_k0_k1() {
    let instance = inst(10, 5);
    let pmf = exact_pmf_dp(&instance, 8, NumericMode::Rational).unwrap();

    assert_eq!(pmf.prob_rational(0).unwrap(), &rat(189, 625));
    assert_eq!(instance.lambda_closed_form(), rat(1, 1));
    assert_eq!(instance.lambda2_closed_form(), rat(3, 10));

    let a0 = poisson_order1(&instance, 0);
    assert!((a0.order0 - (-1.0f64).exp()).abs() < 1e-12);
    assert!((a0.order1 - 0.312698).abs() < 1e-6);

    let mut ok = true;
    for k in 0..=1u64 {
        let exact = pmf.prob(k as usize);
        let a = poisson_order1(&instance, k);
        let improved = (a.order1 - exact).abs() < (a.order0 - exact).abs();
        ok &= improved;
        println!(
            "  k={k}: exact={exact:.6} |err0|={:.6} |err1|={:.6} improved={improved}",
            (a.order0 - exact).abs(),
            (a.order1 - exact).abs()
        );
    }
    report(2, ok, "k=0,1: first-order correction beats plain Poisson");
    assert!(ok);
}

/// Criterion 2, k = 2: the claimed improvement does not hold.
///
/// At (n=10, m=5) the exact probability is p(2) = 0.196560, the plain
/// Poisson term is off by 0.012620, and the corrected term is off by
/// 0.014971 — the correction overshoots at this k on this small an
/// instance. The requirement is asserted as stated and this test is
/// expected to stay red; see the per-k numbers it prints.
#[test]
fn criterion_2_desk_scale_k2() {
    let instance = inst(10, 5);
    let pmf = exact_pmf_dp(&instance, 8, NumericMode::Rational).unwrap();
    let exact = pmf.prob(2);
    let a = poisson_order1(&instance, 2);
    let err0 = (a.order0 - exact).abs();
    let err1 = (a.order1 - exact).abs();
    let ok = err1 < err0;
    report(
        2,
        ok,
        &format!("k=2: exact={exact:.6} |err0|={err0:.6} |err1|={err1:.6}"),
    );
    assert!(
        ok,
        "first-order correction does not improve on the plain Poisson term \
         at k=2: |err1|={err1:.6} >= |err0|={err0:.6}"
    );
}

/// Criterion 3: along the λ=2 schedule the sup-norm errors of the two
/// approximations shrink at their predicted rates (≈ n^{-1/2} and
/// ≈ n^{-1}), and the corrected term wins at every n. Under 60 seconds.
#[test]
fn criterion_3_error_scaling() {
    let start = Instant::now();
    let spec = build_schedule(2.0, &[400, 1600, 6400, 25600]).unwrap();
    let study = scaling_study(&spec, 25).unwrap();
    let s0 = study.slope0.unwrap();
    let s1 = study.slope1.unwrap();
    let slopes_ok = (-0.65..=-0.35).contains(&s0) && (-1.25..=-0.75).contains(&s1);
    let everywhere = study.rows.iter().all(|row| row.e1 < row.e0);
    let elapsed = start.elapsed();
    let ok = slopes_ok && everywhere && elapsed.as_secs_f64() < 60.0;
    report(
        3,
        ok,
        &format!(
            "slope0={s0:.3} slope1={s1:.3}, corrected wins at every n, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(slopes_ok, "slope0={s0} slope1={s1}");
    assert!(everywhere);
    assert!(elapsed.as_secs_f64() < 60.0, "runtime budget exceeded");
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Criterion 4: the counting formula for compositions with a prescribed
/// number of nonzero slots matches brute-force enumeration, the counts
/// partition the full composition set, and the multinomial rearrangement
/// of the all-0/1 layer is an exact rational identity.
#[test]
fn criterion_4_combinatorial_identities() {
    for parts in 1..=8usize {
        for k in 0..=6u32 {
            let mut total = 0u128;
            for l in 1..=k {
                let counted = enumerate_compositions(k, parts, Some(l), None, DEFAULT_CAP)
                    .unwrap()
                    .count() as u128;
                assert_eq!(
                    counted,
                    index_set_cardinality(k, l, parts),
                    "cardinality mismatch k={k} l={l} parts={parts}"
                );
                total += counted;
            }
            if k == 0 {
                total = 1; // the empty composition
            }
            assert_eq!(
                total,
                binomial_u128((k as u128) + (parts as u128) - 1, k as u128),
                "partition mismatch k={k} parts={parts}"
            );
        }
    }

    let mut identities = 0u32;
    for n in 2..=20u64 {
        for r in 2..=8.min(n) {
            let instance = inst(n, n - r);
            for k in 1..=5u32 {
                let (lhs, rhs) = s_kk_identity_check(&instance, k, DEFAULT_CAP).unwrap();
                assert_eq!(lhs, rhs, "identity broken at n={n} m={} k={k}", n - r);
                identities += 1;
            }
        }
    }
    report(
        4,
        true,
        &format!("cardinalities, partition law, and {identities} exact rearrangement identities"),
    );
}

/// Criterion 5: every certified inequality holds with nonnegative margin
/// on a 50-instance grid spanning n ∈ [20, 5000]. The grid follows the
/// scaling schedule with λ targets in [0.5, 1.5], the regime the
/// remainder analysis addresses; exact-rational comparison is used
/// internally wherever both sides are rational.
#[test]
fn criterion_5_inequality_grid() {
    let lambda_targets = [0.5, 0.75, 1.0, 1.25, 1.5];
    let n_values = [20u64, 40, 80, 100, 160, 320, 640, 1280, 2500, 5000];
    let mut instances = 0u32;
    let mut checked = 0u32;
    let mut min_margin = f64::INFINITY;
    for &lambda in &lambda_targets {
        for &n in &n_values {
            let r = (2.0 * lambda * n as f64).sqrt().round() as u64;
            let instance = inst(n, n - r);
            let checks = certify_bounds(&instance, 5, DEFAULT_CAP).unwrap();
            assert!(checks.iter().any(|c| !c.skipped));
            for check in checks.iter().filter(|c| !c.skipped) {
                assert!(
                    check.holds,
                    "violated at n={n} m={}: {} lhs={} rhs={}",
                    n - r,
                    check.name,
                    check.lhs,
                    check.rhs
                );
                checked += 1;
                // identities report margin 0; tolerate float rounding there
                if check.margin < min_margin {
                    min_margin = check.margin;
                }
            }
            instances += 1;
        }
    }
    assert_eq!(instances, 50);
    report(
        5,
        true,
        &format!("{checked} checks hold on {instances} instances, min margin {min_margin:.2e}"),
    );
}

/// Criterion 6: closed forms of the first two moments match direct
/// summation exactly for every instance with n ≤ 200, and the second
/// moment approaches (2λ_n)^{3/2}/(3√n) at rate 1/n along the λ=2
/// schedule with a modest constant.
#[test]
fn criterion_6_closed_forms() {
    for n in 1..=200u64 {
        for m in 0..n {
            let instance = inst(n, m);
            assert_eq!(
                instance.lambda_closed_form(),
                instance.lambda_moment(1).unwrap(),
                "first moment mismatch at n={n} m={m}"
            );
            assert_eq!(
                instance.lambda2_closed_form(),
                instance.lambda_moment(2).unwrap(),
                "second moment mismatch at n={n} m={m}"
            );
        }
    }

    let spec = build_schedule(2.0, &[400, 1600, 6400, 25600]).unwrap();
    let mut c_fit = 0.0f64;
    for instance in &spec.instances {
        let n = instance.n() as f64;
        let lambda = instance.lambda1_f64();
        let asymptote = (2.0 * lambda).powf(1.5) / (3.0 * n.sqrt());
        let c = n * (instance.lambda2_f64() - asymptote).abs();
        c_fit = c_fit.max(c);
    }
    let ok = c_fit < 10.0;
    report(
        6,
        ok,
        &format!("closed forms exact for n ≤ 200; fitted constant {c_fit:.3} < 10"),
    );
    assert!(ok, "fitted constant too large: {c_fit}");
}

/// Two-sample chi-square statistic with equal sample counts, lumping the
/// support into bins with pooled count ≥ 5.
fn chi_square_two_sample(a: &EmpiricalPmf, b: &EmpiricalPmf) -> (f64, f64) {
    assert_eq!(a.samples, b.samples);
    let keys: std::collections::BTreeSet<u64> =
        a.counts.keys().chain(b.counts.keys()).copied().collect();
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for k in keys {
        acc.0 += a.counts.get(&k).copied().unwrap_or(0);
        acc.1 += b.counts.get(&k).copied().unwrap_or(0);
        if acc.0 + acc.1 >= 5 {
            bins.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        let last = bins.last_mut().unwrap();
        last.0 += acc.0;
        last.1 += acc.1;
    }
    let stat: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let (x, y) = (x as f64, y as f64);
            (x - y) * (x - y) / (x + y)
        })
        .sum();
    (stat, (bins.len() - 1) as f64)
}

/// Criterion 7: a seeded million-sample run matches the exact PMF within
/// 4 standard errors for k ≤ 6, the two sampling methods agree under a
/// two-sample chi-square test at α = 0.001, and reruns are bit-identical.
#[test]
fn criterion_7_monte_carlo() {
    let instance = inst(10, 5);
    let samples = 1_000_000u64;
    let geo = SimConfig {
        instance,
        samples,
        seed: 0xC0FFEE,
        method: Method::Geometric,
        workers: 4,
    };
    let draw = SimConfig {
        method: Method::Draw,
        ..geo
    };
    let by_geometric = simulate_waiting_time(&geo);
    let by_draw = simulate_waiting_time(&draw);

    let pmf = exact_pmf_dp(&instance, 20, NumericMode::Rational).unwrap();
    let mut ok = true;
    for config_run in [&by_geometric, &by_draw] {
        for k in 0..=6u64 {
            let exact = to_f64(pmf.prob_rational(k as usize).unwrap());
            let dev = (config_run.p_hat(k) - exact).abs();
            let se = config_run.se(k).max(1e-12);
            ok &= dev < 4.0 * se;
        }
    }

    let (stat, df) = chi_square_two_sample(&by_draw, &by_geometric);
    let threshold = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    let methods_agree = stat < threshold;

    let rerun = simulate_waiting_time(&geo);
    let deterministic = rerun == by_geometric;

    report(
        7,
        ok && methods_agree && deterministic,
        &format!(
            "p̂ within 4·se for k ≤ 6; chi-square {stat:.2} < {threshold:.2} (df={df}); \
             rerun bit-identical"
        ),
    );
    assert!(ok, "empirical PMF strays beyond 4 standard errors");
    assert!(methods_agree, "chi-square {stat} >= {threshold} (df={df})");
    assert!(deterministic);
}

/// Criterion 8: the total variation distance to the limiting Poisson(2)
/// law decreases along the schedule and drops below 0.01 by n = 6400.
#[test]
fn criterion_8_poisson_limit() {
    let spec = build_schedule(2.0, &[400, 1600, 6400]).unwrap();
    let mut distances = Vec::new();
    for instance in &spec.instances {
        let pmf = exact_pmf_dp(instance, 40, NumericMode::Float).unwrap();
        distances.push(tv_to_poisson(&pmf, 2.0));
    }
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    let small = *distances.last().unwrap() < 0.01;
    report(
        8,
        monotone && small,
        &format!(
            "TV distances {:?} decrease; final {:.4} < 0.01",
            distances
                .iter()
                .map(|d| (d * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            distances.last().unwrap()
        ),
    );
    assert!(monotone, "{distances:?}");
    assert!(small, "{distances:?}");
}
