//! Seeded Monte Carlo oracle for the centered waiting time.
//!
//! Two distributionally identical sampling methods:
//!
//! * `Draw` simulates literal coupon draws until `n - m` distinct coupons
//!   have been seen;
//! * `Geometric` samples the sum of shifted geometric variables directly by
//!   inversion, O(1) per variate, which keeps large `n` feasible.
//!
//! Reproducibility contract: the sample budget is split evenly across
//! workers; worker `w` uses a child seed derived from `(seed, w)` by a fixed
//! mixing function, and the merge is a plain count addition. Identical
//! `(seed, workers, method)` therefore give identical counts regardless of
//! thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::CollectorInstance;

/// RNG identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Draw,
    Geometric,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Draw => "draw",
            Method::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub instance: CollectorInstance,
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
    pub workers: usize,
}

/// Empirical distribution of the waiting time over independent replications.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalPmf {
    pub counts: BTreeMap<u64, u64>,
    pub samples: u64,
}

impl EmpiricalPmf {
    pub fn p_hat(&self, k: u64) -> f64 {
        *self.counts.get(&k).unwrap_or(&0) as f64 / self.samples as f64
    }

    /// Standard error `√(p̂(1-p̂)/samples)` of the point estimate at `k`.
    pub fn se(&self, k: u64) -> f64 {
        let p = self.p_hat(k);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn merge(&mut self, other: &EmpiricalPmf) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.samples += other.samples;
    }
}

/// SplitMix64 finalizer; fixed seed-splitting function for worker streams.
fn child_seed(seed: u64, worker: usize) -> u64 {
    let mut z = seed
        .wrapping_add((worker as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_draw(instance: &CollectorInstance, rng: &mut ChaCha8Rng, seen: &mut [u64], epoch: u64) -> u64 {
    let n = instance.n();
    let target = instance.r();
    let mut distinct = 0u64;
    let mut draws = 0u64;
    while distinct < target {
        let coupon = rng.gen_range(0..n) as usize;
        draws += 1;
        if seen[coupon] != epoch {
            seen[coupon] = epoch;
            distinct += 1;
        }
    }
    draws - target
}

fn sample_geometric(instance: &CollectorInstance, rng: &mut ChaCha8Rng) -> u64 {
    let n = instance.n() as f64;
    let mut total = 0u64;
    for i in instance.m() + 1..instance.n() {
        let p = i as f64 / n;
        // inversion: G = ceil(ln(1-U)/ln(1-p)) on {1,2,...}; failures = G-1
        let u: f64 = rng.gen();
        let g = ((1.0 - u).ln() / (1.0 - p).ln()).ceil().max(1.0);
        total += g as u64 - 1;
    }
    // the i = n factor always succeeds on the first draw
    total
}

fn run_worker(config: &SimConfig, worker: usize, samples: u64) -> EmpiricalPmf {
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(config.seed, worker));
    let mut counts = BTreeMap::new();
    match config.method {
        Method::Draw => {
            let mut seen = vec![0u64; config.instance.n() as usize];
            for s in 0..samples {
                let w = sample_draw(&config.instance, &mut rng, &mut seen, s + 1);
                *counts.entry(w).or_insert(0) += 1;
            }
        }
        Method::Geometric => {
            for _ in 0..samples {
                let w = sample_geometric(&config.instance, &mut rng);
                *counts.entry(w).or_insert(0) += 1;
            }
        }
    }
    EmpiricalPmf { counts, samples }
}

/// Simulate the collector and return the empirical distribution of the
/// centered waiting time.
pub fn simulate_waiting_time(config: &SimConfig) -> EmpiricalPmf {
    assert!(config.samples >= 1);
    let workers = config.workers.max(1);
    let base = config.samples / workers as u64;
    let extra = (config.samples % workers as u64) as usize;
    let budgets: Vec<u64> = (0..workers)
        .map(|w| base + u64::from(w < extra))
        .collect();

    let mut merged = EmpiricalPmf::default();
    if workers == 1 {
        merged = run_worker(config, 0, budgets[0]);
    } else {
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = budgets
                .iter()
                .enumerate()
                .map(|(w, &b)| scope.spawn(move || run_worker(config, w, b)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation worker panicked"))
                .collect::<Vec<_>>()
        });
        for part in &results {
            merged.merge(part);
        }
    }
    merged
}
