//! Seeded Monte Carlo estimate of a policy's success probability.
//!
//! Trials are split into fixed-size shards. Shard `s` draws from ChaCha12
//! seeded with the user seed on stream `s`, so the result depends only on
//! `(seed, trials)` and never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::StagePolicy;
use crate::reward::Goal;

/// Identifies the generator, its stream layout and the shard size.
pub const RNG_ID: &str = "chacha12/rand_chacha-0.9/stream-per-shard/65536";

const SHARD_TRIALS: u64 = 1 << 16;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    pub goal: Goal,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Wilson score interval.
    pub ci95: (f64, f64),
    pub seed: u64,
    pub rng_id: String,
}

impl SimulationReport {
    fn from_counts(n: usize, goal: Goal, trials: u64, successes: u64, seed: u64) -> Self {
        let m = trials as f64;
        let p = successes as f64 / m;
        let std_error = (p * (1.0 - p) / m).sqrt();
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / m;
        let center = (p + z2 / (2.0 * m)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
        Self {
            n,
            goal,
            trials,
            successes,
            estimate: p,
            std_error,
            // The Wilson bound is exactly 0 (or 1) at the extremes; pin it
            // there instead of keeping rounding residue.
            ci95: (
                if successes == 0 { 0.0 } else { (center - half).max(0.0) },
                if successes == trials { 1.0 } else { (center + half).min(1.0) },
            ),
            seed,
            rng_id: RNG_ID.to_string(),
        }
    }

    /// `|estimate - exact|` in units of the standard error.
    pub fn z_score(&self, exact: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == exact {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - exact).abs() / self.std_error
        }
    }
}

/// In-place Fisher–Yates shuffle; uniform whatever the starting order.
pub fn shuffle<R: Rng>(rng: &mut R, items: &mut [usize]) {
    for i in 0..items.len().saturating_sub(1) {
        let k = rng.random_range(i..items.len());
        items.swap(i, k);
    }
}

/// `X_j = |{i <= j : R_i <= R_j}|` for every stage.
pub fn relative_ranks(absolute: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::with_capacity(absolute.len());
    absolute
        .iter()
        .map(|&r| {
            let pos = seen.partition_point(|&s| s < r);
            seen.insert(pos, r);
            pos + 1
        })
        .collect()
}

/// Runs one shard and returns its success count.
fn run_shard(n: usize, goal: &Goal, policy: &StagePolicy, trials: u64, seed: u64, shard: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut pool: Vec<usize> = (1..=n).collect();
    let mut seen: Vec<usize> = Vec::with_capacity(n);
    let idle: Vec<bool> = (1..=n).map(|j| policy.is_empty_at(j)).collect();
    let mut wins = 0;
    for _ in 0..trials {
        seen.clear();
        // Draw R_1, R_2, … lazily by a partial Fisher–Yates pass.
        for j in 0..n {
            let k = rng.random_range(j..n);
            pool.swap(j, k);
            let r = pool[j];
            let pos = seen.partition_point(|&s| s < r);
            seen.insert(pos, r);
            if !idle[j] && policy.accepts(j + 1, pos + 1) {
                if goal.contains(r) {
                    wins += 1;
                }
                break;
            }
        }
    }
    wins
}

/// Estimates the success probability of `policy` by `trials` uniformly
/// random candidate orders.
pub fn simulate(n: usize, goal: &Goal, policy: &StagePolicy, trials: u64, seed: u64) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::EmptySimulation);
    }
    if policy.n() != n {
        return Err(Error::DimensionMismatch { policy: policy.n(), problem: n });
    }
    goal.validate(n)?;
    let shards = trials.div_ceil(SHARD_TRIALS);
    let successes: u64 = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD_TRIALS.min(trials - s * SHARD_TRIALS);
            run_shard(n, goal, policy, count, seed, s)
        })
        .sum();
    Ok(SimulationReport::from_counts(n, goal.clone(), trials, successes, seed))
}
