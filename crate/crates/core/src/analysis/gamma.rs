//! Among all rank sets of size `c`, the top-`c` and bottom-`c` sets are the
//! easiest to hit.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{header, Report};
use crate::dp_solver::optimal_value;
use crate::error::{Error, Result};
use crate::exact_math::{binomial, decimal_string, serde_rational, Rational};
use crate::reward::Goal;

/// Largest number of rank sets solved exhaustively.
pub const DEFAULT_SUBSET_BUDGET: u128 = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub n: usize,
    pub c: usize,
    pub exhaustive: bool,
    pub subsets_checked: usize,
    #[serde(with = "serde_rational")]
    pub max_value: Rational,
    #[serde(with = "serde_rational")]
    pub top_value: Rational,
    #[serde(with = "serde_rational")]
    pub bottom_value: Rational,
    /// Every checked rank set attaining `max_value`.
    pub maximizers: Vec<Vec<usize>>,
}

fn validate(n: usize, c: usize) -> Result<()> {
    if c == 0 || c >= n {
        return Err(Error::OutOfRange(format!("need 1 <= c < n, got n={n} c={c}")));
    }
    Ok(())
}

fn summarize(n: usize, c: usize, exhaustive: bool, solved: Vec<(Vec<usize>, Rational)>) -> GammaReport {
    let top_value = solved.iter().find(|(g, _)| g[0] == 1 && g[c - 1] == c).unwrap().1.clone();
    let bottom_value = solved.iter().find(|(g, _)| g[0] == n + 1 - c).unwrap().1.clone();
    let max_value = solved.iter().map(|(_, v)| v).max().unwrap().clone();
    let maximizers = solved.iter().filter(|(_, v)| *v == max_value).map(|(g, _)| g.clone()).collect();
    GammaReport { n, c, exhaustive, subsets_checked: solved.len(), max_value, top_value, bottom_value, maximizers }
}

fn solve_all(n: usize, sets: Vec<Vec<usize>>) -> Result<Vec<(Vec<usize>, Rational)>> {
    sets.into_par_iter()
        .map(|g| {
            let v = optimal_value(n, &Goal::RankSet(g.clone()))?;
            Ok((g, v))
        })
        .collect()
}

/// Solves every rank set of size `c` and records where the maximum sits.
/// Fails when `C(n, c)` exceeds `budget`.
pub fn check_gamma_extremality(n: usize, c: usize, budget: u128) -> Result<GammaReport> {
    validate(n, c)?;
    let count: u128 = binomial(n as i64, c as i64).try_into().unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded { n, c, count, budget });
    }
    let sets: Vec<Vec<usize>> = (1..=n).combinations(c).collect();
    Ok(summarize(n, c, true, solve_all(n, sets)?))
}

/// Like [`check_gamma_extremality`] over `samples` random rank sets plus
/// the two extremal sets.
pub fn check_gamma_extremality_sampled(n: usize, c: usize, samples: usize, seed: u64) -> Result<GammaReport> {
    validate(n, c)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sets: Vec<Vec<usize>> = vec![(1..=c).collect(), (n + 1 - c..=n).collect()];
    for _ in 0..samples {
        let mut g: Vec<usize> = sample(&mut rng, n, c).into_iter().map(|i| i + 1).collect();
        g.sort_unstable();
        sets.push(g);
    }
    sets.sort();
    sets.dedup();
    Ok(summarize(n, c, false, solve_all(n, sets)?))
}

impl Report for GammaReport {
    fn passed(&self) -> bool {
        self.top_value == self.max_value && self.bottom_value == self.max_value
    }

    fn header(&self) -> Vec<String> {
        header(&["n", "c", "gamma", "value_num", "value_den", "value_decimal"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.maximizers
            .iter()
            .map(|g| {
                vec![
                    self.n.to_string(),
                    self.c.to_string(),
                    g.iter().map(|r| r.to_string()).join(" "),
                    self.max_value.numer().to_string(),
                    self.max_value.denom().to_string(),
                    decimal_string(&self.max_value, 15),
                ]
            })
            .collect()
    }
}
