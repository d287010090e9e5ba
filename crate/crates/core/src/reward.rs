//! Stopping reward: probability that the current candidate's absolute rank
//! meets the goal, given only its relative rank.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_math::{binomial, Rational};

/// Selection target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// Select exactly the k-th best.
    SingleRank(usize),
    /// Select any candidate whose absolute rank lies in the set.
    /// Kept sorted and deduplicated; build it with [`Goal::rank_set`].
    RankSet(Vec<usize>),
}

impl Goal {
    pub fn rank_set(ranks: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = ranks.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Goal::RankSet(v)
    }

    /// `{1, …, c}`
    pub fn top(c: usize) -> Self {
        Goal::RankSet((1..=c).collect())
    }

    /// `{n-c+1, …, n}`
    pub fn bottom(n: usize, c: usize) -> Self {
        Goal::RankSet((n + 1 - c..=n).collect())
    }

    pub fn ranks(&self) -> &[usize] {
        match self {
            Goal::SingleRank(k) => std::slice::from_ref(k),
            Goal::RankSet(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.ranks().len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks().is_empty()
    }

    pub fn contains(&self, rank: usize) -> bool {
        match self {
            Goal::SingleRank(k) => *k == rank,
            Goal::RankSet(v) => v.binary_search(&rank).is_ok(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let invalid = |reason: String| Err(Error::InvalidGoal { n, reason });
        match self {
            Goal::SingleRank(k) if *k == 0 || *k > n => invalid(format!("rank {k} outside 1..={n}")),
            Goal::RankSet(v) if v.is_empty() => invalid("empty rank set".into()),
            Goal::RankSet(v) if v.windows(2).any(|w| w[0] >= w[1]) => {
                invalid("rank set not sorted and deduplicated".into())
            }
            Goal::RankSet(v) if v[0] == 0 || *v.last().unwrap() > n => {
                invalid(format!("rank set {v:?} not within 1..={n}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::SingleRank(k) => write!(f, "k={k}"),
            Goal::RankSet(v) => {
                let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                write!(f, "gamma={{{}}}", parts.join(","))
            }
        }
    }
}

/// Relative rank `x` of the `j`-th of `n` candidates among the first `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelativeRankObservation {
    pub n: usize,
    pub j: usize,
    pub x: usize,
}

impl RelativeRankObservation {
    pub fn new(n: usize, j: usize, x: usize) -> Result<Self> {
        if x == 0 || x > j || j > n {
            return Err(Error::OutOfRange(format!("need 1 <= x <= j <= n, got n={n} j={j} x={x}")));
        }
        Ok(Self { n, j, x })
    }
}

/// `P(R_j ∈ goal | X_j = x)`.
///
/// For a single rank `k` this is the hypergeometric weight
/// `C(k-1, x-1) · C(n-k, j-x) / C(n, j)`; rank sets sum it over members.
pub fn reward(obs: RelativeRankObservation, goal: &Goal) -> Result<Rational> {
    goal.validate(obs.n)?;
    Ok(reward_unchecked(obs.n, obs.j, obs.x, goal))
}

/// [`reward`] without range or goal validation, for inner loops that
/// already established both.
pub(crate) fn reward_unchecked(n: usize, j: usize, x: usize, goal: &Goal) -> Rational {
    let (n, j, x) = (n as i64, j as i64, x as i64);
    let num: BigInt = goal
        .ranks()
        .iter()
        .map(|&k| {
            let k = k as i64;
            binomial(k - 1, x - 1) * binomial(n - k, j - x)
        })
        .sum();
    if num.is_zero() {
        return Rational::zero();
    }
    Rational::new(num, binomial(n, j))
}

/// Relative ranks at stage `j` whose reward can be nonzero. Outside this
/// range the reward is exactly zero. May be empty (`lo > hi`).
pub fn support(n: usize, j: usize, goal: &Goal) -> RangeInclusive<usize> {
    let ranks = goal.ranks();
    let (min_k, max_k) = (ranks[0], *ranks.last().unwrap());
    // x <= k and j - x <= n - k
    let lo = (j + min_k).saturating_sub(n).max(1);
    let hi = j.min(max_k);
    lo..=hi
}

/// Closed form of the reward for the third-best goal.
pub fn reward_k3(n: usize, j: usize, x: usize) -> Result<Rational> {
    if n < 3 {
        return Err(Error::TooSmall { what: "reward_k3", n, min: 3 });
    }
    RelativeRankObservation::new(n, j, x)?;
    let (n, j) = (n as i64, j as i64);
    let den = n * (n - 1) * (n - 2);
    let num = match x {
        1 => j * (n - j - 1) * (n - j),
        2 => 2 * j * (j - 1) * (n - j),
        3 => j * (j - 1) * (j - 2),
        _ => 0,
    };
    Ok(Rational::new(num.into(), den.into()))
}
