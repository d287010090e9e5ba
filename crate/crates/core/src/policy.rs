//! Stage-set stopping policies: accept at the first stage `j` whose relative
//! rank lies in `S_j`, with `S_n = {1..n}` forcing a stop at the last stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-width bit set over relative ranks `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RankBits {
    words: Vec<u64>,
}

impl RankBits {
    fn empty(len: usize) -> Self {
        Self { words: vec![0; len / 64 + 1] }
    }

    fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for x in 1..=len {
            b.insert(x);
        }
        b
    }

    fn insert(&mut self, x: usize) {
        self.words[x / 64] |= 1 << (x % 64);
    }

    fn remove(&mut self, x: usize) {
        self.words[x / 64] &= !(1 << (x % 64));
    }

    fn contains(&self, x: usize) -> bool {
        self.words.get(x / 64).is_some_and(|w| w & (1 << (x % 64)) != 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b))
    }
}

/// Per-stage acceptance sets `S_1, …, S_n` with `S_j ⊆ {1..j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolicyFile", into = "PolicyFile")]
pub struct StagePolicy {
    n: usize,
    accept: Vec<RankBits>,
}

/// On-disk image of a [`StagePolicy`]: 1-based stages and ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub n: usize,
    pub accept: Vec<Vec<usize>>,
}

impl StagePolicy {
    /// Builds a policy from explicit stop sets, `accept[j-1] = S_j`.
    pub fn new(n: usize, accept: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPolicy("n must be at least 1".into()));
        }
        if accept.len() != n {
            return Err(Error::InvalidPolicy(format!("expected {n} stage sets, got {}", accept.len())));
        }
        let mut sets = Vec::with_capacity(n);
        for (idx, ranks) in accept.into_iter().enumerate() {
            let j = idx + 1;
            let mut bits = RankBits::empty(j);
            for x in ranks {
                if x == 0 || x > j {
                    return Err(Error::InvalidPolicy(format!("stage {j} accepts relative rank {x}, outside 1..={j}")));
                }
                bits.insert(x);
            }
            sets.push(bits);
        }
        if sets[n - 1].count() != n {
            return Err(Error::InvalidPolicy(format!("stage {n} must accept every relative rank")));
        }
        Ok(Self { n, accept: sets })
    }

    /// Never stops early; always takes the last candidate.
    pub fn stop_at_n(n: usize) -> Self {
        Self::from_fn(n, |_, _| false)
    }

    /// Builds `S_j = {x : pred(j, x)}` for `j < n`; `S_n` is always full.
    pub fn from_fn(n: usize, mut pred: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(n >= 1, "policy needs at least one stage");
        let mut accept: Vec<RankBits> = (1..n)
            .map(|j| {
                let mut bits = RankBits::empty(j);
                for x in (1..=j).filter(|&x| pred(j, x)) {
                    bits.insert(x);
                }
                bits
            })
            .collect();
        accept.push(RankBits::full(n));
        Self { n, accept }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn accepts(&self, j: usize, x: usize) -> bool {
        j >= 1 && j <= self.n && self.accept[j - 1].contains(x)
    }

    /// `|S_j|`
    pub fn stop_count(&self, j: usize) -> usize {
        self.accept[j - 1].count()
    }

    pub fn is_empty_at(&self, j: usize) -> bool {
        self.accept[j - 1].words.iter().all(|&w| w == 0)
    }

    /// Sorted members of `S_j`.
    pub fn stop_set(&self, j: usize) -> Vec<usize> {
        self.accept[j - 1].iter().collect()
    }

    /// Returns a copy with relative rank `x` added to or removed from `S_j`.
    /// `S_n` cannot be shrunk.
    pub fn with_rank(&self, j: usize, x: usize, accept: bool) -> Result<Self> {
        if j == 0 || j > self.n || x == 0 || x > j {
            return Err(Error::InvalidPolicy(format!("no relative rank {x} at stage {j}")));
        }
        if j == self.n && !accept {
            return Err(Error::InvalidPolicy("the last stage must accept every rank".into()));
        }
        let mut out = self.clone();
        if accept {
            out.accept[j - 1].insert(x);
        } else {
            out.accept[j - 1].remove(x);
        }
        Ok(out)
    }

    /// Stage at which the policy stops on the given relative-rank sequence.
    pub fn stopping_stage(&self, relative_ranks: &[usize]) -> Result<usize> {
        if relative_ranks.len() != self.n {
            return Err(Error::DimensionMismatch { policy: self.n, problem: relative_ranks.len() });
        }
        Ok(relative_ranks.iter().enumerate().position(|(i, &x)| self.accepts(i + 1, x)).map_or(self.n, |i| i + 1))
    }

    pub fn to_file(&self) -> PolicyFile {
        PolicyFile { n: self.n, accept: (1..=self.n).map(|j| self.stop_set(j)).collect() }
    }
}

impl TryFrom<PolicyFile> for StagePolicy {
    type Error = Error;

    fn try_from(file: PolicyFile) -> Result<Self> {
        StagePolicy::new(file.n, file.accept)
    }
}

impl From<StagePolicy> for PolicyFile {
    fn from(p: StagePolicy) -> Self {
        p.to_file()
    }
}
