//! Exact backward induction for selecting a candidate whose absolute rank
//! meets a [`Goal`], observing only relative ranks.
//!
//! With `y_j(x)` the stopping reward,
//!
//! ```text
//! V_n(x) = y_n(x)
//! V_j(x) = max(y_j(x), cont_j),   cont_j = (1/(j+1)) Σ_{i=1}^{j+1} V_{j+1}(i)
//! ```
//!
//! and the optimal value is `V_1(1)`. Ties go to stopping.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::Zero;
use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::exact_math::Rational;
use crate::policy::StagePolicy;
use crate::reward::{reward_unchecked, support, Goal};

/// Full solution table for one `(n, goal)` instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    n: usize,
    goal: Goal,
    /// `values[j-1][x-1] = V_j(x)`
    values: Vec<Vec<Rational>>,
    /// `cont[j-1]` for `j = 1..n-1`
    cont: Vec<Rational>,
}

impl ValueTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    /// `V_j(x)`
    pub fn v(&self, j: usize, x: usize) -> &Rational {
        &self.values[j - 1][x - 1]
    }

    /// Value of rejecting at stage `j < n` and continuing optimally.
    pub fn cont(&self, j: usize) -> &Rational {
        &self.cont[j - 1]
    }

    /// `V_1(1)`, the optimal success probability.
    pub fn value(&self) -> &Rational {
        &self.values[0][0]
    }

    pub fn stage(&self, j: usize) -> &[Rational] {
        &self.values[j - 1]
    }
}

/// Sparse view of one stage: values on the reward support, plus the
/// common value everywhere else.
struct Stage {
    lo: usize,
    on_support: Vec<Rational>,
    off_support: Rational,
    len: usize,
}

impl Stage {
    fn sum(&self) -> Rational {
        let off = self.len - self.on_support.len();
        let mut s: Rational = self.on_support.iter().sum();
        if off > 0 && !self.off_support.is_zero() {
            s += &self.off_support * Rational::from_integer(off.into());
        }
        s
    }

    fn get(&self, x: usize) -> &Rational {
        if x >= self.lo && x < self.lo + self.on_support.len() {
            &self.on_support[x - self.lo]
        } else {
            &self.off_support
        }
    }

    fn expand(&self) -> Vec<Rational> {
        (1..=self.len).map(|x| self.get(x).clone()).collect()
    }
}

struct Pass {
    stages: Vec<Stage>,
    cont: Vec<Rational>,
    stop: Vec<Vec<usize>>,
}

fn check(n: usize, goal: &Goal) -> Result<()> {
    if n == 0 {
        return Err(Error::TooSmall { what: "solve", n, min: 1 });
    }
    goal.validate(n)
}

/// One backward sweep. When `keep` is false only the running stage is held.
fn backward(n: usize, goal: &Goal, keep: bool) -> Pass {
    let terminal = {
        let s = support(n, n, goal);
        let lo = *s.start();
        let on: Vec<Rational> = s.map(|x| reward_unchecked(n, n, x, goal)).collect();
        Stage { lo, on_support: on, off_support: Rational::zero(), len: n }
    };

    let mut cont = vec![Rational::zero(); n.saturating_sub(1)];
    let mut stop: Vec<Vec<usize>> = Vec::new();
    if keep {
        stop = vec![Vec::new(); n];
        stop[n - 1] = (1..=n).collect();
    }
    let mut stages: Vec<Stage> = Vec::new();
    let mut next = terminal;

    for j in (1..n).rev() {
        let c = next.sum() / Rational::from_integer((j + 1).into());
        let s = support(n, j, goal);
        let lo = *s.start();
        let mut on = Vec::with_capacity(s.clone().count());
        let mut stop_j = Vec::new();
        for x in s.clone() {
            let r = reward_unchecked(n, j, x, goal);
            if r >= c {
                if keep {
                    stop_j.push(x);
                }
                on.push(r);
            } else {
                on.push(c.clone());
            }
        }
        if keep {
            // Off the support the reward is zero; it only ties when cont is zero.
            if c.is_zero() {
                stop_j = (1..=j).collect();
            }
            stop[j - 1] = stop_j;
        }
        let stage = Stage { lo, on_support: on, off_support: c.clone(), len: j };
        cont[j - 1] = c;
        let prev = std::mem::replace(&mut next, stage);
        if keep {
            stages.push(prev);
        }
    }
    stages.push(next);
    stages.reverse();
    Pass { stages, cont, stop }
}

/// Solves `(n, goal)` exactly, returning the value table and the maximal
/// optimal stage-set policy (`S_j = {x : y_j(x) ≥ cont_j}`).
pub fn solve(n: usize, goal: &Goal) -> Result<(ValueTable, StagePolicy)> {
    check(n, goal)?;
    let pass = backward(n, goal, true);
    let values: Vec<Vec<Rational>> = pass.stages.iter().map(Stage::expand).collect();
    let policy = StagePolicy::new(n, pass.stop).expect("solver emits well-formed stop sets");
    let table = ValueTable { n, goal: goal.clone(), values, cont: pass.cont };
    Ok((table, policy))
}

/// Optimal success probability only, without materializing the table.
pub fn optimal_value(n: usize, goal: &Goal) -> Result<Rational> {
    check(n, goal)?;
    let pass = backward(n, goal, false);
    Ok(pass.stages[0].get(1).clone())
}

/// Thread-safe memo of optimal values keyed by `(n, goal)`.
#[derive(Debug, Default)]
pub struct PValueCache {
    inner: Mutex<HashMap<(usize, Goal), Rational>>,
}

impl PValueCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: usize, goal: &Goal) -> Result<Rational> {
        let key = (n, goal.clone());
        if let Some(v) = self.inner.lock().get(&key) {
            return Ok(v.clone());
        }
        // Solve outside the lock; a racing duplicate computes the same value.
        let v = optimal_value(n, goal)?;
        self.inner.lock().insert(key, v.clone());
        Ok(v)
    }

    /// `p(k, n)`
    pub fn single(&self, k: usize, n: usize) -> Result<Rational> {
        self.get(n, &Goal::SingleRank(k))
    }

    pub fn len(&self) -> usize {
        self.inner.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `p(goal, n) = sup_τ P(R_τ ∈ goal)`, memoized process-wide.
pub fn p_value(n: usize, goal: &Goal) -> Result<Rational> {
    static CACHE: OnceLock<PValueCache> = OnceLock::new();
    CACHE.get_or_init(PValueCache::new).get(n, goal)
}
