//! Explicit threshold rules and success probabilities for k = 1, 2, 3, and
//! the limiting constants for the third-best problem.
//!
//! For k = 3 the optimal rule is two-threshold: from stage `a` accept a
//! relative rank of 2, from stage `b` also accept a relative rank of 3.
//!
//! ```text
//! b   = min{ j in 2..n : Σ_{i=j+1}^n 1/(i-2) <= 1/2 }
//! u   = (b-2)(2n-4) Σ_{i=b}^n 1/(i-2)
//! f(x) = 3x² - (1+4n)x + (n-2)b + 2(n+1) + u
//! a   = min{ j in 2..n : f(j) <= 0 }
//! ```
//!
//! `a` is found by an exact integer scan of `f`, never through the
//! quadratic root formula.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_math::{harmonic_shift_sum, serde_rational, Rational};
use crate::policy::StagePolicy;
use crate::reward::reward_k3;

fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn qi(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Smallest `j` in `lo..=n` with `Σ_{i=j+1}^n 1/(i - shift) <= bound`.
///
/// Walks down from `j = n` (empty sum) keeping the tail sum as an unreduced
/// fraction, so every comparison is exact and cheap.
fn tail_threshold(n: i64, lo: i64, shift: i64, bound: &Rational) -> i64 {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    let (bn, bd) = (bound.numer(), bound.denom());
    let mut j = n;
    while j > lo {
        // tail(j-1) = tail(j) + 1/(j - shift)
        let d = j - shift;
        num = num * d + &den;
        den *= d;
        // tail(j-1) <= bn/bd  <=>  num*bd <= bn*den
        if &num * bd > bn * &den {
            return j;
        }
        j -= 1;
    }
    lo
}

/// Threshold of the classical best-choice rule.
pub fn r_threshold(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooSmall { what: "r_threshold", n, min: 2 });
    }
    Ok(tail_threshold(n as i64, 1, 1, &Rational::one()) as usize)
}

/// `p(1, n) = (r-1)/n · Σ_{i=r}^n 1/(i-1)`; `1/n` when `r = 1`.
pub fn p1(n: usize) -> Result<Rational> {
    let r = r_threshold(n)? as i64;
    let n = n as i64;
    if r == 1 {
        // (r-1)·1/(r-1) at the degenerate threshold: stop at once.
        return Ok(q(1, n));
    }
    Ok(q(r - 1, n) * harmonic_shift_sum(r, n, 1)?)
}

/// `⌈(n+1)/2⌉`
pub fn rprime_threshold(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooSmall { what: "rprime_threshold", n, min: 2 });
    }
    Ok((n + 2) / 2)
}

/// `p(2, n) = (r'-1)(n-r'+1) / (n(n-1))`
pub fn p2(n: usize) -> Result<Rational> {
    let r = rprime_threshold(n)? as i64;
    let n = n as i64;
    Ok(q((r - 1) * (n - r + 1), n * (n - 1)))
}

/// Thresholds and auxiliary quantities of the third-best rule for one `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K3Thresholds {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    #[serde(with = "serde_rational")]
    pub u: Rational,
}

impl K3Thresholds {
    pub fn compute(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooSmall { what: "k3_thresholds", n, min: 3 });
        }
        let ni = n as i64;
        let b = tail_threshold(ni, 2, 2, &q(1, 2));
        let u = qi((b - 2) * (2 * ni - 4)) * harmonic_shift_sum(b, ni, 2)?;
        // f(x) <= 0  <=>  P(x)·den(u) + num(u) <= 0 with P the integer part.
        let (un, ud) = (u.numer().clone(), u.denom().clone());
        let a = (2..=ni)
            .find(|&x| {
                let p = 3 * x * x - (1 + 4 * ni) * x + (ni - 2) * b + 2 * (ni + 1);
                BigInt::from(p) * &ud + &un <= BigInt::zero()
            })
            .ok_or_else(|| Error::NoThreshold(format!("f_{n} stays positive on 2..={n}")))?;
        Ok(Self { n, a: a as usize, b: b as usize, u })
    }

    /// Coefficients `(3, -(1+4n), (n-2)b + 2(n+1) + u)` of `f`.
    pub fn f_coeffs(&self) -> (i64, i64, Rational) {
        let (n, b) = (self.n as i64, self.b as i64);
        (3, -(1 + 4 * n), qi((n - 2) * b + 2 * (n + 1)) + &self.u)
    }

    /// `f(x) = 3x² - (1+4n)x + (n-2)b + 2(n+1) + u`
    pub fn f(&self, x: i64) -> Rational {
        let (n, b) = (self.n as i64, self.b as i64);
        qi(3 * x * x - (1 + 4 * n) * x + (n - 2) * b + 2 * (n + 1)) + &self.u
    }

    fn denom(&self) -> i64 {
        let n = self.n as i64;
        n * (n - 1) * (n - 2)
    }

    /// Success probability of the rule from stage 1 (the `j < a` branch of `h`).
    pub fn c(&self) -> Rational {
        let (n, a, b) = (self.n as i64, self.a as i64, self.b as i64);
        let poly = qi(a * a - (1 + 2 * n) * a + (n - 2) * b + 2 * (n + 1)) + &self.u;
        qi(a - 1) * poly / qi(self.denom())
    }

    /// Middle-band continuation `j[j² + (1-2n)j + (n-2)b + 2 + u] / D`.
    fn middle(&self, j: i64) -> Rational {
        let (n, b) = (self.n as i64, self.b as i64);
        let poly = qi(j * j + (1 - 2 * n) * j + (n - 2) * b + 2) + &self.u;
        qi(j) * poly / qi(self.denom())
    }

    /// Late-band continuation `j(j-1)/D · [(2n-4) Σ_{i=j+1}^n 1/(i-2) - (n-j)]`.
    fn late(&self, j: i64) -> Result<Rational> {
        let tail = harmonic_shift_sum(j + 1, self.n as i64, 2)?;
        Ok(self.late_with_tail(j, &tail))
    }

    fn late_with_tail(&self, j: i64, tail: &Rational) -> Rational {
        let n = self.n as i64;
        q(j * (j - 1), self.denom()) * (qi(2 * n - 4) * tail - qi(n - j))
    }

    /// All stage averages, `averages[j-1]` for `1 <= j < n`, sharing one
    /// backward pass over the tail sums.
    pub fn h_stage_averages(&self) -> Vec<Rational> {
        let n = self.n;
        let mut out = vec![Rational::zero(); n - 1];
        let mut tail = Rational::zero();
        let c = self.c();
        for j in (1..n).rev() {
            // tail = Σ_{i=j+1}^n 1/(i-2); extend by the i = j+1 term.
            // Only the late band (j >= b >= 3) reads it.
            if j >= 2 {
                tail += q(1, j as i64 - 1);
            }
            out[j - 1] = if j < self.a {
                c.clone()
            } else if j < self.b {
                self.middle(j as i64)
            } else {
                self.late_with_tail(j as i64, &tail)
            };
        }
        out
    }

    /// Full table `rows[j-1][x-1] = h_j(x)`.
    pub fn h_rows(&self) -> Result<Vec<Vec<Rational>>> {
        let n = self.n;
        let avg = self.h_stage_averages();
        (1..=n)
            .map(|j| {
                (1..=j)
                    .map(|x| {
                        if j < n && !(j >= self.a && x == 2) && !(j >= self.b && x == 3) {
                            // Not accepted at stage j: matches the continuation.
                            Ok(avg[j - 1].clone())
                        } else {
                            self.h(j, x)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Conditional success probability `h_j(x)` of the rule used from stage
    /// `j` on, given relative rank `x` at stage `j`.
    pub fn h(&self, j: usize, x: usize) -> Result<Rational> {
        let n = self.n;
        if x == 0 || x > j || j > n {
            return Err(Error::OutOfRange(format!("h_{j}({x}) with n={n}")));
        }
        if j < self.a {
            Ok(self.c())
        } else if x == 2 {
            reward_k3(n, j, 2)
        } else if j < self.b {
            Ok(self.middle(j as i64))
        } else if x == 3 {
            reward_k3(n, j, 3)
        } else {
            self.late(j as i64)
        }
    }

    /// `(1/(j+1)) Σ_{i=1}^{j+1} h_{j+1}(i)` for `1 <= j < n`, in closed form.
    pub fn h_stage_average(&self, j: usize) -> Result<Rational> {
        if j == 0 || j >= self.n {
            return Err(Error::OutOfRange(format!("stage average at j={j} with n={}", self.n)));
        }
        if j < self.a {
            Ok(self.c())
        } else if j < self.b {
            Ok(self.middle(j as i64))
        } else {
            self.late(j as i64)
        }
    }

    pub fn descriptor(&self) -> ThresholdPolicyDescriptor {
        ThresholdPolicyDescriptor { n: self.n, kind: ThresholdKind::ThirdBest { a: self.a, b: self.b } }
    }
}

/// Memoized [`K3Thresholds::compute`].
pub fn k3_thresholds(n: usize) -> Result<Arc<K3Thresholds>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, Arc<K3Thresholds>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(t) = memo.lock().get(&n) {
        return Ok(t.clone());
    }
    let t = Arc::new(K3Thresholds::compute(n)?);
    memo.lock().insert(n, t.clone());
    Ok(t)
}

/// `h_j(x)` for the third-best rule on `n` candidates.
pub fn h_value(n: usize, j: usize, x: usize) -> Result<Rational> {
    k3_thresholds(n)?.h(j, x)
}

/// `p(3, n) = h_1(1)`
pub fn p3(n: usize) -> Result<Rational> {
    Ok(k3_thresholds(n)?.c())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Accept relative rank 1 from stage `r`.
    BestChoice { r: usize },
    /// Accept relative rank 2 from stage `r`.
    Postdoc { r: usize },
    /// Accept relative rank 2 from stage `a`, and also 3 from stage `b`.
    ThirdBest { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdPolicyDescriptor {
    pub n: usize,
    pub kind: ThresholdKind,
}

impl ThresholdPolicyDescriptor {
    /// The optimal best-choice rule for `n`.
    pub fn best_choice(n: usize) -> Result<Self> {
        Ok(Self { n, kind: ThresholdKind::BestChoice { r: r_threshold(n)? } })
    }

    /// The optimal second-best rule for `n`.
    pub fn postdoc(n: usize) -> Result<Self> {
        Ok(Self { n, kind: ThresholdKind::Postdoc { r: rprime_threshold(n)? } })
    }

    /// The optimal third-best rule for `n`.
    pub fn third_best(n: usize) -> Result<Self> {
        Ok(k3_thresholds(n)?.descriptor())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let in_range = |t: usize| (1..=n).contains(&t);
        let ok = match self.kind {
            ThresholdKind::BestChoice { r } | ThresholdKind::Postdoc { r } => in_range(r),
            ThresholdKind::ThirdBest { a, b } => in_range(a) && in_range(b) && a < b,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPolicy(format!("bad threshold descriptor {self:?}")))
        }
    }
}

/// Compiles a threshold rule into per-stage acceptance sets.
pub fn tau_policy(desc: &ThresholdPolicyDescriptor) -> Result<StagePolicy> {
    desc.validate()?;
    let policy = match desc.kind {
        ThresholdKind::BestChoice { r } => StagePolicy::from_fn(desc.n, |j, x| j >= r && x == 1),
        ThresholdKind::Postdoc { r } => StagePolicy::from_fn(desc.n, |j, x| j >= r && x == 2),
        ThresholdKind::ThirdBest { a, b } => {
            StagePolicy::from_fn(desc.n, |j, x| (j >= a && x == 2) || (j >= b && x == 3))
        }
    };
    Ok(policy)
}

/// Limits of `a_n/n`, `b_n/n` and `p(3, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub d1: f64,
    pub d2: f64,
    pub p3_inf: f64,
}

pub fn asymptotic_constants() -> AsymptoticConstants {
    let sqrt_e = std::f64::consts::E.sqrt();
    let root = (4.0 * std::f64::consts::E - 6.0 * sqrt_e).sqrt();
    let d1 = 2.0 / (2.0 * sqrt_e + root);
    let d2 = 1.0 / sqrt_e;
    AsymptoticConstants { d1, d2, p3_inf: 2.0 * d1 * d1 * (1.0 - d1) }
}

/// Rational bracket `lo < e^{-1/2} < hi` from consecutive partial sums of
/// the alternating series `Σ (-1/2)^k / k!`.
pub fn inv_sqrt_e_bracket(terms: usize) -> (Rational, Rational) {
    let terms = terms.max(2);
    let mut term = Rational::one();
    let mut partial = Rational::one();
    let mut prev = partial.clone();
    for k in 1..=terms {
        term *= q(-1, 2 * k as i64);
        prev = partial.clone();
        partial += &term;
    }
    if prev < partial {
        (prev, partial)
    } else {
        (partial, prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp_solver::optimal_value;
    use crate::exact_math::to_f64;
    use crate::reward::Goal;

    #[test]
    fn best_choice_examples() {
        assert_eq!(r_threshold(3).unwrap(), 2);
        assert_eq!(p1(3).unwrap(), q(1, 2));
        assert_eq!(r_threshold(4).unwrap(), 2);
        assert_eq!(p1(4).unwrap(), q(11, 24));
        assert_eq!(r_threshold(2).unwrap(), 1);
        assert_eq!(p1(2).unwrap(), q(1, 2));
        assert!(r_threshold(1).is_err());
        // Σ_{i=j+1}^{n} 1/(i-1) <= 1 first holds at j = 4 for n = 10
        assert_eq!(r_threshold(10).unwrap(), 4);
    }

    #[test]
    fn postdoc_examples() {
        assert_eq!(rprime_threshold(5).unwrap(), 3);
        assert_eq!(p2(5).unwrap(), q(3, 10));
        assert_eq!(rprime_threshold(4).unwrap(), 3);
        assert_eq!(p2(4).unwrap(), q(1, 3));
        assert!(p2(1).is_err());
    }

    #[test]
    fn third_best_thresholds() {
        let t = k3_thresholds(13).unwrap();
        assert_eq!((t.a, t.b), (7, 9));
        assert_eq!(k3_thresholds(3).unwrap().b, 3);
        assert_eq!(k3_thresholds(32).unwrap().b, 20);
        assert!(k3_thresholds(2).is_err());
    }

    #[test]
    fn b32_is_a_near_tie() {
        // Σ_{i=21}^{32} 1/(i-2) sits just under 1/2; Σ_{i=20}^{32} is above it.
        let at = harmonic_shift_sum(21, 32, 2).unwrap();
        assert!(at <= q(1, 2));
        assert!(to_f64(&at) > 0.49);
        assert!(harmonic_shift_sum(20, 32, 2).unwrap() > q(1, 2));
    }

    #[test]
    fn u_definition() {
        let t = k3_thresholds(13).unwrap();
        let expect = qi(7 * 22) * harmonic_shift_sum(9, 13, 2).unwrap();
        assert_eq!(t.u, expect);
        assert_eq!(t.u, q(15797, 180));
        let (a2, a1, a0) = t.f_coeffs();
        assert_eq!((a2, a1), (3, -53));
        assert_eq!(a0, qi(11 * 9 + 28) + &t.u);
    }

    #[test]
    fn h_first_case_and_p3() {
        let t = k3_thresholds(13).unwrap();
        assert_eq!(h_value(13, 1, 1).unwrap(), t.c());
        assert_eq!(p3(13).unwrap(), q(13457, 51480));
        assert_eq!(p3(3).unwrap(), q(1, 2));
        let t40 = k3_thresholds(40).unwrap();
        assert_eq!(h_value(40, t40.a, 2).unwrap(), reward_k3(40, t40.a, 2).unwrap());
        assert!(h_value(13, 3, 4).is_err());
        assert!(h_value(13, 14, 1).is_err());
    }

    #[test]
    fn h_tables_agree_with_pointwise_formulas() {
        for n in [3usize, 4, 13, 32, 57] {
            let t = K3Thresholds::compute(n).unwrap();
            let rows = t.h_rows().unwrap();
            let avg = t.h_stage_averages();
            for j in 1..=n {
                for x in 1..=j {
                    assert_eq!(rows[j - 1][x - 1], t.h(j, x).unwrap(), "n={n} j={j} x={x}");
                }
                if j < n {
                    assert_eq!(avg[j - 1], t.h_stage_average(j).unwrap());
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_dp_small() {
        for n in 2..=40 {
            assert_eq!(p1(n).unwrap(), optimal_value(n, &Goal::SingleRank(1)).unwrap(), "p1 n={n}");
            assert_eq!(p2(n).unwrap(), optimal_value(n, &Goal::SingleRank(2)).unwrap(), "p2 n={n}");
            if n >= 3 {
                assert_eq!(p3(n).unwrap(), optimal_value(n, &Goal::SingleRank(3)).unwrap(), "p3 n={n}");
            }
        }
    }

    #[test]
    fn tau_compilations() {
        let p =
            tau_policy(&ThresholdPolicyDescriptor { n: 13, kind: ThresholdKind::ThirdBest { a: 7, b: 9 } }).unwrap();
        assert!(p.is_empty_at(6));
        assert_eq!(p.stop_set(7), vec![2]);
        assert_eq!(p.stop_set(9), vec![2, 3]);
        assert_eq!(p.stop_set(13), (1..=13).collect::<Vec<_>>());

        let p = tau_policy(&ThresholdPolicyDescriptor { n: 3, kind: ThresholdKind::BestChoice { r: 2 } }).unwrap();
        assert!(p.is_empty_at(1));
        assert_eq!(p.stop_set(2), vec![1]);
        assert_eq!(p.stop_set(3), vec![1, 2, 3]);

        let p = tau_policy(&ThresholdPolicyDescriptor::postdoc(5).unwrap()).unwrap();
        assert!(p.is_empty_at(1) && p.is_empty_at(2));
        assert_eq!(p.stop_set(3), vec![2]);
        assert_eq!(p.stop_set(4), vec![2]);
        assert_eq!(p.stop_set(5), vec![1, 2, 3, 4, 5]);

        let bad = ThresholdPolicyDescriptor { n: 10, kind: ThresholdKind::ThirdBest { a: 6, b: 6 } };
        assert!(tau_policy(&bad).is_err());
        let bad = ThresholdPolicyDescriptor { n: 10, kind: ThresholdKind::BestChoice { r: 11 } };
        assert!(tau_policy(&bad).is_err());
    }

    #[test]
    fn constants() {
        let c = asymptotic_constants();
        assert!((c.d2 - (-0.5f64).exp()).abs() < 1e-15);
        assert!((c.d2 - 0.6065306597126334).abs() < 1e-12);
        assert!((c.d1 - 0.466).abs() < 1e-3);
        assert!((c.p3_inf - 0.232).abs() < 1e-3);
        // second closed form of the limit
        let s = std::f64::consts::E.sqrt();
        let root = (4.0 * std::f64::consts::E - 6.0 * s).sqrt();
        let alt = 8.0 * (2.0 * s - 2.0 + root) / (2.0 * s + root).powi(3);
        assert!((c.p3_inf - alt).abs() < 1e-12);
        // and d1(d1² - 2d1 + 2d2)
        assert!((c.p3_inf - c.d1 * (c.d1 * c.d1 - 2.0 * c.d1 + 2.0 * c.d2)).abs() < 1e-12);
    }

    #[test]
    fn inv_sqrt_e_bracket_is_tight() {
        let (lo, hi) = inv_sqrt_e_bracket(30);
        assert!(lo < hi);
        let target = (-0.5f64).exp();
        assert!(to_f64(&lo) <= target && target <= to_f64(&hi));
        assert!(to_f64(&(&hi - &lo)) < 1e-30);
    }
}
