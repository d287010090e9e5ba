//! Exact success probability of an arbitrary stage-set policy.
//!
//! Relative ranks are independent and `X_j` is uniform on `{1..j}`, so
//!
//! ```text
//! P(success) = Σ_j  Π_{i<j} (1 - |S_i|/i)  ·  Σ_{x ∈ S_j} (1/j) · y_j(x)
//! ```

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_math::Rational;
use crate::policy::StagePolicy;
use crate::reward::{reward_unchecked, support, Goal};

fn check(n: usize, goal: &Goal, policy: &StagePolicy) -> Result<()> {
    if policy.n() != n {
        return Err(Error::DimensionMismatch { policy: policy.n(), problem: n });
    }
    goal.validate(n)
}

fn qu(v: usize) -> Rational {
    Rational::from_integer(v.into())
}

/// `Σ_{x ∈ S_j} y_j(x)`, skipping ranks whose reward is zero.
fn accepted_reward(n: usize, j: usize, goal: &Goal, policy: &StagePolicy) -> Rational {
    support(n, j, goal).filter(|&x| policy.accepts(j, x)).map(|x| reward_unchecked(n, j, x, goal)).sum()
}

/// Success probability of `policy` for `goal` among `n` candidates.
pub fn evaluate(n: usize, goal: &Goal, policy: &StagePolicy) -> Result<Rational> {
    check(n, goal, policy)?;
    let mut survival = Rational::one();
    let mut total = Rational::zero();
    for j in 1..=n {
        let stops = policy.stop_count(j);
        if stops > 0 {
            let gain = accepted_reward(n, j, goal, policy);
            if !gain.is_zero() {
                total += &survival * gain / qu(j);
            }
        }
        if stops == j {
            break;
        }
        survival = survival * qu(j - stops) / qu(j);
    }
    Ok(total)
}

/// Conditional success probabilities of a fixed policy from every stage.
#[derive(Debug, Clone)]
pub struct ConditionalValues {
    n: usize,
    goal: Goal,
    policy: StagePolicy,
    /// `cont[j-1]`: success probability after rejecting at stage `j < n`.
    cont: Vec<Rational>,
}

impl ConditionalValues {
    /// Value of following the policy from stage `j` given `X_j = x`.
    pub fn get(&self, j: usize, x: usize) -> Result<Rational> {
        if x == 0 || x > j || j > self.n {
            return Err(Error::OutOfRange(format!("stage {j}, rank {x}, n={}", self.n)));
        }
        if self.policy.accepts(j, x) {
            Ok(reward_unchecked(self.n, j, x, &self.goal))
        } else {
            Ok(self.cont[j - 1].clone())
        }
    }

    /// Value of rejecting at stage `j < n`: `(1/(j+1)) Σ_i get(j+1, i)`.
    pub fn continuation(&self, j: usize) -> &Rational {
        &self.cont[j - 1]
    }
}

/// Backward pass computing every continuation value of `policy`.
pub fn conditional_values(n: usize, goal: &Goal, policy: &StagePolicy) -> Result<ConditionalValues> {
    check(n, goal, policy)?;
    let mut cont = vec![Rational::zero(); n.saturating_sub(1)];
    // next_cont: continuation after stage j+1 (unused at j+1 = n, which always stops)
    let mut next_cont = Rational::zero();
    for j in (1..n).rev() {
        let stage = j + 1;
        let stops = policy.stop_count(stage);
        let mut sum = accepted_reward(n, stage, goal, policy);
        if stops < stage {
            sum += &next_cont * qu(stage - stops);
        }
        let c = sum / qu(stage);
        cont[j - 1] = c.clone();
        next_cont = c;
    }
    Ok(ConditionalValues { n, goal: goal.clone(), policy: policy.clone(), cont })
}

/// Success probability when `policy` is used from stage `j` on and `X_j = x`.
pub fn conditional_value(n: usize, goal: &Goal, policy: &StagePolicy, j: usize, x: usize) -> Result<Rational> {
    conditional_values(n, goal, policy)?.get(j, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{h_value, k3_thresholds, p2, tau_policy, ThresholdPolicyDescriptor};
    use crate::dp_solver::{optimal_value, solve};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn stop_at_n_gives_one_over_n() {
        for n in 1..=12 {
            for k in 1..=n {
                let v = evaluate(n, &Goal::SingleRank(k), &StagePolicy::stop_at_n(n)).unwrap();
                assert_eq!(v, q(1, n as i64));
            }
        }
    }

    #[test]
    fn third_best_rule_at_13() {
        let tau = tau_policy(&ThresholdPolicyDescriptor::third_best(13).unwrap()).unwrap();
        let goal = Goal::SingleRank(3);
        assert_eq!(evaluate(13, &goal, &tau).unwrap(), optimal_value(13, &goal).unwrap());
        assert_eq!(conditional_value(13, &goal, &tau, 8, 1).unwrap(), h_value(13, 8, 1).unwrap());
    }

    #[test]
    fn postdoc_rule_and_its_variant() {
        let n = 6;
        let goal = Goal::SingleRank(2);
        let desc = ThresholdPolicyDescriptor::postdoc(n).unwrap();
        let tau = tau_policy(&desc).unwrap();
        let r = 4; // ⌈7/2⌉
        let variant = tau.with_rank(r - 1, 1, true).unwrap();
        assert_ne!(tau, variant);
        assert_eq!(evaluate(n, &goal, &tau).unwrap(), p2(n).unwrap());
        assert_eq!(evaluate(n, &goal, &variant).unwrap(), p2(n).unwrap());
        assert_eq!(p2(n).unwrap(), optimal_value(n, &goal).unwrap());
    }

    #[test]
    fn h_closed_form_matches_conditional_values_n40() {
        let t = k3_thresholds(40).unwrap();
        let tau = tau_policy(&t.descriptor()).unwrap();
        let cv = conditional_values(40, &Goal::SingleRank(3), &tau).unwrap();
        for j in 1..=40 {
            for x in 1..=j {
                assert_eq!(cv.get(j, x).unwrap(), t.h(j, x).unwrap(), "j={j} x={x}");
            }
            if j < 40 {
                assert_eq!(*cv.continuation(j), t.h_stage_average(j).unwrap());
            }
        }
    }

    #[test]
    fn conditional_matches_evaluate_and_terminal() {
        let n = 9;
        let goal = Goal::rank_set([2, 5]);
        let policy = StagePolicy::from_fn(n, |j, x| j >= 4 && x <= 2);
        let cv = conditional_values(n, &goal, &policy).unwrap();
        assert_eq!(cv.get(1, 1).unwrap(), evaluate(n, &goal, &policy).unwrap());
        for x in 1..=n {
            let expect = if goal.contains(x) { Rational::one() } else { Rational::zero() };
            assert_eq!(cv.get(n, x).unwrap(), expect);
        }
        assert!(cv.get(3, 4).is_err());
    }

    fn random_policy(n: usize, rng: &mut impl Rng) -> StagePolicy {
        let density: f64 = rng.random();
        StagePolicy::from_fn(n, |_, _| rng.random_bool(density * 0.5))
    }

    #[test]
    fn tower_property_random_policies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(2..=15);
            let k = rng.random_range(1..=n);
            let goal = Goal::SingleRank(k);
            let policy = random_policy(n, &mut rng);
            let cv = conditional_values(n, &goal, &policy).unwrap();
            for j in 1..n {
                let avg: Rational = (1..=j + 1).map(|i| cv.get(j + 1, i).unwrap()).sum::<Rational>() / qu(j + 1);
                for x in (1..=j).filter(|&x| !policy.accepts(j, x)) {
                    assert_eq!(cv.get(j, x).unwrap(), avg);
                }
            }
            assert_eq!(cv.get(1, 1).unwrap(), evaluate(n, &goal, &policy).unwrap());
        }
    }

    #[test]
    fn dp_dominates_random_policies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for n in [2usize, 3, 5, 8, 13, 21, 30] {
            for goal in [Goal::SingleRank(1), Goal::SingleRank(n.div_ceil(2)), Goal::top(n.min(2))] {
                let (table, opt) = solve(n, &goal).unwrap();
                assert_eq!(evaluate(n, &goal, &opt).unwrap(), *table.value());
                for _ in 0..200 {
                    let p = random_policy(n, &mut rng);
                    assert!(evaluate(n, &goal, &p).unwrap() <= *table.value());
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = StagePolicy::stop_at_n(4);
        assert!(matches!(
            evaluate(5, &Goal::SingleRank(1), &p),
            Err(Error::DimensionMismatch { policy: 4, problem: 5 })
        ));
        assert!(evaluate(4, &Goal::SingleRank(5), &p).is_err());
    }
}
