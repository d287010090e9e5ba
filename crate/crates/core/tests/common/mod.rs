//! Brute-force oracle: enumerates every candidate order and every
//! stage-set policy, with no use of the reward formula or independence of
//! relative ranks.

#![allow(dead_code)]

use itertools::Itertools;
use kthstop_core::Rational;
use num_bigint::BigInt;

/// One candidate order: absolute ranks and their relative ranks.
pub struct Order {
    pub absolute: Vec<usize>,
    pub relative: Vec<usize>,
}

pub fn all_orders(n: usize) -> Vec<Order> {
    (1..=n)
        .permutations(n)
        .map(|absolute| {
            let relative = (0..n).map(|j| absolute[..=j].iter().filter(|&&r| r <= absolute[j]).count()).collect();
            Order { absolute, relative }
        })
        .collect()
}

/// Largest number of orders won by any stage-set policy, found by trying
/// every acceptance set at every stage.
fn best_wins(orders: &[&Order], j: usize, n: usize, goal: &[usize]) -> usize {
    let wins_here = |o: &&&Order| goal.contains(&o.absolute[j]);
    if j == n - 1 {
        return orders.iter().filter(wins_here).count();
    }
    // Bucket the survivors by relative rank at this stage.
    let mut buckets: Vec<Vec<&Order>> = vec![Vec::new(); j + 1];
    for &o in orders {
        buckets[o.relative[j] - 1].push(o);
    }
    let hits: Vec<usize> = buckets.iter().map(|b| b.iter().filter(wins_here).count()).collect();
    let mut best = 0;
    for mask in 0u32..(1 << (j + 1)) {
        let mut stopped = 0;
        let mut rest: Vec<&Order> = Vec::new();
        for (x, bucket) in buckets.iter().enumerate() {
            if mask >> x & 1 == 1 {
                stopped += hits[x];
            } else {
                rest.extend_from_slice(bucket);
            }
        }
        let total = stopped + if rest.is_empty() { 0 } else { best_wins(&rest, j + 1, n, goal) };
        best = best.max(total);
    }
    best
}

/// Optimal success probability over all stage-set policies, by exhaustion.
pub fn brute_force_value(n: usize, goal: &[usize]) -> Rational {
    let orders = all_orders(n);
    let refs: Vec<&Order> = orders.iter().collect();
    let wins = best_wins(&refs, 0, n, goal);
    Rational::new(BigInt::from(wins), BigInt::from(orders.len()))
}
