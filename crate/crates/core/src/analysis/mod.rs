//! Batch verification suites over exact solutions: optimality of the
//! third-best rule, inequalities between `p(k, n)` values, extremality of
//! rank sets, threshold bounds and limiting behaviour.
//!
//! Every suite returns a serializable report that also renders as a flat
//! table, and exposes a single pass/fail verdict.

mod convergence;
mod gamma;
mod inequalities;
mod stage_bounds;
mod third_best_rule;

pub use convergence::{convergence_report, ConvergenceReport, ConvergenceRow};
pub use gamma::{check_gamma_extremality, check_gamma_extremality_sampled, GammaReport, DEFAULT_SUBSET_BUDGET};
pub use inequalities::{
    check_best_rank_dominance, check_monotonicity_in_n, check_second_beats_third, scan_k_monotonicity, scan_k_ratio,
    DominanceReport, KRatioRow, MonotonicityInNReport, MonotonicityScan, SecondThirdReport, KNOWN_MONOTONICITY_BREAKS,
};
pub use stage_bounds::{
    stage_inequalities, threshold_invariants, StageInequalityReport, StageInequalityRow, ThresholdInvariantReport,
    ThresholdInvariantRow,
};
pub use third_best_rule::{verify_third_best_rule, ThirdBestRuleReport, ThirdBestRuleRow};

use rayon::prelude::*;

use crate::dp_solver::optimal_value;
use crate::error::Result;
use crate::exact_math::Rational;
use crate::reward::Goal;

/// Common surface of every verification report.
pub trait Report {
    fn passed(&self) -> bool;
    fn header(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub(crate) fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// `p(k, n)` for `1 <= k <= n <= n_max`, solved once per symmetric pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PknTable {
    /// `rows[n-1][k-1] = p(k, n)`
    rows: Vec<Vec<Rational>>,
}

impl PknTable {
    pub fn compute(n_max: usize) -> Result<Self> {
        let rows = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let half: Vec<Rational> =
                    (1..=n.div_ceil(2)).map(|k| optimal_value(n, &Goal::SingleRank(k))).collect::<Result<_>>()?;
                // p(k, n) = p(n-k+1, n)
                Ok((1..=n).map(|k| half[k.min(n + 1 - k) - 1].clone()).collect())
            })
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        Ok(Self { rows })
    }

    pub fn n_max(&self) -> usize {
        self.rows.len()
    }

    /// `p(k, n)`
    pub fn p(&self, k: usize, n: usize) -> &Rational {
        &self.rows[n - 1][k - 1]
    }

    pub fn row(&self, n: usize) -> &[Rational] {
        &self.rows[n - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_uses_symmetry_correctly() {
        let t = PknTable::compute(12).unwrap();
        for n in 1..=12 {
            for k in 1..=n {
                assert_eq!(*t.p(k, n), optimal_value(n, &Goal::SingleRank(k)).unwrap());
            }
        }
        assert_eq!(t.row(5).len(), 5);
    }
}
