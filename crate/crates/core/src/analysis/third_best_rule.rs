//! Optimality of the two-threshold third-best rule, checked against the
//! exact dynamic program for every `n` in a range.

use rayon::prelude::*;
use serde::Serialize;

use super::{header, Report};
use crate::closed_form::{k3_thresholds, tau_policy};
use crate::dp_solver::solve;
use crate::error::{Error, Result};
use crate::exact_math::{decimal_string, serde_rational, Rational};
use crate::policy_eval::evaluate;
use crate::reward::Goal;

#[derive(Debug, Clone, Serialize)]
pub struct ThirdBestRuleRow {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    #[serde(with = "serde_rational")]
    pub dp_value: Rational,
    #[serde(with = "serde_rational")]
    pub rule_value: Rational,
    /// Rule value equals the DP value.
    pub value_equal: bool,
    /// DP stop sets contain 2 from stage `a` and 3 from stage `b`.
    pub containment: bool,
    /// DP strictly prefers continuing for ranks 1..3 wherever the rule does.
    pub strict_continuation: bool,
    pub failures: Vec<String>,
}

impl ThirdBestRuleRow {
    pub fn passed(&self) -> bool {
        self.value_equal && self.containment && self.strict_continuation
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThirdBestRuleReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub rows: Vec<ThirdBestRuleRow>,
}

fn check_n(n: usize) -> Result<ThirdBestRuleRow> {
    let goal = Goal::SingleRank(3);
    let t = k3_thresholds(n)?;
    let (a, b) = (t.a, t.b);
    let (table, dp_policy) = solve(n, &goal)?;
    let rule_value = evaluate(n, &goal, &tau_policy(&t.descriptor())?)?;
    let dp_value = table.value().clone();

    let mut failures = Vec::new();
    let mut containment = true;
    let mut strict = true;
    for j in 1..n {
        if j >= a && !dp_policy.accepts(j, 2) {
            containment = false;
            failures.push(format!("stage {j}: 2 not in DP stop set"));
        }
        if j >= b && !dp_policy.accepts(j, 3) {
            containment = false;
            failures.push(format!("stage {j}: 3 not in DP stop set"));
        }
        let must_continue: &[usize] = if j < a {
            &[1, 2, 3]
        } else if j < b {
            &[1, 3]
        } else {
            &[1]
        };
        for &x in must_continue.iter().filter(|&&x| x <= j) {
            if dp_policy.accepts(j, x) {
                strict = false;
                failures.push(format!("stage {j}: DP stops on {x}"));
            }
        }
    }
    let value_equal = rule_value == dp_value;
    if !value_equal {
        failures.push("rule value differs from DP value".into());
    }
    Ok(ThirdBestRuleRow {
        n,
        a,
        b,
        dp_value,
        rule_value,
        value_equal,
        containment,
        strict_continuation: strict,
        failures,
    })
}

/// Checks the third-best rule against the DP for `n_lo <= n <= n_hi`.
pub fn verify_third_best_rule(n_lo: usize, n_hi: usize) -> Result<ThirdBestRuleReport> {
    if n_lo < 3 || n_lo > n_hi {
        return Err(Error::OutOfRange(format!("need 3 <= from <= to, got {n_lo}..={n_hi}")));
    }
    let rows = (n_lo..=n_hi).into_par_iter().map(check_n).collect::<Result<Vec<_>>>()?;
    Ok(ThirdBestRuleReport { n_lo, n_hi, rows })
}

impl Report for ThirdBestRuleReport {
    fn passed(&self) -> bool {
        self.rows.iter().all(ThirdBestRuleRow::passed)
    }

    fn header(&self) -> Vec<String> {
        header(&[
            "n",
            "a",
            "b",
            "value_num",
            "value_den",
            "value_decimal",
            "value_equal",
            "containment",
            "strict_continuation",
            "passed",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.a.to_string(),
                    r.b.to_string(),
                    r.dp_value.numer().to_string(),
                    r.dp_value.denom().to_string(),
                    decimal_string(&r.dp_value, 15),
                    r.value_equal.to_string(),
                    r.containment.to_string(),
                    r.strict_continuation.to_string(),
                    r.passed().to_string(),
                ]
            })
            .collect()
    }
}
