//! Exact checks of the threshold bounds and of the inequalities that make
//! the third-best rule satisfy the optimality equation.

use rayon::prelude::*;
use serde::Serialize;

use super::{header, Report};
use crate::closed_form::{inv_sqrt_e_bracket, K3Thresholds};
use crate::error::{Error, Result};
use crate::exact_math::{decimal_string, harmonic_shift_sum, serde_rational, Rational};
use crate::reward::reward_k3;

fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn qi(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Threshold-level facts for one `n`. Bound fields are `None` below 32,
/// where they are not claimed.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdInvariantRow {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    #[serde(with = "serde_rational")]
    pub u: Rational,
    pub a_below_b: bool,
    /// `a_n <= a_{n+1} <= a_n + 1` and likewise for `b`.
    pub staircase: bool,
    /// `f(a) <= 0 < f(a-1)`
    pub f_bracket: bool,
    /// `Σ_{i=b+1}^n 1/(i-2) <= 1/2 < Σ_{i=b}^n 1/(i-2)`
    pub b_bracket: bool,
    /// `(n-1)/√e + 1 < b < (n-3/2)/√e + 5/2`, with `1/√e` replaced by a
    /// rational enclosure so the comparison is conservative.
    pub b_sqrt_e_bounds: Option<bool>,
    /// `(n+5)/2 < b < (2n-1)/3`
    pub b_linear_bounds: Option<bool>,
    /// `(b-2)(n-2) < u <= b(n-2)`
    pub u_bounds: Option<bool>,
    /// `f(b) < 0`, i.e. `b` lies strictly between the roots of `f`.
    pub b_inside_roots: Option<bool>,
    /// `a > (n+4)/3`
    pub a_lower_bound: Option<bool>,
}

impl ThresholdInvariantRow {
    pub fn passed(&self) -> bool {
        let opt = |o: Option<bool>| o.unwrap_or(true);
        self.a_below_b
            && self.staircase
            && self.f_bracket
            && self.b_bracket
            && opt(self.b_sqrt_e_bounds)
            && opt(self.b_linear_bounds)
            && opt(self.u_bounds)
            && opt(self.b_inside_roots)
            && opt(self.a_lower_bound)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdInvariantReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub rows: Vec<ThresholdInvariantRow>,
}

fn threshold_row(
    t: &K3Thresholds,
    next: &K3Thresholds,
    sqrt_bracket: &(Rational, Rational),
) -> Result<ThresholdInvariantRow> {
    let (n, a, b) = (t.n as i64, t.a as i64, t.b as i64);
    let half = q(1, 2);
    let b_bracket = harmonic_shift_sum(b + 1, n, 2)? <= half && (b == 2 || harmonic_shift_sum(b, n, 2)? > half);
    let f_bracket = t.f(a) <= qi(0) && t.f(a - 1) > qi(0);
    let staircase = t.a <= next.a && next.a <= t.a + 1 && t.b <= next.b && next.b <= t.b + 1;

    let large = n >= 32;
    let when = |cond: bool| large.then_some(cond);
    let bq = qi(b);
    let (lo, hi) = sqrt_bracket;
    let b_sqrt_e_bounds = when(bq > qi(n - 1) * hi + qi(1) && bq < (qi(n) - half.clone()) * lo + q(5, 2));
    let b_linear_bounds = when(bq > q(n + 5, 2) && bq < q(2 * n - 1, 3));
    let u_bounds = when(t.u > qi((b - 2) * (n - 2)) && t.u <= qi(b * (n - 2)));
    let b_inside_roots = when(t.f(b) < qi(0));
    let a_lower_bound = when(qi(a) > q(n + 4, 3));

    Ok(ThresholdInvariantRow {
        n: t.n,
        a: t.a,
        b: t.b,
        u: t.u.clone(),
        a_below_b: a < b,
        staircase,
        f_bracket,
        b_bracket,
        b_sqrt_e_bounds,
        b_linear_bounds,
        u_bounds,
        b_inside_roots,
        a_lower_bound,
    })
}

/// Threshold facts for every `n_lo <= n <= n_hi` (staircase uses `n_hi + 1`).
pub fn threshold_invariants(n_lo: usize, n_hi: usize) -> Result<ThresholdInvariantReport> {
    if n_lo < 3 || n_lo > n_hi {
        return Err(Error::OutOfRange(format!("need 3 <= from <= to, got {n_lo}..={n_hi}")));
    }
    let bracket = inv_sqrt_e_bracket(40);
    let thresholds: Vec<K3Thresholds> =
        (n_lo..=n_hi + 1).into_par_iter().map(K3Thresholds::compute).collect::<Result<_>>()?;
    let rows = thresholds.par_windows(2).map(|w| threshold_row(&w[0], &w[1], &bracket)).collect::<Result<Vec<_>>>()?;
    Ok(ThresholdInvariantReport { n_lo, n_hi, rows })
}

impl Report for ThresholdInvariantReport {
    fn passed(&self) -> bool {
        self.rows.iter().all(ThresholdInvariantRow::passed)
    }

    fn header(&self) -> Vec<String> {
        header(&[
            "n",
            "a",
            "b",
            "u_num",
            "u_den",
            "u_decimal",
            "a_below_b",
            "staircase",
            "f_bracket",
            "b_bracket",
            "b_sqrt_e_bounds",
            "b_linear_bounds",
            "u_bounds",
            "b_inside_roots",
            "a_lower_bound",
            "passed",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let opt = |o: Option<bool>| o.map_or_else(String::new, |b| b.to_string());
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.a.to_string(),
                    r.b.to_string(),
                    r.u.numer().to_string(),
                    r.u.denom().to_string(),
                    decimal_string(&r.u, 15),
                    r.a_below_b.to_string(),
                    r.staircase.to_string(),
                    r.f_bracket.to_string(),
                    r.b_bracket.to_string(),
                    opt(r.b_sqrt_e_bounds),
                    opt(r.b_linear_bounds),
                    opt(r.u_bounds),
                    opt(r.b_inside_roots),
                    opt(r.a_lower_bound),
                    r.passed().to_string(),
                ]
            })
            .collect()
    }
}

/// Stage-wise inequalities between stopping rewards and the closed-form
/// continuation `(1/(j+1)) Σ h_{j+1}(i)` for one `n`.
#[derive(Debug, Clone, Serialize)]
pub struct StageInequalityRow {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    /// `j < a`: `y_j(x) < avg_j` for every `x`.
    pub early_strict: bool,
    /// `a <= j < b`: `y_j(2) >= avg_j`.
    pub middle_accept_2: bool,
    /// `a <= j < b`: `y_j(1) < avg_j`.
    pub middle_reject_1: bool,
    /// `a <= j < b`: `y_j(3) < avg_j`.
    pub middle_reject_3: bool,
    /// `b <= j < n`: `y_j(1) < avg_j`.
    pub late_reject_1: bool,
    /// `b <= j < n`: `y_j(2) >= avg_j`.
    pub late_accept_2: bool,
    /// `b <= j < n`: `y_j(3) >= avg_j`.
    pub late_accept_3: bool,
    /// Closed-form averages equal the mean of the next stage's `h` row.
    pub average_consistent: bool,
    /// `h_j(x) = max(y_j(x), avg_j)` for all `j < n`.
    pub optimality_equation: bool,
    pub failures: Vec<String>,
}

impl StageInequalityRow {
    pub fn passed(&self) -> bool {
        self.early_strict
            && self.middle_accept_2
            && self.middle_reject_1
            && self.middle_reject_3
            && self.late_reject_1
            && self.late_accept_2
            && self.late_accept_3
            && self.average_consistent
            && self.optimality_equation
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageInequalityReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub rows: Vec<StageInequalityRow>,
}

fn stage_row(n: usize) -> Result<StageInequalityRow> {
    let t = K3Thresholds::compute(n)?;
    let (a, b) = (t.a, t.b);
    let avg = t.h_stage_averages();
    let h = t.h_rows()?;
    let y = |j: usize, x: usize| -> Result<Rational> {
        if x > j {
            Ok(qi(0))
        } else {
            reward_k3(n, j, x)
        }
    };

    let mut row = StageInequalityRow {
        n,
        a,
        b,
        early_strict: true,
        middle_accept_2: true,
        middle_reject_1: true,
        middle_reject_3: true,
        late_reject_1: true,
        late_accept_2: true,
        late_accept_3: true,
        average_consistent: true,
        optimality_equation: true,
        failures: Vec::new(),
    };
    let mut fail = |flag: &mut bool, msg: String| {
        *flag = false;
        row.failures.push(msg);
    };
    let mut flags = [true; 9];

    for j in 1..n {
        let c = &avg[j - 1];
        if j < a {
            for x in 1..=j {
                if y(j, x)? >= *c {
                    fail(&mut flags[0], format!("early j={j} x={x}"));
                }
            }
        } else if j < b {
            if y(j, 2)? < *c {
                fail(&mut flags[1], format!("middle accept 2 at j={j}"));
            }
            if y(j, 1)? >= *c {
                fail(&mut flags[2], format!("middle reject 1 at j={j}"));
            }
            if y(j, 3)? >= *c {
                fail(&mut flags[3], format!("middle reject 3 at j={j}"));
            }
        } else {
            if y(j, 1)? >= *c {
                fail(&mut flags[4], format!("late reject 1 at j={j}"));
            }
            if y(j, 2)? < *c {
                fail(&mut flags[5], format!("late accept 2 at j={j}"));
            }
            if y(j, 3)? < *c {
                fail(&mut flags[6], format!("late accept 3 at j={j}"));
            }
        }

        let mean: Rational = h[j].iter().sum::<Rational>() / qi(j as i64 + 1);
        if mean != *c {
            fail(&mut flags[7], format!("average mismatch at j={j}"));
        }
        for x in 1..=j {
            let yx = y(j, x)?;
            let best = if yx >= *c { yx } else { c.clone() };
            if h[j - 1][x - 1] != best {
                fail(&mut flags[8], format!("optimality equation at j={j} x={x}"));
            }
        }
    }

    [
        row.early_strict,
        row.middle_accept_2,
        row.middle_reject_1,
        row.middle_reject_3,
        row.late_reject_1,
        row.late_accept_2,
        row.late_accept_3,
        row.average_consistent,
        row.optimality_equation,
    ] = flags;
    Ok(row)
}

/// Runs the stage-wise inequality suite for `n_lo <= n <= n_hi`.
pub fn stage_inequalities(n_lo: usize, n_hi: usize) -> Result<StageInequalityReport> {
    if n_lo < 3 || n_lo > n_hi {
        return Err(Error::OutOfRange(format!("need 3 <= from <= to, got {n_lo}..={n_hi}")));
    }
    let rows = (n_lo..=n_hi).into_par_iter().map(stage_row).collect::<Result<Vec<_>>>()?;
    Ok(StageInequalityReport { n_lo, n_hi, rows })
}

impl Report for StageInequalityReport {
    fn passed(&self) -> bool {
        self.rows.iter().all(StageInequalityRow::passed)
    }

    fn header(&self) -> Vec<String> {
        header(&[
            "n",
            "a",
            "b",
            "early_strict",
            "middle_accept_2",
            "middle_reject_1",
            "middle_reject_3",
            "late_reject_1",
            "late_accept_2",
            "late_accept_3",
            "average_consistent",
            "optimality_equation",
            "passed",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![r.n.to_string(), r.a.to_string(), r.b.to_string()];
                v.extend(
                    [
                        r.early_strict,
                        r.middle_accept_2,
                        r.middle_reject_1,
                        r.middle_reject_3,
                        r.late_reject_1,
                        r.late_accept_2,
                        r.late_accept_3,
                        r.average_consistent,
                        r.optimality_equation,
                        r.passed(),
                    ]
                    .map(|b| b.to_string()),
                );
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_small_range() {
        let r = threshold_invariants(3, 120).unwrap();
        for row in &r.rows {
            assert!(row.passed(), "{row:?}");
        }
        let row40 = r.rows.iter().find(|r| r.n == 40).unwrap();
        assert_eq!(row40.u_bounds, Some(true));
        assert_eq!(r.rows[0].u_bounds, None);
    }

    #[test]
    fn stage_inequalities_hold_from_32() {
        let r = stage_inequalities(32, 60).unwrap();
        for row in &r.rows {
            assert!(row.passed(), "n={}: {:?}", row.n, row.failures);
        }
    }

    #[test]
    fn stage_inequalities_also_hold_below_32() {
        // Not claimed by the closed forms, but the exact check passes anyway.
        let r = stage_inequalities(3, 31).unwrap();
        let failing: Vec<usize> = r.rows.iter().filter(|r| !r.passed()).map(|r| r.n).collect();
        assert!(failing.is_empty(), "{failing:?}");
    }
}
