//! Finite-`n` thresholds and success probabilities next to their limits.

use rayon::prelude::*;
use serde::Serialize;

use super::{header, Report};
use crate::closed_form::{asymptotic_constants, k3_thresholds, p1, p2, AsymptoticConstants};
use crate::error::{Error, Result};
use crate::exact_math::to_f64;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Values come from exact rationals; `false` means the float fast path.
    pub exact: bool,
    pub a: usize,
    pub b: usize,
    pub a_ratio: f64,
    pub b_ratio: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// `a/n - d1`
    pub a_gap: f64,
    /// `b/n - d2`
    pub b_gap: f64,
    /// `p1 - 1/e`
    pub p1_gap: f64,
    /// `p2 - 1/4`
    pub p2_gap: f64,
    /// `p3 - p3_inf`
    pub p3_gap: f64,
}

impl ConvergenceRow {
    /// Heuristic guard `|a/n - d1|, |b/n - d2| < 2/√n`. Not a proven bound.
    pub fn within_heuristic(&self) -> bool {
        let tol = 2.0 / (self.n as f64).sqrt();
        self.a_gap.abs() < tol && self.b_gap.abs() < tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub constants: AsymptoticConstants,
    pub exact_cutoff: usize,
    pub rows: Vec<ConvergenceRow>,
}

fn float_thresholds(n: usize) -> (usize, usize, f64, f64) {
    let nf = n as f64;
    // b: smallest j with Σ_{i=j+1}^n 1/(i-2) <= 1/2
    let mut tail = 0.0;
    let mut b = 2;
    for j in (3..=n).rev() {
        let next = tail + 1.0 / (j as f64 - 2.0);
        if next > 0.5 {
            b = j;
            break;
        }
        tail = next;
    }
    let bf = b as f64;
    let tail_from_b = tail + if b > 2 { 1.0 / (bf - 2.0) } else { 0.0 };
    let u = (bf - 2.0) * (2.0 * nf - 4.0) * tail_from_b;
    let f = |x: f64| 3.0 * x * x - (1.0 + 4.0 * nf) * x + (nf - 2.0) * bf + 2.0 * (nf + 1.0) + u;
    let a = (2..=n).find(|&x| f(x as f64) <= 0.0).unwrap_or(n);
    let af = a as f64;
    let d = nf * (nf - 1.0) * (nf - 2.0);
    let p3 = (af - 1.0) * (af * af - (1.0 + 2.0 * nf) * af + (nf - 2.0) * bf + 2.0 * (nf + 1.0) + u) / d;

    let mut h = 0.0;
    let mut r = 1;
    for j in (2..=n).rev() {
        let next = h + 1.0 / (j as f64 - 1.0);
        if next > 1.0 {
            r = j;
            break;
        }
        h = next;
    }
    let p1 = if r == 1 { 1.0 / nf } else { (r as f64 - 1.0) / nf * (h + 1.0 / (r as f64 - 1.0)) };
    (a, b, p1, p3)
}

fn row(n: usize, exact: bool, k: &AsymptoticConstants) -> Result<ConvergenceRow> {
    let (a, b, p1v, p2v, p3v) = if exact {
        let t = k3_thresholds(n)?;
        (t.a, t.b, to_f64(&p1(n)?), to_f64(&p2(n)?), to_f64(&t.c()))
    } else {
        let (a, b, p1v, p3v) = float_thresholds(n);
        let r = ((n + 2) / 2) as f64;
        let nf = n as f64;
        (a, b, p1v, (r - 1.0) * (nf - r + 1.0) / (nf * (nf - 1.0)), p3v)
    };
    let nf = n as f64;
    let (a_ratio, b_ratio) = (a as f64 / nf, b as f64 / nf);
    Ok(ConvergenceRow {
        n,
        exact,
        a,
        b,
        a_ratio,
        b_ratio,
        p1: p1v,
        p2: p2v,
        p3: p3v,
        a_gap: a_ratio - k.d1,
        b_gap: b_ratio - k.d2,
        p1_gap: p1v - (-1.0f64).exp(),
        p2_gap: p2v - 0.25,
        p3_gap: p3v - k.p3_inf,
    })
}

/// One row per `n` in `points`; exact for `n <= exact_cutoff`.
pub fn convergence_report(points: &[usize], exact_cutoff: usize) -> Result<ConvergenceReport> {
    if let Some(&n) = points.iter().find(|&&n| n < 3) {
        return Err(Error::TooSmall { what: "convergence_report", n, min: 3 });
    }
    let constants = asymptotic_constants();
    let rows = points.par_iter().map(|&n| row(n, n <= exact_cutoff, &constants)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { constants, exact_cutoff, rows })
}

impl Report for ConvergenceReport {
    /// Only the heuristic guard is judged; rows below 100 are informational.
    fn passed(&self) -> bool {
        self.rows.iter().filter(|r| r.n >= 100).all(ConvergenceRow::within_heuristic)
    }

    fn header(&self) -> Vec<String> {
        header(&[
            "n", "exact", "a", "b", "a_ratio", "b_ratio", "p1", "p2", "p3", "a_gap", "b_gap", "p1_gap", "p2_gap",
            "p3_gap",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let f = |x: f64| format!("{x:.15e}");
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.exact.to_string(),
                    r.a.to_string(),
                    r.b.to_string(),
                    f(r.a_ratio),
                    f(r.b_ratio),
                    f(r.p1),
                    f(r.p2),
                    f(r.p3),
                    f(r.a_gap),
                    f(r.b_gap),
                    f(r.p1_gap),
                    f(r.p2_gap),
                    f(r.p3_gap),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_path_agrees_with_exact() {
        let exact = convergence_report(&[13, 50, 200, 600], 10_000).unwrap();
        let float = convergence_report(&[13, 50, 200, 600], 0).unwrap();
        for (e, f) in exact.rows.iter().zip(&float.rows) {
            assert!(e.exact && !f.exact);
            assert_eq!((e.a, e.b), (f.a, f.b), "n={}", e.n);
            assert!((e.p1 - f.p1).abs() < 1e-12);
            assert!((e.p2 - f.p2).abs() < 1e-12);
            assert!((e.p3 - f.p3).abs() < 1e-12);
        }
    }

    #[test]
    fn heuristic_guard_at_large_n() {
        // Empirical 2/√n guard, not a proven rate.
        let r = convergence_report(&[100, 1000, 2000], 2000).unwrap();
        assert!(r.rows.iter().all(|r| r.exact));
        for row in &r.rows {
            assert!(row.within_heuristic(), "{row:?}");
        }
        assert!(r.passed());
    }

    #[test]
    fn limits_at_2000() {
        let r = convergence_report(&[2000], 2000).unwrap();
        let row = &r.rows[0];
        assert!(row.b_gap.abs() < 0.01);
        assert!(row.p3_gap > 0.0 && row.p3_gap < 0.01);
        assert!(row.p1_gap > 0.0 && row.p1_gap < 1e-3);
    }

    #[test]
    fn rejects_small_n() {
        assert!(convergence_report(&[2], 10).is_err());
    }
}
