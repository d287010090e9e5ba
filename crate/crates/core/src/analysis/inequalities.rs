//! Inequalities between optimal values `p(k, n)` across `k` and `n`.

use serde::Serialize;

use super::{header, PknTable, Report};
use crate::closed_form::{p2, p3};
use crate::error::{Error, Result};

/// Reference pairs `(k, n)`, `n <= 50`, where `p(k, n) < p(k+1, n)` with
/// `k < ⌈n/2⌉`.
pub const KNOWN_MONOTONICITY_BREAKS: [(usize, usize); 10] =
    [(2, 5), (2, 7), (7, 15), (9, 19), (10, 21), (12, 25), (21, 43), (22, 47), (24, 49), (24, 50)];

fn violations_in(table: &PknTable) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 3..=table.n_max() {
        for k in 1..n.div_ceil(2) {
            if table.p(k, n) < table.p(k + 1, n) {
                out.push((k, n));
            }
        }
    }
    out.sort_by_key(|&(k, n)| (n, k));
    out
}

fn k_ratio_in(table: &PknTable) -> Vec<KRatioRow> {
    (3..=table.n_max())
        .map(|n| {
            let cap = n.div_ceil(2);
            let mut k = 1;
            while k < cap && table.p(k, n) >= table.p(k + 1, n) {
                k += 1;
            }
            KRatioRow { n, k_max: k, ratio: k as f64 / n as f64 }
        })
        .collect()
}

/// All `(k, n)` with `1 <= k < ⌈n/2⌉`, `n <= n_max`, and `p(k, n) < p(k+1, n)`,
/// ordered by `n` then `k`.
pub fn scan_k_monotonicity(n_max: usize) -> Result<Vec<(usize, usize)>> {
    if n_max < 3 {
        return Err(Error::TooSmall { what: "scan_k_monotonicity", n: n_max, min: 3 });
    }
    Ok(violations_in(&PknTable::compute(n_max)?))
}

/// `K(n)`: longest prefix `p(1,n) >= p(2,n) >= … >= p(K,n)` with `K <= ⌈n/2⌉`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KRatioRow {
    pub n: usize,
    pub k_max: usize,
    pub ratio: f64,
}

pub fn scan_k_ratio(n_max: usize) -> Result<Vec<KRatioRow>> {
    if n_max < 3 {
        return Err(Error::TooSmall { what: "scan_k_ratio", n: n_max, min: 3 });
    }
    Ok(k_ratio_in(&PknTable::compute(n_max)?))
}

/// Monotonicity-in-`k` scan with the `K(n)` table alongside.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityScan {
    pub n_max: usize,
    pub violations: Vec<(usize, usize)>,
    pub known: Vec<(usize, usize)>,
    pub k_ratio: Vec<KRatioRow>,
}

impl MonotonicityScan {
    pub fn compute(n_max: usize) -> Result<Self> {
        if n_max < 3 {
            return Err(Error::TooSmall { what: "monotonicity scan", n: n_max, min: 3 });
        }
        let table = PknTable::compute(n_max)?;
        Ok(Self {
            n_max,
            violations: violations_in(&table),
            known: KNOWN_MONOTONICITY_BREAKS.iter().copied().filter(|&(_, n)| n <= n_max).collect(),
            k_ratio: k_ratio_in(&table),
        })
    }
}

impl Report for MonotonicityScan {
    /// The scan agrees with the reference list on `n <= 50`; pairs beyond
    /// that are reported, not judged.
    fn passed(&self) -> bool {
        let found: Vec<_> = self.violations.iter().copied().filter(|&(_, n)| n <= 50).collect();
        found == self.known
    }

    fn header(&self) -> Vec<String> {
        header(&["n", "k_max", "k_ratio", "violating_k"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.k_ratio
            .iter()
            .map(|r| {
                let ks: Vec<String> =
                    self.violations.iter().filter(|&&(_, n)| n == r.n).map(|&(k, _)| k.to_string()).collect();
                vec![r.n.to_string(), r.k_max.to_string(), format!("{:.6}", r.ratio), ks.join(" ")]
            })
            .collect()
    }
}

/// `p(1, n) = p(n, n) > p(k, n)` for `1 < k < n`, and `p(k, n) = p(n-k+1, n)`.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub n_max: usize,
    pub checked: usize,
    pub strict_violations: Vec<(usize, usize)>,
    pub symmetry_violations: Vec<(usize, usize)>,
}

fn symmetry_violations(table: &PknTable, n_hi: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=n_hi {
        for k in 1..=n {
            if table.p(k, n) != table.p(n + 1 - k, n) {
                out.push((k, n));
            }
        }
    }
    out
}

pub fn check_best_rank_dominance(n_max: usize) -> Result<DominanceReport> {
    if n_max < 3 {
        return Err(Error::TooSmall { what: "check_best_rank_dominance", n: n_max, min: 3 });
    }
    let table = PknTable::compute(n_max)?;
    let mut checked = 0;
    let mut strict_violations = Vec::new();
    for n in 3..=n_max {
        for k in 2..n {
            checked += 1;
            if table.p(1, n) <= table.p(k, n) {
                strict_violations.push((k, n));
            }
        }
    }
    Ok(DominanceReport { n_max, checked, strict_violations, symmetry_violations: symmetry_violations(&table, n_max) })
}

impl Report for DominanceReport {
    fn passed(&self) -> bool {
        self.strict_violations.is_empty() && self.symmetry_violations.is_empty()
    }

    fn header(&self) -> Vec<String> {
        header(&["check", "k", "n"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let tag = |name: &str, v: &[(usize, usize)]| -> Vec<Vec<String>> {
            v.iter().map(|&(k, n)| vec![name.to_string(), k.to_string(), n.to_string()]).collect()
        };
        let mut rows = tag("strict", &self.strict_violations);
        rows.extend(tag("symmetry", &self.symmetry_violations));
        rows
    }
}

/// `p(k, n) >= p(k, n+1)` and `p(k, n) >= p(k+1, n+1)`, with observed ties.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityInNReport {
    pub n_max: usize,
    pub checked: usize,
    pub decreasing_violations: Vec<(usize, usize)>,
    pub diagonal_violations: Vec<(usize, usize)>,
    pub symmetry_violations: Vec<(usize, usize)>,
    /// Pairs where `p(k, n) = p(k, n+1)`; strictness is conjectured only.
    pub decreasing_ties: Vec<(usize, usize)>,
    /// Pairs where `p(k, n) = p(k+1, n+1)`.
    pub diagonal_ties: Vec<(usize, usize)>,
}

pub fn check_monotonicity_in_n(n_max: usize) -> Result<MonotonicityInNReport> {
    if n_max < 3 {
        return Err(Error::TooSmall { what: "check_monotonicity_in_n", n: n_max, min: 3 });
    }
    let table = PknTable::compute(n_max + 1)?;
    let mut r = MonotonicityInNReport {
        n_max,
        checked: 0,
        decreasing_violations: Vec::new(),
        diagonal_violations: Vec::new(),
        symmetry_violations: symmetry_violations(&table, n_max + 1),
        decreasing_ties: Vec::new(),
        diagonal_ties: Vec::new(),
    };
    for n in 3..=n_max {
        for k in 1..=n {
            r.checked += 1;
            let here = table.p(k, n);
            let down = table.p(k, n + 1);
            let diag = table.p(k + 1, n + 1);
            if here < down {
                r.decreasing_violations.push((k, n));
            } else if here == down {
                r.decreasing_ties.push((k, n));
            }
            if here < diag {
                r.diagonal_violations.push((k, n));
            } else if here == diag {
                r.diagonal_ties.push((k, n));
            }
        }
    }
    Ok(r)
}

impl Report for MonotonicityInNReport {
    fn passed(&self) -> bool {
        self.decreasing_violations.is_empty()
            && self.diagonal_violations.is_empty()
            && self.symmetry_violations.is_empty()
    }

    fn header(&self) -> Vec<String> {
        header(&["check", "k", "n"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (name, v) in [
            ("decreasing_violation", &self.decreasing_violations),
            ("diagonal_violation", &self.diagonal_violations),
            ("symmetry_violation", &self.symmetry_violations),
            ("decreasing_tie", &self.decreasing_ties),
            ("diagonal_tie", &self.diagonal_ties),
        ] {
            rows.extend(v.iter().map(|&(k, n)| vec![name.to_string(), k.to_string(), n.to_string()]));
        }
        rows
    }
}

/// `p(2, n) > p(3, n)` over a range, from the closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct SecondThirdReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub violations: Vec<usize>,
}

pub fn check_second_beats_third(n_lo: usize, n_hi: usize) -> Result<SecondThirdReport> {
    if n_lo < 3 {
        return Err(Error::TooSmall { what: "check_second_beats_third", n: n_lo, min: 3 });
    }
    let mut violations = Vec::new();
    for n in n_lo..=n_hi {
        if p2(n)? <= p3(n)? {
            violations.push(n);
        }
    }
    Ok(SecondThirdReport { n_lo, n_hi, violations })
}
