use std::fs;
use std::path::Path;

use clap::ValueEnum;
use kthstop_core::analysis::{
    check_best_rank_dominance, check_gamma_extremality, check_gamma_extremality_sampled, check_monotonicity_in_n,
    convergence_report, stage_inequalities, threshold_invariants, verify_third_best_rule, GammaReport,
    MonotonicityScan, PknTable, Report, DEFAULT_SUBSET_BUDGET,
};
use kthstop_core::{
    evaluate, k3_thresholds, p1, p2, r_threshold, rprime_threshold, simulate as run_simulation, solve as run_solve,
    tau_policy, to_f64, Error, Goal, PolicyFile, StagePolicy, ThresholdPolicyDescriptor,
};
use serde_json::{json, Value};

use crate::output::{csv_text, json_text, rational, stdout, tagged, write_file, SCHEMA};
use crate::{exit, ExportArgs, Failure, Format, Suite, Table, VerifyArgs};

pub fn solve(n: usize, goal: &Goal) -> Result<u8, Failure> {
    let (table, policy) = run_solve(n, goal)?;
    let out = json!({
        "schema": SCHEMA,
        "n": n,
        "goal": goal,
        "value": rational(table.value()),
        "policy": policy.to_file().accept,
    });
    stdout(&json_text(&out))?;
    Ok(0)
}

fn thresholds_json(n: usize) -> Result<Value, Failure> {
    let t = k3_thresholds(n)?;
    Ok(json!({
        "n": n,
        "r": r_threshold(n)?,
        "rprime": rprime_threshold(n)?,
        "a": t.a,
        "b": t.b,
        "u": rational(&t.u),
        "p1": rational(&p1(n)?),
        "p2": rational(&p2(n)?),
        "p3": rational(&t.c()),
    }))
}

pub fn thresholds(n: usize) -> Result<u8, Failure> {
    let mut out = json!({ "schema": SCHEMA });
    out.as_object_mut().unwrap().extend(thresholds_json(n)?.as_object().unwrap().clone());
    stdout(&json_text(&out))?;
    Ok(0)
}

fn load_policy(n: usize, spec: &str) -> Result<StagePolicy, Failure> {
    let desc = match spec {
        "tau1" => ThresholdPolicyDescriptor::best_choice(n)?,
        "tau2" => ThresholdPolicyDescriptor::postdoc(n)?,
        "tau3" => ThresholdPolicyDescriptor::third_best(n)?,
        "stop-at-n" => return Ok(StagePolicy::stop_at_n(n)),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
            let file: PolicyFile = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{path}: {e}")))?;
            return Ok(StagePolicy::new(file.n, file.accept)?);
        }
    };
    Ok(tau_policy(&desc)?)
}

pub fn simulate(n: usize, goal: &Goal, policy: &str, trials: u64, seed: u64) -> Result<u8, Failure> {
    if trials == 0 {
        return Err(Error::EmptySimulation.into());
    }
    let policy = load_policy(n, policy)?;
    let report = run_simulation(n, goal, &policy, trials, seed)?;
    let exact = evaluate(n, goal, &policy)?;
    let mut out = tagged(&report);
    out["exact"] = rational(&exact);
    out["z_score"] = json!(report.z_score(to_f64(&exact)));
    stdout(&json_text(&out))?;
    Ok(0)
}

/// What every suite hands back for writing.
struct SuiteOutput {
    passed: bool,
    json: Value,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl SuiteOutput {
    fn from_report<R: Report + serde::Serialize>(r: &R) -> Self {
        Self { passed: r.passed(), json: tagged(r), header: r.header(), rows: r.rows() }
    }
}

fn range(args: &VerifyArgs, lo: usize, hi: usize) -> (usize, usize) {
    (args.from.unwrap_or(lo), args.to.unwrap_or(hi))
}

fn gamma_reports(args: &VerifyArgs) -> Result<Vec<GammaReport>, Failure> {
    let n = args.n.unwrap_or(10);
    let sizes: Vec<usize> = match args.c {
        Some(c) => vec![c],
        None => (1..n).collect(),
    };
    sizes
        .into_iter()
        .map(|c| match check_gamma_extremality(n, c, DEFAULT_SUBSET_BUDGET) {
            Err(Error::BudgetExceeded { .. }) if args.samples.is_some() => {
                Ok(check_gamma_extremality_sampled(n, c, args.samples.unwrap_or(0), args.seed)?)
            }
            other => Ok(other?),
        })
        .collect()
}

fn run_suite(args: &VerifyArgs) -> Result<SuiteOutput, Failure> {
    let out = match args.suite {
        Suite::Theorem21 => {
            let (lo, hi) = range(args, 3, 200);
            SuiteOutput::from_report(&verify_third_best_rule(lo, hi)?)
        }
        Suite::Theorem31 => SuiteOutput::from_report(&check_best_rank_dominance(args.nmax.unwrap_or(60))?),
        Suite::Theorem32 => SuiteOutput::from_report(&check_monotonicity_in_n(args.nmax.unwrap_or(60))?),
        Suite::Remark31 => SuiteOutput::from_report(&MonotonicityScan::compute(args.nmax.unwrap_or(50))?),
        Suite::Theorem33 => {
            let reports = gamma_reports(args)?;
            let header = reports.first().map(|r| r.header()).unwrap_or_default();
            SuiteOutput {
                passed: reports.iter().all(|r| r.passed()),
                json: json!({ "schema": SCHEMA, "reports": reports }),
                header,
                rows: reports.iter().flat_map(|r| r.rows()).collect(),
            }
        }
        Suite::Lemmas => {
            let (lo, hi) = range(args, 32, 200);
            let stage = stage_inequalities(lo, hi)?;
            let bounds = threshold_invariants(lo, hi)?;
            let mut header = stage.header();
            header.extend(bounds.header().into_iter().skip(3).map(|h| format!("threshold_{h}")));
            let rows = stage
                .rows()
                .into_iter()
                .zip(bounds.rows())
                .map(|(mut s, b)| {
                    s.extend(b.into_iter().skip(3));
                    s
                })
                .collect();
            SuiteOutput {
                passed: stage.passed() && bounds.passed(),
                json: json!({ "schema": SCHEMA, "stage_inequalities": stage, "threshold_bounds": bounds }),
                header,
                rows,
            }
        }
        Suite::Convergence => {
            let points = args.points.clone().unwrap_or_else(|| vec![100, 1000, 2000]);
            SuiteOutput::from_report(&convergence_report(&points, args.nmax_exact)?)
        }
    };
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let name = args.suite.to_possible_value().expect("no skipped variants").get_name().to_string();
    let out = run_suite(args)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::output(format!("{}: {e}", args.out_dir.display())))?;
    let json_path = args.out_dir.join(format!("{name}.json"));
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    let mut json = out.json;
    json["suite"] = json!(name);
    json["passed"] = json!(out.passed);
    write_file(&json_path, &json_text(&json))?;
    write_file(&csv_path, &csv_text(&out.header, &out.rows))?;
    stdout(&format!(
        "{name}: {} ({}, {})\n",
        if out.passed { "PASS" } else { "FAIL" },
        json_path.display(),
        csv_path.display()
    ))?;
    Ok(if out.passed { 0 } else { exit::VERIFY_FAILED })
}

fn rational_cells(r: &kthstop_core::Rational) -> [String; 3] {
    [r.numer().to_string(), r.denom().to_string(), kthstop_core::decimal_string(r, 15)]
}

fn pkn_table(nmax: usize, format: Format) -> Result<String, Failure> {
    if nmax < 1 {
        return Err(Error::TooSmall { what: "pkn export", n: nmax, min: 1 }.into());
    }
    let table = PknTable::compute(nmax)?;
    let cells = (1..=nmax).flat_map(|n| (1..=n).map(move |k| (n, k)));
    Ok(match format {
        Format::Csv => {
            let header: Vec<String> = ["n", "k", "p_num", "p_den", "p_decimal"].map(String::from).to_vec();
            let rows: Vec<Vec<String>> = cells
                .map(|(n, k)| {
                    let mut row = vec![n.to_string(), k.to_string()];
                    row.extend(rational_cells(table.p(k, n)));
                    row
                })
                .collect();
            csv_text(&header, &rows)
        }
        Format::Json => {
            let rows: Vec<Value> =
                cells.map(|(n, k)| json!({ "n": n, "k": k, "p": rational(table.p(k, n)) })).collect();
            json_text(&json!({ "schema": SCHEMA, "table": "pkn", "nmax": nmax, "rows": rows }))
        }
    })
}

fn thresholds_table(nmax: usize, format: Format) -> Result<String, Failure> {
    if nmax < 3 {
        return Err(Error::TooSmall { what: "thresholds export", n: nmax, min: 3 }.into());
    }
    Ok(match format {
        Format::Csv => {
            let mut header: Vec<String> = ["n", "r", "rprime", "a", "b"].map(String::from).to_vec();
            for name in ["u", "p1", "p2", "p3"] {
                header.extend(["num", "den", "decimal"].map(|s| format!("{name}_{s}")));
            }
            let rows = (3..=nmax)
                .map(|n| -> Result<Vec<String>, Failure> {
                    let t = k3_thresholds(n)?;
                    let mut row = vec![
                        n.to_string(),
                        r_threshold(n)?.to_string(),
                        rprime_threshold(n)?.to_string(),
                        t.a.to_string(),
                        t.b.to_string(),
                    ];
                    for r in [t.u.clone(), p1(n)?, p2(n)?, t.c()] {
                        row.extend(rational_cells(&r));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, _>>()?;
            csv_text(&header, &rows)
        }
        Format::Json => {
            let rows = (3..=nmax).map(thresholds_json).collect::<Result<Vec<_>, _>>()?;
            json_text(&json!({ "schema": SCHEMA, "table": "thresholds", "nmax": nmax, "rows": rows }))
        }
    })
}

fn convergence_table(nmax: usize, nmax_exact: usize, format: Format) -> Result<String, Failure> {
    if nmax < 3 {
        return Err(Error::TooSmall { what: "convergence export", n: nmax, min: 3 }.into());
    }
    let points: Vec<usize> = (3..=nmax).collect();
    let report = convergence_report(&points, nmax_exact)?;
    Ok(match format {
        Format::Csv => csv_text(&report.header(), &report.rows()),
        Format::Json => {
            let mut v = tagged(&report);
            v["table"] = json!("convergence");
            json_text(&v)
        }
    })
}

pub fn export(args: &ExportArgs) -> Result<u8, Failure> {
    let text = match args.table {
        Table::Pkn => pkn_table(args.nmax, args.format)?,
        Table::Thresholds => thresholds_table(args.nmax, args.format)?,
        Table::Convergence => convergence_table(args.nmax, args.nmax_exact, args.format)?,
    };
    match &args.out {
        Some(path) => write_file(Path::new(path), &text)?,
        None => stdout(&text)?,
    }
    Ok(0)
}
