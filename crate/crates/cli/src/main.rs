mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kthstop_core::{Error, Goal};

/// Exit statuses.
pub mod exit {
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DOMAIN: u8 = 3;
    pub const INPUT: u8 = 4;
    pub const OUTPUT: u8 = 5;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: exit::USAGE, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { code: exit::INPUT, message: message.into() }
    }

    pub fn output(message: impl Into<String>) -> Self {
        Self { code: exit::OUTPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptySimulation => exit::USAGE,
            _ => exit::DOMAIN,
        };
        Self { code, message: e.to_string() }
    }
}

/// Exact solver and verification toolkit for selecting the k-th best of n candidates.
#[derive(Debug, Parser)]
#[command(name = "kthstop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct GoalArgs {
    /// Target a single absolute rank.
    #[arg(long)]
    k: Option<usize>,
    /// Target any rank in a comma-separated set, e.g. `1,2`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    gamma: Option<Vec<usize>>,
}

impl GoalArgs {
    fn goal(&self) -> Goal {
        match (&self.k, &self.gamma) {
            (Some(k), _) => Goal::SingleRank(*k),
            (None, Some(g)) => Goal::rank_set(g.iter().copied()),
            (None, None) => unreachable!("clap enforces one goal flag"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the optimal stopping problem exactly.
    Solve {
        #[arg(short)]
        n: usize,
        #[command(flatten)]
        goal: GoalArgs,
    },
    /// Print the closed-form thresholds and success probabilities.
    Thresholds {
        #[arg(short)]
        n: usize,
    },
    /// Estimate a policy's success probability by simulation.
    Simulate {
        #[arg(short)]
        n: usize,
        #[command(flatten)]
        goal: GoalArgs,
        /// tau1, tau2, tau3, stop-at-n, or a path to a policy JSON file.
        #[arg(long)]
        policy: String,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification suite and write JSON and CSV reports.
    Verify(VerifyArgs),
    /// Export a table as CSV or JSON.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Theorem21,
    Theorem31,
    Theorem32,
    Remark31,
    Theorem33,
    Lemmas,
    Convergence,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    suite: Suite,
    /// First n of a range scan.
    #[arg(long)]
    from: Option<usize>,
    /// Last n of a range scan.
    #[arg(long)]
    to: Option<usize>,
    /// Largest n of a table scan.
    #[arg(long)]
    nmax: Option<usize>,
    /// Number of candidates (rank-set suite).
    #[arg(short)]
    n: Option<usize>,
    /// Rank-set size; every size when omitted.
    #[arg(short)]
    c: Option<usize>,
    /// Random rank sets per size when exhaustion exceeds the budget.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points for the convergence suite.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    points: Option<Vec<usize>>,
    /// Largest n computed in exact arithmetic by the convergence suite.
    #[arg(long, env = "KTHSTOP_NMAX_EXACT", default_value_t = 2000)]
    nmax_exact: usize,
    /// Directory receiving `<suite>.json` and `<suite>.csv`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Table {
    Pkn,
    Thresholds,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    table: Table,
    #[arg(long, default_value_t = 20)]
    nmax: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "KTHSTOP_NMAX_EXACT", default_value_t = 2000)]
    nmax_exact: usize,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve { n, goal } => commands::solve(n, &goal.goal()),
        Command::Thresholds { n } => commands::thresholds(n),
        Command::Simulate { n, goal, policy, trials, seed } => {
            commands::simulate(n, &goal.goal(), &policy, trials, seed)
        }
        Command::Verify(args) => commands::verify(&args),
        Command::Export(args) => commands::export(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("kthstop: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
