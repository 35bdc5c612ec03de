//! `superdeform`: batch verification front-end.
//!
//! Exit codes: 0 verified, 1 verification failed, 2 input or configuration
//! error.

mod commands;
mod sample;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use superdeform_core::catalog::Family;
use superdeform_core::rational::{parse_rational, Rational};

use commands::{CliError, KRange, Outcome};

#[derive(Parser, Debug)]
#[command(name = "superdeform", version, about = "Exact checks for osp(2|2)-modules of weighted densities on R^{1|2}")]
struct Cli {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure constants, cocycle conditions and algebra laws.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Decide which combinations of cup products are coboundaries.
    Nontrivial(NontrivialArgs),
    /// Integrability and flatness of a deformation given as a JSON file.
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Inspect the cocycle catalog and its cup products.
    #[command(subcommand)]
    Catalog(CatalogCmd),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TableChoice {
    /// Bracket table consistent with the Poisson bracket.
    Standard,
    /// The uncorrected table, kept verbatim.
    Printed,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Compare a bracket table with the Poisson bracket and check Jacobi.
    Structure {
        /// Bracket table file (`[U,V] = c*W + ...` per line).
        #[arg(long, conflicts_with = "table")]
        fixture: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "standard")]
        table: TableChoice,
    },
    /// Build catalog cocycles and check the cocycle condition.
    Cocycles {
        /// Weight d for the omega families.
        #[arg(long, value_parser = rational_arg, conflicts_with = "m")]
        d: Option<Rational>,
        /// Resonance m = 2d for the gamma and Gamma families.
        #[arg(long)]
        m: Option<u32>,
        /// Index range `a..b` (inclusive) or a single index.
        #[arg(long, value_parser = KRange::parse, default_value = "0..5", allow_hyphen_values = true)]
        k: KRange,
        /// Restrict to these families (repeatable).
        #[arg(long, value_parser = family_arg)]
        family: Vec<Family>,
    },
    /// Randomized algebra laws and δ∘δ = 0, reproducible through --seed.
    Laws {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        /// Number of random 1-cochains for δ∘δ = 0.
        #[arg(long, default_value_t = 10)]
        cochains: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Case {
    /// 2d not a natural number: a·Ω1 + b·Ω2.
    Generic,
    /// 2d = m: a1·Φ1 + ... + a6·Φ6.
    Resonant,
}

#[derive(Args, Debug)]
struct NontrivialArgs {
    #[arg(long, value_enum)]
    case: Case,
    #[arg(long, value_parser = rational_arg)]
    d: Option<Rational>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: i64,
    /// Ansatz bounds (∂_x order and coefficient degree); default k + 3.
    #[arg(long)]
    bounds: Option<usize>,
    /// Keep only unknowns in the weight spaces met by the targets.
    #[arg(long)]
    prune: bool,
    /// Do not retry negative outcomes with larger bounds.
    #[arg(long)]
    no_escalate: bool,
}

#[derive(Subcommand, Debug)]
enum DeformCmd {
    /// Evaluate the integrability conditions.
    Check {
        params: PathBuf,
        /// Also decide whether the second-order obstruction is a coboundary.
        #[arg(long)]
        solve: bool,
        /// Truncation K of the symbol module.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check the homomorphism identity on all 64 basis pairs.
    Verify {
        params: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Run the check even when the conditions fail.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// Print a cocycle's values on the eight basis elements.
    Dump {
        #[arg(long, value_parser = family_arg)]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, value_parser = rational_arg)]
        d: Option<Rational>,
    },
    /// Check the linear relations among the twelve cup products.
    Relations {
        #[arg(long)]
        k: i64,
    },
    /// Compare the transcribed expansion of Φ_i with the cup product.
    Phi {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        k: i64,
    },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn family_arg(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Top-level JSON report.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub exit_code: u8,
    pub summary: Vec<String>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    fn from_result(command: String, result: Result<Outcome, CliError>) -> Self {
        match result {
            Ok(o) => Report {
                command,
                status: if o.passed { Status::Pass } else { Status::Fail },
                exit_code: if o.passed { 0 } else { 1 },
                summary: o.summary,
                details: o.details,
            },
            Err(e) => Report {
                command,
                status: Status::Error,
                exit_code: 2,
                summary: vec![e.0],
                details: Value::Null,
            },
        }
    }

    /// Rendered through `Value`, so parsing and re-rendering reproduces the
    /// same bytes.
    fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("reports serialize");
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    fn to_text(&self) -> String {
        let mut out = match self.status {
            Status::Pass => format!("{}: PASS\n", self.command),
            Status::Fail => format!("{}: FAIL\n", self.command),
            Status::Error => format!("{}: error\n", self.command),
        };
        for line in &self.summary {
            for l in line.lines() {
                out.push_str("  ");
                out.push_str(l);
                out.push('\n');
            }
        }
        out
    }
}

/// `SUPERDEFORM_WORKERS` sets the size of the worker pool.
fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SUPERDEFORM_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError(format!("SUPERDEFORM_WORKERS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError(format!("cannot start {n} workers: {e}")))
}

fn dispatch(cli: &Cli) -> (String, Result<Outcome, CliError>) {
    match &cli.command {
        Command::Verify(VerifyCmd::Structure { fixture, table }) => {
            ("verify structure".into(), commands::verify_structure(fixture.as_deref(), *table))
        }
        Command::Verify(VerifyCmd::Cocycles { d, m, k, family }) => {
            ("verify cocycles".into(), commands::verify_cocycles(d.clone(), *m, *k, family))
        }
        Command::Verify(VerifyCmd::Laws { cases, cochains }) => {
            ("verify laws".into(), commands::verify_laws(cli.seed, *cases, *cochains))
        }
        Command::Nontrivial(a) => (
            "nontrivial".into(),
            commands::nontrivial(a.case, a.d.clone(), a.m, a.k, a.bounds, a.prune, !a.no_escalate),
        ),
        Command::Deform(DeformCmd::Check { params, solve, k }) => {
            ("deform check".into(), commands::deform_check(params, *solve, *k))
        }
        Command::Deform(DeformCmd::Verify { params, k, force }) => {
            ("deform verify".into(), commands::deform_verify(params, *k, *force))
        }
        Command::Catalog(CatalogCmd::Dump { family, k, d }) => {
            ("catalog dump".into(), commands::catalog_dump(*family, *k, d.clone()))
        }
        Command::Catalog(CatalogCmd::Relations { k }) => ("catalog relations".into(), commands::catalog_relations(*k)),
        Command::Catalog(CatalogCmd::Phi { i, k }) => ("catalog phi".into(), commands::catalog_phi(*i, *k)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, result) = match configure_workers() {
        Ok(()) => dispatch(&cli),
        Err(e) => ("configuration".into(), Err(e)),
    };
    let report = Report::from_result(command, result);
    if cli.json {
        println!("{}", report.to_json());
    } else if report.status == Status::Error {
        eprint!("{}", report.to_text());
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code)
}
