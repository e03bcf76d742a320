//! `gausslab` command line: config ingestion, experiment runs, deterministic artifacts.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a numerical check failed.

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

const DEFAULT_SPEC: &str = include_str!("../fixtures/default_spec.json");

/// An invariant or identity did not hold; maps to exit code 2.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Parser)]
#[command(name = "gausslab", version, about = "Gauss-law-constrained lattice QED laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite-difference and Newton–Cotes coefficients as exact fractions.
    Stencils {
        #[arg(long, value_parser = ["grad", "lap", "cotes"])]
        kind: String,
        #[arg(long)]
        order: usize,
    },
    /// LCU decompositions.
    Lcu {
        #[command(subcommand)]
        cmd: LcuCmd,
    },
    /// Operator identity checks.
    Operators {
        #[command(subcommand)]
        cmd: OperatorsCmd,
    },
    /// Gauss-law checkers.
    Gauss {
        #[command(subcommand)]
        cmd: GaussCmd,
    },
    /// Evolve the reference sector state under H and report conservation.
    Evolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Physics experiments; writes CSV tables and manifest.json to --out.
    Experiment {
        #[arg(value_parser = ["penalty", "faraday", "gauge-drift", "loops", "topo"])]
        kind: String,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resource estimate for one parameter set.
    Estimate {
        #[arg(long)]
        params: PathBuf,
    },
    /// Thermodynamic-limit cost comparison as CSV.
    Compare {
        /// `lo:hi:factor` or a comma-separated list of η.
        #[arg(long)]
        eta_range: String,
        #[arg(long, value_parser = ["cube", "quartic", "quintic"])]
        n_rule: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// 0.5 makes every log₂(1/ε) factor one, the unit-constant comparison.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Run every invariant suite on small fixed instances.
    Selftest {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LcuCmd {
    Dump {
        #[arg(long, value_parser = ["A", "A2", "E2", "grad", "lap", "U"])]
        op: String,
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
        /// Defaults to the cutoff (unit grid spacing).
        #[arg(long)]
        e_max: Option<f64>,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum OperatorsCmd {
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum GaussCmd {
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long, default_value = "sorted", value_parser = ["sorted", "bruteforce"])]
        checker: String,
    },
    Bench {
        /// Comma-separated `M:eta` pairs.
        #[arg(long, default_value = "8:2,16:4,32:8,64:16,128:32")]
        sizes: String,
        #[arg(long, default_value_t = 0)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn selftest(spec: Option<PathBuf>, out: Option<PathBuf>) -> Result<String> {
    let cfg = match &spec {
        Some(p) => config::load_run(p)?,
        None => {
            let c: config::RunConfig = config::parse(DEFAULT_SPEC)?;
            c.spec.validate()?;
            c
        }
    };
    let suites = selftest::run_all(&cfg.spec, cfg.seed);
    let passed = suites.iter().all(|s| s.passed);
    let report = json!({"passed": passed, "suites": suites});
    if let Some(dir) = out {
        let mut run = output::RunDir::create(&dir)?;
        run.json("selftest.json", &report)?;
        let names: Vec<&str> = suites.iter().map(|s| s.name.as_str()).collect();
        run.finish("selftest", serde_json::to_value(&cfg)?, json!({"passed": passed, "suites": names}))?;
    }
    let text = output::to_json(&report)?;
    if !passed {
        print!("{text}");
        bail!(CheckFailed("self-test suite failed".into()));
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<String> {
    match cli.cmd {
        Cmd::Stencils { kind, order } => commands::stencils(&kind, order),
        Cmd::Lcu { cmd: LcuCmd::Dump { op, cutoff, e_max, order, delta, n } } => commands::lcu_dump(&op, cutoff, e_max, order, delta, n),
        Cmd::Operators { cmd: OperatorsCmd::Check { spec } } => commands::operators_check(&spec),
        Cmd::Gauss { cmd: GaussCmd::Check { config, b, checker } } => commands::gauss_check(&config, b, &checker),
        Cmd::Gauss { cmd: GaussCmd::Bench { sizes, b, seed } } => commands::gauss_bench(&sizes, b, seed),
        Cmd::Evolve { spec, t, out } => commands::evolve(&spec, t, out.as_deref()),
        Cmd::Experiment { kind, spec, out } => commands::experiment(&kind, &spec, &out),
        Cmd::Estimate { params } => commands::estimate(&params),
        Cmd::Compare { eta_range, n_rule, t, eps } => commands::compare(&eta_range, &n_rule, t, eps),
        Cmd::Selftest { spec, out } => selftest(spec, out),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e.chain().any(|c| {
        c.downcast_ref::<CheckFailed>().is_some() || matches!(c.downcast_ref::<gausslab::Error>(), Some(gausslab::Error::Numerical(_)))
    });
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
