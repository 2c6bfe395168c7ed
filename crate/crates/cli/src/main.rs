//! `dunkl`: reproducible experiments over a setup file. Tables go to CSV,
//! reports to JSON (both under `--out`), a plain summary to stdout.
//!
//! Exit codes: 0 all checks pass, 1 a check or computation failed, 2 usage.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dunkl::harness::DEFAULT_SEED;
use serde::Serialize;

use crate::commands::*;
use crate::report::{CliError, Run};

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Dunkl transform and Dunkl-Riesz experiments", arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Setup file (TOML; see configs/n1g05.cfg).
    #[arg(long, global = true)]
    pub setup: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the subcommand's tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dunkl transform of a corpus function on the grid.
    Transform(TransformArgs),
    /// tau_x f of a radial profile by the spectral and radial routes.
    Translate(TranslateArgs),
    /// Riesz transform by the multiplier, truncated and kernel routes.
    Riesz(RieszArgs),
    /// Hormander integrals at random (y, y0) pairs.
    HormanderCheck(HormanderArgs),
    /// Dyadic Calderon-Zygmund decomposition at level lambda.
    CzDecompose(CzArgs),
    /// ||R_j f||_p / ||f||_p over the corpus.
    LpScan(LpArgs),
    /// Riesz factorization and Sobolev inequality ratios.
    Inequalities(InequalityArgs),
    /// Exact commutativity of Dunkl operators on random polynomials.
    PolyCheck(PolyArgs),
    /// The acceptance criteria on this setup.
    Selftest(SelftestArgs),
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let run = match &cli.command {
        Command::Transform(a) => transform(Run::new("transform", c)?, a)?,
        Command::Translate(a) => translate(Run::new("translate", c)?, a)?,
        Command::Riesz(a) => riesz(Run::new("riesz", c)?, a)?,
        Command::HormanderCheck(a) => hormander_check(Run::new("hormander-check", c)?, a)?,
        Command::CzDecompose(a) => cz_decompose(Run::new("cz-decompose", c)?, a)?,
        Command::LpScan(a) => lp_scan(Run::new("lp-scan", c)?, a)?,
        Command::Inequalities(a) => inequalities(Run::new("inequalities", c)?, a)?,
        Command::PolyCheck(a) => poly_check(Run::new("poly-check", c)?, a)?,
        Command::Selftest(a) => selftest(Run::new("selftest", c)?, a)?,
    };
    run.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dunkl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
